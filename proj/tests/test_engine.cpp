#include <doctest.h>

#include <cmath>

#include "mcpower/boundary.hpp"
#include "mcpower/engine.hpp"
#include "mcpower/samplers.hpp"

using namespace mcpower;

namespace {

SamplerSpec uniform_spec() {
    SamplerSpec s;
    s.kind = SamplerSpec::Kind::beta;
    s.beta_x = 1.0;
    return s;
}

EngineConfig base_config(std::int64_t n, double gamma, double epsilon,
                         PrecisionRule rule) {
    EngineConfig ec;
    ec.gamma = gamma;
    ec.epsilon = epsilon;
    ec.rule = std::move(rule);
    ec.n_streams = n;
    ec.seed = 11;
    return ec;
}

} // namespace

TEST_CASE("vacuous precision target stops before sampling") {
    SpendingSchedule sched{1e-4, 1000};
    BoundaryTable table(0.05, sched);
    auto src = make_source(uniform_spec(), 11, rng::Domain::main_data,
                           rng::Domain::main_bits, 10);
    const auto r = run_streams(base_config(10, 0.05, 1e-4, PrecisionRule::fixed(1.0)),
                               *src, table);
    CHECK(r.steps == 0);
    CHECK(r.effort == 0);
    CHECK(r.reason == StopReason::rule_admitted);
    CHECK(r.unresolved == 10);
    CHECK(r.interval.low == 0.0);
    CHECK(r.interval.high == 1.0);
}

TEST_CASE("all-negative model yields an interval at zero") {
    // p = 0.5 > alpha deterministically: power 0, every stream negative
    SamplerSpec s;
    s.kind = SamplerSpec::Kind::fixed_p;
    s.fixed_p = 0.5;
    SpendingSchedule sched{1e-3, 200};
    BoundaryTable table(0.05, sched);
    auto src = make_source(s, 3, rng::Domain::main_data, rng::Domain::main_bits, 60);
    const auto r = run_streams(base_config(60, 0.05, 1e-3, PrecisionRule::fixed(0.25)),
                               *src, table);
    CHECK(r.reason == StopReason::rule_admitted);
    CHECK(r.positives == 0);
    CHECK(r.interval.contains(0.0));
    CHECK(r.interval.high < 0.5);
}

TEST_CASE("logged intervals are nested") {
    SpendingSchedule sched{0.01, 1000};
    BoundaryTable table(0.05, sched);
    // the 4-stream toy illustration settings
    auto src4 = make_source(uniform_spec(), 17, rng::Domain::main_data,
                            rng::Domain::main_bits, 4);
    auto cfg = base_config(4, 0.05, 0.01, PrecisionRule::fixed(0.0));
    cfg.max_steps = 4000;
    const auto toy = run_streams(cfg, *src4, table);
    REQUIRE(toy.events.size() >= 2);
    for (std::size_t i = 1; i < toy.events.size(); ++i) {
        CHECK(toy.events[i].low >= toy.events[i - 1].low - 1e-15);
        CHECK(toy.events[i].high <= toy.events[i - 1].high + 1e-15);
    }

    auto src = make_source(uniform_spec(), 11, rng::Domain::main_data,
                           rng::Domain::main_bits, 400);
    const auto r = run_streams(base_config(400, 0.05, 1e-4, PrecisionRule::fixed(0.15)),
                               *src, table);
    REQUIRE(r.events.size() >= 3);
    for (std::size_t i = 1; i < r.events.size(); ++i) {
        CHECK(r.events[i].low >= r.events[i - 1].low - 1e-15);
        CHECK(r.events[i].high <= r.events[i - 1].high + 1e-15);
        CHECK(r.events[i].t >= r.events[i - 1].t);
    }
    CHECK(r.reason == StopReason::rule_admitted);
    CHECK(r.interval.length() <= 0.15);
}

TEST_CASE("effort identity against per-stream records") {
    SpendingSchedule sched{1e-4, 1000};
    BoundaryTable table(0.05, sched);
    auto src = make_source(uniform_spec(), 23, rng::Domain::main_data,
                           rng::Domain::main_bits, 300);
    auto cfg = base_config(300, 0.05, 1e-4, PrecisionRule::fixed(0.2));
    cfg.prior_effort = 1234;
    const auto r = run_streams(cfg, *src, table);
    REQUIRE(r.streams.size() == 300);
    std::uint64_t effort = 1234;
    for (const auto& st : r.streams) {
        effort += static_cast<std::uint64_t>(st.steps);
        if (st.status == StreamStatus::unresolved) CHECK(st.steps == r.steps);
        else CHECK(st.steps <= r.steps);
    }
    CHECK(effort == r.effort);
    CHECK(r.positives + r.negatives + r.unresolved == 300);
}

TEST_CASE("identical runs regardless of worker count") {
    SpendingSchedule sched{1e-4, 1000};
    RunResult reference;
    {
        BoundaryTable table(0.05, sched);
        auto src = make_source(uniform_spec(), 77, rng::Domain::main_data,
                               rng::Domain::main_bits, 500);
        auto cfg = base_config(500, 0.05, 1e-4, PrecisionRule::fixed(0.12));
        cfg.workers = 1;
        reference = run_streams(cfg, *src, table);
    }
    for (const int workers : {3, 8}) {
        BoundaryTable table(0.05, sched);
        auto src = make_source(uniform_spec(), 77, rng::Domain::main_data,
                               rng::Domain::main_bits, 500);
        auto cfg = base_config(500, 0.05, 1e-4, PrecisionRule::fixed(0.12));
        cfg.workers = workers;
        const auto r = run_streams(cfg, *src, table);
        CHECK(r.interval.low == reference.interval.low);
        CHECK(r.interval.high == reference.interval.high);
        CHECK(r.effort == reference.effort);
        CHECK(r.steps == reference.steps);
        CHECK(r.positives == reference.positives);
        REQUIRE(r.events.size() == reference.events.size());
        for (std::size_t i = 0; i < r.events.size(); ++i) {
            CHECK(r.events[i].t == reference.events[i].t);
            CHECK(r.events[i].low == reference.events[i].low);
            CHECK(r.events[i].effort == reference.events[i].effort);
        }
        REQUIRE(r.streams.size() == reference.streams.size());
        for (std::size_t i = 0; i < r.streams.size(); ++i) {
            CHECK(r.streams[i].sum == reference.streams[i].sum);
            CHECK(r.streams[i].steps == reference.streams[i].steps);
            CHECK(r.streams[i].status == reference.streams[i].status);
        }
    }
}

TEST_CASE("effort ceiling truncates with a valid interval") {
    SpendingSchedule sched{1e-4, 1000};
    BoundaryTable table(0.05, sched);
    auto src = make_source(uniform_spec(), 3, rng::Domain::main_data,
                           rng::Domain::main_bits, 50);
    auto cfg = base_config(50, 0.05, 1e-4, PrecisionRule::fixed(0.001));
    cfg.max_effort = 20000;
    const auto r = run_streams(cfg, *src, table);
    CHECK(r.reason == StopReason::effort_ceiling);
    CHECK(r.effort <= 20000);
    CHECK(r.interval.low <= r.interval.high);
    CHECK(r.interval.length() > 0.001); // too wide, hence the truncation
}

TEST_CASE("resumed run reaches the same final state") {
    SpendingSchedule sched{1e-4, 1000};
    const auto spec = uniform_spec();

    BoundaryTable table_a(0.05, sched);
    auto src_a = make_source(spec, 5, rng::Domain::main_data, rng::Domain::main_bits, 200);
    const auto full = run_streams(base_config(200, 0.05, 1e-4, PrecisionRule::fixed(0.2)),
                                  *src_a, table_a);

    BoundaryTable table_b(0.05, sched);
    auto src_b1 = make_source(spec, 5, rng::Domain::main_data, rng::Domain::main_bits, 200);
    auto half_cfg = base_config(200, 0.05, 1e-4, PrecisionRule::fixed(0.2));
    half_cfg.max_steps = 37;
    const auto half = run_streams(half_cfg, *src_b1, table_b);
    CHECK(half.reason == StopReason::max_steps);

    auto src_b2 = make_source(spec, 5, rng::Domain::main_data, rng::Domain::main_bits, 200);
    auto resume_cfg = base_config(200, 0.05, 1e-4, PrecisionRule::fixed(0.2));
    resume_cfg.initial_streams = half.streams;
    const auto resumed = run_streams(resume_cfg, *src_b2, table_b);

    CHECK(resumed.interval.low == full.interval.low);
    CHECK(resumed.interval.high == full.interval.high);
    CHECK(resumed.steps == full.steps);
    CHECK(resumed.positives == full.positives);
    CHECK(resumed.negatives == full.negatives);
    CHECK(resumed.effort == full.effort);
}

TEST_CASE("checkpoints already passed by a shared table still get tested") {
    // A pilot extends the shared table to 1000; the main run's checkpoint
    // stride is smaller, so its early checkpoints land on already-built
    // steps whose alive law must be reconstructed.
    SpendingSchedule sched{1e-3, 200};
    BoundaryTable table(0.05, sched);
    table.extend_to(1000);

    auto src = make_source(uniform_spec(), 8, rng::Domain::main_data,
                           rng::Domain::main_bits, 120);
    auto cfg = base_config(120, 0.05, 1e-3, PrecisionRule::fixed(0.02));
    JointTestConfig jc;
    jc.schedule = JointSpendingSchedule{0.005, 250, 20};
    cfg.joint = jc;
    cfg.max_steps = 1200;
    const auto r = run_streams(cfg, *src, table);
    // the run crossed checkpoints at 250/500/... without faulting and the
    // joint log recorded them
    CHECK(r.joint_log.size() >= 1);
    double spent = 0.0;
    for (const auto& row : r.joint_log) spent += row.xi;
    CHECK(spent <= 0.005 + 1e-12);
}

TEST_CASE("naive estimator") {
    SamplerSpec ones;
    ones.kind = SamplerSpec::Kind::fixed_p;
    ones.fixed_p = 1.0;
    auto src1 = make_source(ones, 1, rng::Domain::main_data, rng::Domain::main_bits, 50);
    CHECK(naive_estimate(*src1, 50, 20, 0.05) == 0.0);

    SamplerSpec zeros;
    zeros.kind = SamplerSpec::Kind::fixed_p;
    zeros.fixed_p = 0.0;
    auto src0 = make_source(zeros, 1, rng::Domain::main_data, rng::Domain::main_bits, 50);
    CHECK(naive_estimate(*src0, 50, 20, 0.05) == 1.0);

    auto srcu = make_source(uniform_spec(), 31, rng::Domain::main_data,
                            rng::Domain::main_bits, 10000);
    const double est = naive_estimate(*srcu, 10000, 1000, 0.05);
    CHECK(std::fabs(est - 0.05) <= 3 * std::sqrt(0.05 * 0.95 / 10000.0));
}

TEST_CASE("discrete atom at alpha handled by a shifted level") {
    // P[p = 0.05] > 0; run the test at level 0.055 where no atom sits:
    // the power stays F(0.05) = F(0.055) = w1 + w2.
    SamplerSpec d;
    d.kind = SamplerSpec::Kind::discrete;
    d.support = {0.02, 0.05, 0.6};
    d.weights = {0.3, 0.3, 0.4};
    SpendingSchedule sched{1e-3, 200};
    BoundaryTable table(0.055, sched);
    auto src = make_source(d, 4242, rng::Domain::main_data, rng::Domain::main_bits, 400);
    const auto r = run_streams(base_config(400, 0.05, 1e-3, PrecisionRule::fixed(0.22)),
                               *src, table);
    CHECK(r.reason == StopReason::rule_admitted);
    CHECK(r.interval.contains(0.6));
}
