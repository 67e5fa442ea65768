#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mcpower/boundary.hpp"
#include "mcpower/engine.hpp"
#include "mcpower/samplers.hpp"
#include "mcpower/joint_test.hpp"
#include "mcpower/oracle.hpp"
#include "mcpower/verify.hpp"

using namespace mcpower;

namespace {

// definitional T+/T- for cross-checking the threshold implementation
JointStatistics direct_statistics(const std::vector<std::int64_t>& sorted_sums,
                                  const BoundaryTable& table, std::int64_t t,
                                  std::int64_t r_t, std::int64_t a_t, double eta) {
    const auto n = static_cast<std::int64_t>(sorted_sums.size());
    JointStatistics st;
    if (r_t >= 1)
        for (std::int64_t i = r_t; i <= n; ++i)
            if (table.conditional_cdf(t, sorted_sums[static_cast<std::size_t>(i - 1)]) <=
                eta)
                ++st.t_plus;
    if (a_t >= 1)
        for (std::int64_t i = 1; i <= n - a_t + 1; ++i)
            if (table.conditional_cdf(t, sorted_sums[static_cast<std::size_t>(i - 1)]) >=
                1.0 - eta)
                ++st.t_minus;
    return st;
}

} // namespace

TEST_CASE("statistics count tail order statistics") {
    SpendingSchedule sched{1e-4, 1000};
    BoundaryTable table(0.05, sched);
    table.extend_to(100);

    // median sums produce nothing at small eta
    {
        std::vector<std::int64_t> sums(10, 5);
        const auto st = test_statistics(sums, table, 100, 1, 1, 0.05);
        CHECK(st.t_plus == 0);
        CHECK(st.t_minus == 0);
    }

    // 20 sums in the lower eta-tail among 100
    {
        std::int64_t s_low = -1;
        for (std::int64_t s = 0; s <= 100; ++s) {
            if (table.conditional_cdf(100, s) <= 0.05)
                s_low = s;
            else
                break;
        }
        REQUIRE(s_low >= 0);
        std::vector<std::int64_t> sums;
        for (int i = 0; i < 20; ++i) sums.push_back(s_low);
        for (int i = 0; i < 80; ++i) sums.push_back(5);
        std::sort(sums.begin(), sums.end());
        const auto st = test_statistics(sums, table, 100, 1, 1, 0.05);
        CHECK(st.t_plus == 20);
    }
}

TEST_CASE("threshold implementation equals the definition") {
    SpendingSchedule sched{0.2, 5};
    BoundaryTable table(0.05, sched);
    table.extend_to(12);
    const auto& alive = table.alive_dist(12);
    const std::int64_t lo = alive.min_s;
    const std::int64_t hi = lo + static_cast<std::int64_t>(alive.mass.size()) - 1;

    for (const double eta : {0.05, 0.3, 0.5}) {
        for (int rep = 0; rep < 200; ++rep) {
            std::vector<std::int64_t> sums;
            std::uint64_t x = 88172645463325252ULL + static_cast<std::uint64_t>(rep);
            const int n = 1 + rep % 5;
            for (int i = 0; i < n; ++i) {
                x ^= x << 13; x ^= x >> 7; x ^= x << 17;
                sums.push_back(lo + static_cast<std::int64_t>(x % static_cast<std::uint64_t>(hi - lo + 1)));
            }
            std::sort(sums.begin(), sums.end());
            for (std::int64_t r = 0; r <= n; ++r) {
                for (std::int64_t a = 0; a + r <= n; ++a) {
                    const auto fast = test_statistics(sums, table, 12, r, a, eta);
                    const auto slow = direct_statistics(sums, table, 12, r, a, eta);
                    CHECK(fast.t_plus == slow.t_plus);
                    CHECK(fast.t_minus == slow.t_minus);
                }
            }
        }
    }
}

TEST_CASE("counting identity at eta = 1/2") {
    SpendingSchedule sched{0.2, 5};
    BoundaryTable table(0.05, sched);
    table.extend_to(10);
    const auto& alive = table.alive_dist(10);
    const std::int64_t lo = alive.min_s;
    const std::int64_t hi = lo + static_cast<std::int64_t>(alive.mass.size()) - 1;

    // at eta = 1/2 every sum is in at least one tail, so the two counts
    // cover all order statistics in range
    std::vector<std::int64_t> sums;
    std::uint64_t x = 7;
    for (int i = 0; i < 6; ++i) {
        x ^= x << 13; x ^= x >> 7; x ^= x << 17;
        sums.push_back(lo + static_cast<std::int64_t>(x % static_cast<std::uint64_t>(hi - lo + 1)));
    }
    std::sort(sums.begin(), sums.end());
    const std::int64_t n = 6;
    for (std::int64_t r = 1; r <= 2; ++r)
        for (std::int64_t a = 1; a + r <= n; ++a) {
            const auto st = test_statistics(sums, table, 10, r, a, 0.5);
            CHECK(st.t_plus + st.t_minus >= n - r - a + 2);
        }
}

TEST_CASE("decide thresholds") {
    // T+ = 0 never rejects
    const auto none = decide(0, 5, 100, 1, 1, 0.05, 1e-3);
    CHECK_FALSE(none.reject_plus);
    CHECK(none.p_plus == 1.0);

    // the worked case: Bin(100, 0.05) tail at 20
    const auto strong = decide(20, 20, 100, 1, 1, 0.05, 1e-3);
    CHECK(strong.p_plus == doctest::Approx(1.0522953420147268e-07).epsilon(1e-9));
    CHECK(strong.reject_plus);
    CHECK(strong.reject_minus);
    CHECK(strong.both());

    // vacuous sides auto-reject
    const auto vac = decide(0, 3, 10, 0, 1, 0.05, 1e-3);
    CHECK(vac.reject_plus);
    CHECK(vac.p_plus == 0.0);

    CHECK_THROWS(decide(1, 1, 10, 1, 1, 0.05, 0.0));
}

TEST_CASE("choose_ra picks the smallest symmetric credit") {
    CpCache cache(100, 0.008);
    const Interval pilot{0.0, 1.0};

    // already admissible: no credit needed
    const auto none = choose_ra(cache, 49, 49, 2, 1e-4, pilot, PrecisionRule::fixed(1.0));
    CHECK(none.feasible);
    CHECK(none.r == 0);
    CHECK(none.a == 0);

    // minimal k: verify against a linear scan
    const auto rule = PrecisionRule::fixed(0.30);
    const auto got = choose_ra(cache, 20, 20, 60, 1e-4, pilot, rule);
    REQUIRE(got.feasible);
    std::int64_t expect = -1;
    for (std::int64_t k = 0; k <= 30; ++k) {
        const Interval iv = cache.union_interval(20 + k, 20 + k, 60 - 2 * k, 1e-4);
        if (rule.admits(iv)) { expect = k; break; }
    }
    REQUIRE(expect >= 0);
    CHECK(got.r == expect);
    CHECK(got.a == expect);
    CHECK(got.r >= 1);

    // infeasible when even full resolution stays too wide
    CpCache tiny(4, 0.008);
    const auto bad = choose_ra(tiny, 1, 1, 2, 1e-4, pilot, PrecisionRule::fixed(0.001));
    CHECK_FALSE(bad.feasible);
}

TEST_CASE("choose_ra asymmetric completion at odd remainders") {
    // make full resolution admissible but every symmetric split not
    const double gm = 0.05, eps = 0.0;
    CpCache cache(11, gm);
    const std::int64_t R = 4, A = 4, u = 3;
    const double len_full_r =
        intersect_with_pilot(cache.union_interval(R + 2, A + 1, 0, eps), {0.0, 1.0})
            .box.length();
    const double len_sym =
        intersect_with_pilot(cache.union_interval(R + 1, A + 1, 1, eps), {0.0, 1.0})
            .box.length();
    REQUIRE(len_full_r < len_sym);
    const double delta = 0.5 * (len_full_r + len_sym);
    const auto rule = PrecisionRule::fixed(delta);

    // pilots wide enough not to clip, leaning right and left
    const auto right = choose_ra(cache, R, A, u, eps, Interval{0.0, 1.0}, rule);
    REQUIRE(right.feasible);
    CHECK(right.r == 2);
    CHECK(right.a == 1);

    const auto left = choose_ra(cache, R, A, u, eps, Interval{0.0, 0.98}, rule);
    REQUIRE(left.feasible);
    CHECK(left.r == 1);
    CHECK(left.a == 2);
}

TEST_CASE("wrong rejections of the positive null stay within the joint budget") {
    // 1000 small runs where every stream has p > alpha, so any rejection
    // of the positive-side hypothesis with r_t >= 1 is an error; the
    // frequency must stay within the joint budget.
    const double alpha = 0.05, gamma_joint = 0.2, eta = 0.05;
    SamplerSpec spec;
    spec.kind = SamplerSpec::Kind::fixed_p;
    spec.fixed_p = 0.10;
    SpendingSchedule sched{0.05, 20};
    BoundaryTable table(alpha, sched);

    int wrong = 0;
    int tested = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        EngineConfig ec;
        ec.gamma = 0.05;
        ec.epsilon = 0.05;
        ec.rule = PrecisionRule::fixed(0.88);
        JointTestConfig jc;
        jc.eta = eta;
        jc.schedule = JointSpendingSchedule{gamma_joint, 10, 20};
        ec.joint = jc;
        ec.n_streams = 10;
        ec.seed = 71000 + static_cast<std::uint64_t>(rep);
        auto src = make_source(spec, ec.seed, rng::Domain::main_data,
                               rng::Domain::main_bits, 10);
        const RunResult r = run_streams(ec, *src, table);

        bool any_plus_reject = false;
        bool any_test = false;
        double spent = 0.0;
        for (const auto& row : r.joint_log) {
            spent += row.xi;
            if (!row.feasible || row.r < 1) continue;
            any_test = true;
            const double p_plus = oracle::binom_tail(row.unresolved - row.r + 1, eta,
                                                     row.t_plus);
            if (p_plus <= 0.5 * row.xi) any_plus_reject = true;
        }
        CHECK(spent <= gamma_joint + 1e-12);
        if (any_test) ++tested;
        if (any_plus_reject) ++wrong;
    }
    REQUIRE(tested >= 500); // the configuration genuinely exercises the test
    const double bound = 0.5 * gamma_joint;
    const double se = std::sqrt(bound * (1.0 - bound) / 1000.0);
    CHECK(static_cast<double>(wrong) / 1000.0 <= bound + 3.0 * se);
}

TEST_CASE("joint statistic dominated by its binomial bound") {
    const auto res = verify::check_joint_dominance(0.05, SpendingSchedule{0.2, 5},
                                                   {0.06, 0.10, 0.20}, {4, 8, 12}, 0.05);
    CHECK_MESSAGE(res.pass, res.detail);
    // richer eta exercises nontrivial lower tails
    const auto res2 = verify::check_joint_dominance(0.05, SpendingSchedule{0.2, 5},
                                                    {0.06, 0.10, 0.20}, {8, 12}, 0.3);
    CHECK_MESSAGE(res2.pass, res2.detail);
}
