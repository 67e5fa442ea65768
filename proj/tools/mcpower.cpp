// mcpower: conservative confidence intervals, of guaranteed coverage and
// target length, for the power of Monte Carlo tests.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mcpower/boundary.hpp"
#include "mcpower/engine.hpp"
#include "mcpower/interval.hpp"
#include "mcpower/oracle.hpp"
#include "mcpower/pilot_planner.hpp"
#include "mcpower/precision_rule.hpp"
#include "mcpower/report.hpp"
#include "mcpower/samplers.hpp"
#include "mcpower/verify.hpp"

namespace {

using namespace mcpower;

constexpr int kExitOk = 0;
constexpr int kExitTruncated = 2;
constexpr int kExitSamplerFailure = 3;
constexpr int kExitChecksFailed = 4;

std::uint64_t seed_or_env(std::uint64_t seed_flag, bool seed_given) {
    if (seed_given) return seed_flag;
    if (const char* env = std::getenv("MCPOWER_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            throw CLI::ValidationError("MCPOWER_SEED", "not a valid integer seed");
        }
    }
    return 1;
}

struct RunOptions {
    double alpha = 0.05;
    double gamma = 0.01;
    double delta = 0.02;
    std::string rule_text;
    double epsilon = -1.0; // <0: default reference_delta/200
    std::int64_t half_life = 1000;
    std::string sampler_text;
    std::int64_t streams = 0; // 0: plan automatically
    bool no_pilot = false;
    std::int64_t pilot_n = 1000;
    std::int64_t pilot_tmax = 1000;
    double gamma_pilot = -1.0; // <0: 0.1 * gamma
    bool no_joint = false;
    double gamma_joint = -1.0; // <0: 0.1 * gamma
    double eta = 0.05;
    std::int64_t joint_stride = 200000;
    std::int64_t joint_horizon = 20;
    std::uint64_t seed = 1;
    bool seed_given = false;
    int workers = 1;
    std::uint64_t max_effort = 10'000'000'000ULL;
    std::int64_t plan_grid = 25;
    std::int64_t plan_reps = 200;
    std::string out_json;
    std::string out_events;
    std::string out_joint;
    std::string checkpoint_path = "mcpower-checkpoint.json";
    std::string resume_path;
};

void add_run_options(CLI::App* cmd, RunOptions& o, bool planning_only) {
    cmd->add_option("--alpha", o.alpha, "nominal level of the tested hypothesis")
        ->capture_default_str();
    cmd->add_option("--gamma", o.gamma, "1 - coverage of the reported interval")
        ->capture_default_str();
    cmd->add_option("--delta", o.delta, "target interval length (fixed rule)")
        ->capture_default_str();
    cmd->add_option("--rule", o.rule_text,
                    "precision rule: fixed:D | sqrt[:D,MREF] | band:OUT,IN,LC,RC | "
                    "lefttail:D,CUT | custom:FILE (overrides --delta)");
    cmd->add_option("--epsilon", o.epsilon,
                    "per-stream wrong-decision bound (default: tightest rule "
                    "length / 200)");
    cmd->add_option("--spending-halflife", o.half_life,
                    "half life of the error-spending sequence")
        ->capture_default_str();
    cmd->add_option("--sampler", o.sampler_text,
                    "stream source: beta:x=X | fixed:p=P | discrete:p=..,w=.. | "
                    "perm:K=4,L=8,effect=E[,sigma=S] | ext:cmd=\"...\"")
        ->required();
    cmd->add_option("--pilot-n", o.pilot_n, "pilot stream count")->capture_default_str();
    cmd->add_option("--pilot-tmax", o.pilot_tmax, "pilot step cap")->capture_default_str();
    cmd->add_option("--gamma-pilot", o.gamma_pilot,
                    "error budget spent on the pilot (default 0.1*gamma)");
    cmd->add_flag("--no-pilot", o.no_pilot, "skip the pilot phase");
    cmd->add_option("--seed", o.seed, "root seed (env MCPOWER_SEED as fallback)")
        ->each([&o](const std::string&) { o.seed_given = true; });
    cmd->add_option("--workers", o.workers, "worker threads")->capture_default_str();
    cmd->add_option("--plan-grid", o.plan_grid, "N grid points for effort emulation")
        ->capture_default_str();
    cmd->add_option("--plan-reps", o.plan_reps, "emulation replicates per grid point")
        ->capture_default_str();
    if (!planning_only) {
        cmd->add_option("--streams", o.streams,
                        "main-run stream count (0 = choose from the pilot)")
            ->capture_default_str();
        cmd->add_option("--gamma-joint", o.gamma_joint,
                        "error budget of the joint test (default 0.1*gamma)");
        cmd->add_flag("--no-joint-test", o.no_joint, "disable the joint test");
        cmd->add_option("--eta", o.eta, "order-statistic tail level of the joint test")
            ->capture_default_str();
        cmd->add_option("--joint-stride", o.joint_stride, "steps between checkpoints")
            ->capture_default_str();
        cmd->add_option("--joint-horizon", o.joint_horizon,
                        "horizon constant of the checkpoint budget")
            ->capture_default_str();
        cmd->add_option("--max-effort", o.max_effort, "total sample ceiling")
            ->capture_default_str();
        cmd->add_option("--out", o.out_json, "write the JSON report here");
        cmd->add_option("--events", o.out_events, "write the resolution-event CSV here");
        cmd->add_option("--joint-log", o.out_joint, "write the checkpoint CSV here");
        cmd->add_option("--checkpoint", o.checkpoint_path,
                        "where to write a resumable checkpoint on sampler failure")
            ->capture_default_str();
        cmd->add_option("--resume", o.resume_path, "resume from a checkpoint file");
    }
    cmd->configurable();
}

struct Resolved {
    PrecisionRule rule = PrecisionRule::fixed(0.02);
    double epsilon = 1e-4;
    double gamma_pilot = 0.0;
    double gamma_joint = 0.0;
    double gamma_main = 0.0;
};

Resolved resolve(RunOptions& o, bool with_joint) {
    Resolved r;
    r.rule = o.rule_text.empty() ? PrecisionRule::fixed(o.delta)
                                 : PrecisionRule::parse(o.rule_text);
    for (const auto& w : r.rule.warnings()) std::cerr << "warning: " << w << "\n";
    r.epsilon = o.epsilon >= 0.0 ? o.epsilon : r.rule.reference_delta() / 200.0;
    if (!(r.epsilon > 0.0 && r.epsilon < 1.0))
        throw CLI::ValidationError("--epsilon", "must be in (0,1)");
    if (!(o.gamma > 0.0 && o.gamma < 1.0))
        throw CLI::ValidationError("--gamma", "must be in (0,1)");
    r.gamma_pilot = o.no_pilot ? 0.0
                               : (o.gamma_pilot >= 0.0 ? o.gamma_pilot : 0.1 * o.gamma);
    r.gamma_joint = (!with_joint || o.no_joint)
                        ? 0.0
                        : (o.gamma_joint >= 0.0 ? o.gamma_joint : 0.1 * o.gamma);
    r.gamma_main = o.gamma - r.gamma_pilot - r.gamma_joint;
    if (!(r.gamma_main > 0.0))
        throw CLI::ValidationError(
            "--gamma-pilot/--gamma-joint",
            "pilot and joint budgets must leave a positive main budget "
            "(gamma_pilot + gamma_joint < gamma)");
    o.seed = seed_or_env(o.seed, o.seed_given);
    return r;
}

int cmd_run(RunOptions& o) {
    const Resolved rv = resolve(o, true);
    const SamplerSpec spec = SamplerSpec::parse(o.sampler_text);
    SpendingSchedule sched{rv.epsilon, o.half_life};
    BoundaryTable table(o.alpha, sched);

    FinalReport report;
    report.alpha = o.alpha;
    report.gamma = o.gamma;
    report.epsilon = rv.epsilon;
    report.spending_half_life = o.half_life;
    report.rule = rv.rule.describe();
    report.sampler = spec.describe();
    report.seed = o.seed;

    std::uint64_t prior_effort = 0;
    std::optional<Interval> pilot_interval;

    std::vector<StreamState> resume_streams;
    if (!o.resume_path.empty()) {
        std::ifstream in(o.resume_path);
        std::int64_t t = 0;
        std::string ck_sampler;
        std::uint64_t ck_seed = 0;
        if (!in || !parse_checkpoint_streams(in, resume_streams, t, ck_sampler, ck_seed))
            throw CLI::ValidationError("--resume", "cannot parse checkpoint file");
        if (ck_sampler != spec.describe() || ck_seed != o.seed)
            std::cerr << "warning: checkpoint was written with sampler \"" << ck_sampler
                      << "\" seed " << ck_seed << "; continuing anyway\n";
    }

    if (!o.no_pilot && resume_streams.empty()) {
        auto pilot_source = make_source(spec, o.seed, rng::Domain::pilot_data,
                                        rng::Domain::pilot_bits,
                                        static_cast<std::uint64_t>(o.pilot_n));
        PilotConfig pc;
        pc.n = o.pilot_n;
        pc.t_max = o.pilot_tmax;
        pc.gamma_pilot = rv.gamma_pilot;
        pc.epsilon = rv.epsilon;
        pc.workers = o.workers;
        pc.max_effort = o.max_effort;
        const PilotSummary pilot = run_pilot(pc, *pilot_source, table);
        report.pilot = pilot;
        pilot_interval = pilot.interval;
        prior_effort = pilot.effort;

        PlanNumbers plan;
        plan.n_blind = n_blind(std::min(1.0, rv.rule.reference_delta()), o.gamma,
                               rv.epsilon);
        plan.n_pilot = n_pilot(pilot.interval, rv.rule, rv.gamma_main, rv.epsilon);
        if (o.streams > 0) {
            plan.n_opt = o.streams;
        } else {
            NOptConfig nc;
            nc.grid_points = o.plan_grid;
            nc.replicates = o.plan_reps;
            nc.gamma_main = rv.gamma_main;
            nc.epsilon = rv.epsilon;
            nc.seed = o.seed;
            const NOptResult opt = estimate_n_opt(pilot, plan.n_pilot,
                                                  std::max<std::int64_t>(plan.n_pilot,
                                                                          4 * plan.n_blind),
                                                  rv.rule, nc);
            plan.n_opt = opt.n;
            plan.opt_fallback = opt.fallback;
            if (opt.fallback)
                std::cerr << "note: pilot resolved everything; using the minimal "
                             "pilot-based N\n";
        }
        if (o.streams > 0 && o.streams < plan.n_pilot)
            std::cerr << "warning: --streams " << o.streams
                      << " is below the pilot-based minimum " << plan.n_pilot
                      << "; the run may end exhausted or truncated\n";
        report.plan = plan;
        report.n_streams = plan.n_opt;
    } else {
        report.n_streams = o.streams > 0 ? o.streams
                                         : n_blind(std::min(1.0, rv.rule.reference_delta()),
                                                   rv.gamma_main, rv.epsilon);
        if (!resume_streams.empty())
            report.n_streams = static_cast<std::int64_t>(resume_streams.size());
    }

    EngineConfig ec;
    ec.gamma = rv.gamma_main;
    ec.epsilon = rv.epsilon;
    ec.rule = rv.rule;
    ec.pilot_interval = pilot_interval;
    if (rv.gamma_joint > 0.0) {
        JointTestConfig jc;
        jc.eta = o.eta;
        jc.schedule = JointSpendingSchedule{rv.gamma_joint, o.joint_stride,
                                            o.joint_horizon};
        ec.joint = jc;
        report.joint = jc;
    }
    ec.n_streams = report.n_streams;
    ec.seed = o.seed;
    ec.workers = o.workers;
    ec.max_effort = o.max_effort;
    ec.prior_effort = prior_effort;
    ec.initial_streams = std::move(resume_streams);

    auto source = make_source(spec, o.seed, rng::Domain::main_data,
                              rng::Domain::main_bits,
                              static_cast<std::uint64_t>(ec.n_streams));
    report.run = run_streams(ec, *source, table);

    if (!o.out_events.empty()) {
        std::ofstream os(o.out_events);
        write_events_csv(os, report.run.events);
    }
    if (!o.out_joint.empty()) {
        std::ofstream os(o.out_joint);
        write_joint_csv(os, report.run.joint_log);
    }
    if (!o.out_json.empty()) {
        std::ofstream os(o.out_json);
        os << to_json(report) << "\n";
    }

    std::cout << summarize(report);

    if (report.run.reason == StopReason::sampler_failure) {
        std::ofstream os(o.checkpoint_path);
        os << checkpoint_json(report) << "\n";
        std::cerr << "error: " << report.run.error << "\n"
                  << "checkpoint written to " << o.checkpoint_path << "\n";
        return kExitSamplerFailure;
    }
    if (report.run.reason == StopReason::effort_ceiling ||
        report.run.reason == StopReason::exhausted) {
        std::cerr << "note: the interval is valid but wider than requested ("
                  << to_string(report.run.reason) << "); raise --streams or relax "
                     "the rule\n";
        return kExitTruncated;
    }
    return kExitOk;
}

int cmd_plan(RunOptions& o) {
    const Resolved rv = resolve(o, true);
    const SamplerSpec spec = SamplerSpec::parse(o.sampler_text);
    SpendingSchedule sched{rv.epsilon, o.half_life};
    BoundaryTable table(o.alpha, sched);

    auto pilot_source = make_source(spec, o.seed, rng::Domain::pilot_data,
                                    rng::Domain::pilot_bits,
                                    static_cast<std::uint64_t>(o.pilot_n));
    PilotConfig pc;
    pc.n = o.pilot_n;
    pc.t_max = o.pilot_tmax;
    pc.gamma_pilot = rv.gamma_pilot > 0.0 ? rv.gamma_pilot : 0.1 * o.gamma;
    pc.epsilon = rv.epsilon;
    pc.workers = o.workers;
    const PilotSummary pilot = run_pilot(pc, *pilot_source, table);

    const std::int64_t blind = n_blind(std::min(1.0, rv.rule.reference_delta()), o.gamma,
                                       rv.epsilon);
    const std::int64_t np = n_pilot(pilot.interval, rv.rule, rv.gamma_main, rv.epsilon);
    NOptConfig nc;
    nc.grid_points = o.plan_grid;
    nc.replicates = o.plan_reps;
    nc.gamma_main = rv.gamma_main;
    nc.epsilon = rv.epsilon;
    nc.seed = o.seed;
    const NOptResult opt = estimate_n_opt(pilot, np, std::max(np, 4 * blind), rv.rule, nc);

    std::printf("pilot interval   [%.6f, %.6f]  (%lld+, %lld-, %lld unresolved)\n",
                pilot.interval.low, pilot.interval.high,
                static_cast<long long>(pilot.positives),
                static_cast<long long>(pilot.negatives),
                static_cast<long long>(pilot.unresolved));
    std::printf("pilot effort     %llu samples\n",
                static_cast<unsigned long long>(pilot.effort));
    std::printf("N_blind          %lld\n", static_cast<long long>(blind));
    std::printf("N_pilot          %lld\n", static_cast<long long>(np));
    std::printf("N_opt            %lld%s  (emulated effort %.3g)\n",
                static_cast<long long>(opt.n), opt.fallback ? " (fallback)" : "",
                opt.expected_effort);
    return kExitOk;
}

int cmd_boundaries(double alpha, double epsilon, std::int64_t half_life,
                   std::int64_t t_max, const std::string& out) {
    SpendingSchedule sched{epsilon, half_life};
    BoundaryTable table(alpha, sched);
    table.extend_to(t_max);
    if (out.empty()) {
        write_boundaries_csv(std::cout, table, t_max);
    } else {
        std::ofstream os(out);
        write_boundaries_csv(os, table, t_max);
    }
    return kExitOk;
}

int cmd_verify(verify::VerifyOptions& vo) {
    const auto results = verify::run_all(vo);
    bool all = true;
    for (const auto& r : results) {
        std::printf("[%s] %-45s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                    r.detail.c_str());
        all = all && r.pass;
    }
    std::printf("%zu checks, %s\n", results.size(), all ? "all passed" : "FAILURES");
    return all ? kExitOk : kExitChecksFailed;
}

struct TableOptions {
    std::string which = "table1";
    double delta_scale = 1.0;
    std::int64_t reps = 100;
    std::string betas = "0.05,0.7,0.9,0.99";
    std::uint64_t seed = 1;
    bool seed_given = false;
    int workers = 1;
    std::string out;
};

RunResult run_table_cell(double gamma, double epsilon, const PrecisionRule& rule,
                         const SamplerSpec& spec, std::uint64_t seed,
                         BoundaryTable& table, bool use_pilot, bool use_joint,
                         std::int64_t forced_n, int workers) {
    std::uint64_t prior = 0;
    std::optional<Interval> pilot_iv;
    std::int64_t n = forced_n;
    double g_main = gamma;
    PilotSummary pilot;

    const double g_pilot = use_pilot ? 0.1 * gamma : 0.0;
    const double g_joint = use_joint ? 0.1 * gamma : 0.0;
    g_main = gamma - g_pilot - g_joint;

    if (use_pilot) {
        auto ps = make_source(spec, seed, rng::Domain::pilot_data,
                              rng::Domain::pilot_bits, 1000);
        PilotConfig pc;
        pc.gamma_pilot = g_pilot;
        pc.epsilon = epsilon;
        pc.workers = workers;
        pilot = run_pilot(pc, *ps, table);
        pilot_iv = pilot.interval;
        prior = pilot.effort;
        if (forced_n <= 0) {
            const std::int64_t np = n_pilot(pilot.interval, rule, g_main, epsilon);
            const std::int64_t blind = n_blind(std::min(1.0, rule.reference_delta()),
                                               gamma, epsilon);
            NOptConfig nc;
            nc.gamma_main = g_main;
            nc.epsilon = epsilon;
            nc.seed = seed;
            n = estimate_n_opt(pilot, np, std::max(np, 4 * blind), rule, nc).n;
        }
    }

    EngineConfig ec;
    ec.gamma = g_main;
    ec.epsilon = epsilon;
    ec.rule = rule;
    ec.pilot_interval = pilot_iv;
    if (use_joint) {
        JointTestConfig jc;
        jc.schedule = JointSpendingSchedule{g_joint, 200000, 20};
        ec.joint = jc;
    }
    ec.n_streams = n;
    ec.seed = seed;
    ec.workers = workers;
    ec.prior_effort = prior;

    auto source = make_source(spec, seed, rng::Domain::main_data, rng::Domain::main_bits,
                              static_cast<std::uint64_t>(n));
    return run_streams(ec, *source, table);
}

int cmd_tables(TableOptions& to) {
    to.seed = seed_or_env(to.seed, to.seed_given);
    const double alpha = 0.05;
    const double gamma = 0.01;
    const double base_delta = 0.02 * to.delta_scale;
    const double epsilon = base_delta / 200.0;

    std::vector<double> betas;
    {
        std::stringstream ss(to.betas);
        std::string item;
        while (std::getline(ss, item, ',')) betas.push_back(std::stod(item));
    }

    struct Variant {
        std::string name;
        PrecisionRule rule;
        bool pilot;
        bool joint;
        bool at_blind_n;
    };
    std::vector<Variant> variants;
    if (to.which == "table1") {
        const auto fixed = PrecisionRule::fixed(base_delta);
        variants.push_back({"min_n", fixed, false, false, true});
        variants.push_back({"no_test", fixed, true, false, false});
        variants.push_back({"with_test", fixed, true, true, false});
    } else if (to.which == "table2") {
        variants.push_back({"delta0", PrecisionRule::fixed(0.02).scaled(to.delta_scale),
                            true, true, false});
        variants.push_back({"delta1", PrecisionRule::sqrt_profile().scaled(to.delta_scale),
                            true, true, false});
        variants.push_back({"delta2", PrecisionRule::band().scaled(to.delta_scale), true,
                            true, false});
        variants.push_back({"delta3", PrecisionRule::left_tail().scaled(to.delta_scale),
                            true, true, false});
    } else {
        throw CLI::ValidationError("--which", "must be table1 or table2");
    }

    std::ostringstream csv;
    csv << "beta,variant,reps,effort_mean,effort_se\n";
    for (const double beta : betas) {
        SamplerSpec spec;
        spec.kind = SamplerSpec::Kind::beta;
        spec.beta_x = beta_parameter_for_power(alpha, beta);

        SpendingSchedule sched{epsilon, 1000};
        BoundaryTable table(alpha, sched);

        for (const auto& v : variants) {
            std::int64_t forced_n = 0;
            if (v.at_blind_n)
                forced_n = n_blind(std::min(1.0, v.rule.reference_delta()), gamma,
                                   epsilon);
            double sum = 0.0, sumsq = 0.0;
            for (std::int64_t rep = 0; rep < to.reps; ++rep) {
                const std::uint64_t seed =
                    rng::hash4(to.seed, 0x7ab1eULL, static_cast<std::uint64_t>(rep),
                               static_cast<std::uint64_t>(beta * 1e6));
                const RunResult r = run_table_cell(
                    gamma, epsilon, v.rule, spec, seed, table, v.pilot, v.joint,
                    v.at_blind_n ? forced_n : 0, to.workers);
                const double e = static_cast<double>(r.effort);
                sum += e;
                sumsq += e * e;
            }
            const double mean = sum / static_cast<double>(to.reps);
            const double var =
                to.reps > 1
                    ? std::max(0.0, (sumsq - static_cast<double>(to.reps) * mean * mean) /
                                        static_cast<double>(to.reps - 1))
                    : 0.0;
            const double se = std::sqrt(var / static_cast<double>(to.reps));
            char line[160];
            std::snprintf(line, sizeof line, "%g,%s,%lld,%.6g,%.6g\n", beta,
                          v.name.c_str(), static_cast<long long>(to.reps), mean, se);
            csv << line;
            std::cerr << line;
        }
    }
    if (to.out.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream os(to.out);
        os << csv.str();
    }
    return kExitOk;
}

struct PermOptions {
    std::string effects = "0.5,1.0,1.5,2.0";
    std::string mode = "truth";
    std::int64_t datasets = 100000;
    int k = 4;
    int l = 8;
    double delta = 0.01;
    double gamma = 0.01;
    std::uint64_t seed = 1;
    bool seed_given = false;
    int workers = 1;
};

int cmd_perm_example(PermOptions& po) {
    po.seed = seed_or_env(po.seed, po.seed_given);
    std::vector<double> effects;
    {
        std::stringstream ss(po.effects);
        std::string item;
        while (std::getline(ss, item, ',')) effects.push_back(std::stod(item));
    }
    const double alpha = 0.05;

    if (po.mode == "truth") {
        std::printf("effect,datasets,power_hat,se\n");
        for (const double effect : effects) {
            SamplerSpec spec;
            spec.kind = SamplerSpec::Kind::permutation;
            spec.perm_k = po.k;
            spec.perm_l = po.l;
            spec.effect = effect;
            BuiltinSource src(spec, po.seed, rng::Domain::main_data,
                              rng::Domain::main_bits,
                              static_cast<std::uint64_t>(po.datasets));
            std::int64_t hits = 0;
            for (std::int64_t i = 0; i < po.datasets; ++i)
                if (exact_permutation_pvalue(src.dataset(static_cast<std::uint64_t>(i)),
                                             po.k) <= alpha)
                    ++hits;
            const double hat =
                static_cast<double>(hits) / static_cast<double>(po.datasets);
            std::printf("%g,%lld,%.6f,%.6f\n", effect,
                        static_cast<long long>(po.datasets), hat,
                        std::sqrt(hat * (1.0 - hat) / static_cast<double>(po.datasets)));
        }
        return kExitOk;
    }
    if (po.mode != "run")
        throw CLI::ValidationError("--mode", "must be truth or run");

    std::printf("effect,low,high,effort,stopped_by\n");
    for (const double effect : effects) {
        RunOptions o;
        o.alpha = alpha;
        o.gamma = po.gamma;
        o.delta = po.delta;
        char buf[96];
        std::snprintf(buf, sizeof buf, "perm:K=%d,L=%d,effect=%g", po.k, po.l, effect);
        o.sampler_text = buf;
        o.seed = po.seed;
        o.seed_given = true;
        o.workers = po.workers;

        const Resolved rv = resolve(o, true);
        const SamplerSpec spec = SamplerSpec::parse(o.sampler_text);
        SpendingSchedule sched{rv.epsilon, o.half_life};
        BoundaryTable table(o.alpha, sched);
        const RunResult r = run_table_cell(o.gamma, rv.epsilon, rv.rule, spec, o.seed,
                                           table, true, true, 0, o.workers);
        std::printf("%g,%.6f,%.6f,%llu,%s\n", effect, r.interval.low, r.interval.high,
                    static_cast<unsigned long long>(r.effort), to_string(r.reason));
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"conservative confidence intervals for Monte Carlo test power"};
    app.set_config("--config", "",
                   "key=value file under a [subcommand] section; flags override");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);

    RunOptions run_opts;
    auto* run_cmd = app.add_subcommand(
        "run", "pilot, planning, and the main guaranteed-precision run");
    add_run_options(run_cmd, run_opts, false);

    RunOptions plan_opts;
    auto* plan_cmd =
        app.add_subcommand("plan", "pilot only: report N_blind, N_pilot, N_opt");
    add_run_options(plan_cmd, plan_opts, true);

    double b_alpha = 0.05, b_epsilon = 1e-4;
    std::int64_t b_half = 1000, b_tmax = 1000;
    std::string b_out;
    auto* bnd_cmd = app.add_subcommand("boundaries", "emit the stopping boundaries CSV");
    bnd_cmd->configurable();
    bnd_cmd->add_option("--alpha", b_alpha)->capture_default_str();
    bnd_cmd->add_option("--epsilon", b_epsilon)->capture_default_str();
    bnd_cmd->add_option("--spending-halflife", b_half)->capture_default_str();
    bnd_cmd->add_option("--t-max", b_tmax)->capture_default_str();
    bnd_cmd->add_option("--out", b_out, "output path (default stdout)");

    TableOptions table_opts;
    auto* tab_cmd = app.add_subcommand(
        "tables", "replicate the effort experiments at configurable scale");
    tab_cmd->configurable();
    tab_cmd->add_option("--which", table_opts.which, "table1 | table2")
        ->capture_default_str();
    tab_cmd->add_option("--delta-scale", table_opts.delta_scale,
                        "multiply every target length by this factor")
        ->capture_default_str();
    tab_cmd->add_option("--reps", table_opts.reps)->capture_default_str();
    tab_cmd->add_option("--betas", table_opts.betas)->capture_default_str();
    tab_cmd->add_option("--seed", table_opts.seed)
        ->each([&table_opts](const std::string&) { table_opts.seed_given = true; });
    tab_cmd->add_option("--workers", table_opts.workers)->capture_default_str();
    tab_cmd->add_option("--out", table_opts.out, "CSV output path (default stdout)");

    verify::VerifyOptions vo;
    auto* ver_cmd = app.add_subcommand("verify", "re-run the guarantee checks");
    ver_cmd->configurable();
    ver_cmd->add_option("--alpha", vo.alpha)->capture_default_str();
    ver_cmd->add_option("--epsilon", vo.epsilon)->capture_default_str();
    ver_cmd->add_option("--spending-halflife", vo.half_life)->capture_default_str();
    ver_cmd->add_option("--t-max", vo.t_max)->capture_default_str();
    ver_cmd->add_option("--minimality-t-max", vo.minimality_t_max)->capture_default_str();
    ver_cmd->add_flag("--deep", vo.deep, "add the survival-decay simulation");
    ver_cmd->add_option("--seed", vo.seed)->capture_default_str();

    PermOptions perm_opts;
    auto* perm_cmd = app.add_subcommand(
        "perm-example", "two-sample Gaussian permutation-test power example");
    perm_cmd->configurable();
    perm_cmd->add_option("--effects", perm_opts.effects)->capture_default_str();
    perm_cmd->add_option("--mode", perm_opts.mode, "truth | run")->capture_default_str();
    perm_cmd->add_option("--datasets", perm_opts.datasets)->capture_default_str();
    perm_cmd->add_option("--K", perm_opts.k)->capture_default_str();
    perm_cmd->add_option("--L", perm_opts.l)->capture_default_str();
    perm_cmd->add_option("--delta", perm_opts.delta)->capture_default_str();
    perm_cmd->add_option("--gamma", perm_opts.gamma)->capture_default_str();
    perm_cmd->add_option("--seed", perm_opts.seed)
        ->each([&perm_opts](const std::string&) { perm_opts.seed_given = true; });
    perm_cmd->add_option("--workers", perm_opts.workers)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) return cmd_run(run_opts);
        if (*plan_cmd) return cmd_plan(plan_opts);
        if (*bnd_cmd) return cmd_boundaries(b_alpha, b_epsilon, b_half, b_tmax, b_out);
        if (*tab_cmd) return cmd_tables(table_opts);
        if (*ver_cmd) return cmd_verify(vo);
        if (*perm_cmd) return cmd_perm_example(perm_opts);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
