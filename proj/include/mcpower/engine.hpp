// The main sequential loop: advances N streams against shared stopping
// boundaries, maintains (R_t, A_t, |U_t|), recomputes the interval at
// resolution events, applies the precision rule and the checkpoint joint
// test, and accounts effort.
//
// Streams are advanced in blocks: within a block each worker takes a
// slice of the unresolved streams and pushes each to resolution or the
// block end; results are merged in (time, id) order at the block
// barrier. Every variate is a counter-hash of (seed, stream, step), so
// the outcome is identical for any worker count.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mcpower/boundary.hpp"
#include "mcpower/interval.hpp"
#include "mcpower/joint_test.hpp"
#include "mcpower/precision_rule.hpp"
#include "mcpower/samplers.hpp"
#include "mcpower/spending.hpp"

namespace mcpower {

struct JointTestConfig {
    double eta = 0.05;
    JointSpendingSchedule schedule;
};

struct EngineConfig {
    double gamma = 0.01;   // interval budget for this run (already net of
                           // pilot and joint shares)
    double epsilon = 1e-4; // per-stream wrong-decision bound
    PrecisionRule rule = PrecisionRule::fixed(0.02);
    std::optional<Interval> pilot_interval;
    std::optional<JointTestConfig> joint;
    std::int64_t n_streams = 1;
    std::uint64_t seed = 1;
    int workers = 1;
    std::uint64_t max_effort = 10'000'000'000ULL; // ceiling incl. prior effort
    std::uint64_t prior_effort = 0;               // e.g. the pilot's bill
    std::int64_t max_steps = 0;                   // 0 = unlimited

    // Resume: per-stream states from a checkpoint (size must equal
    // n_streams). Ragged step counts are caught up within the first block.
    std::vector<StreamState> initial_streams;
};

enum class StopReason {
    rule_admitted,
    joint_test,
    max_steps,
    effort_ceiling,
    exhausted, // every stream resolved and the rule still does not admit
    sampler_failure,
};

const char* to_string(StopReason r);

struct EventRow {
    std::int64_t t = 0;
    std::int64_t positives = 0;
    std::int64_t negatives = 0;
    std::int64_t unresolved = 0;
    double low = 0.0;
    double high = 1.0;
    std::uint64_t effort = 0;
};

struct JointRow {
    std::int64_t t = 0;
    std::int64_t unresolved = 0; // n_t at the checkpoint
    std::int64_t r = 0;
    std::int64_t a = 0;
    std::int64_t t_plus = 0;
    std::int64_t t_minus = 0;
    double xi = 0.0;
    bool feasible = false;
    bool rejected = false;
};

struct RunResult {
    Interval interval;
    std::int64_t positives = 0;
    std::int64_t negatives = 0;
    std::int64_t unresolved = 0;
    std::int64_t joint_r = 0; // credited by the joint test when it stopped the run
    std::int64_t joint_a = 0;
    std::int64_t steps = 0;
    std::uint64_t effort = 0; // prior + sum_i min(tau_i, steps)
    StopReason reason = StopReason::rule_admitted;
    bool empty_intersection = false;
    std::string error;

    std::vector<EventRow> events;
    std::vector<JointRow> joint_log;

    // Final per-stream records. steps is the number of bits the stream
    // contributes to the effort, min(tau_i, stop time); for streams still
    // unresolved after an early stop the recorded sum is the last
    // materialized partial sum (non-replayable sources only).
    std::vector<StreamState> streams;
};

RunResult run_streams(const EngineConfig& cfg, StreamSource& source,
                      BoundaryTable& table);

// (1/N) sum_i 1[ (sum of M bits)/M <= alpha ]; benchmark-only estimator,
// no guarantee attached.
double naive_estimate(StreamSource& source, std::int64_t n, std::int64_t m,
                      double alpha);

} // namespace mcpower
