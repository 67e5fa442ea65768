// Pilot phase and stream-count planning: a capped preliminary run narrows
// the interval by intersection, and its stopping-time sample feeds a
// Monte Carlo emulation that picks an effort-minimizing N.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mcpower/boundary.hpp"
#include "mcpower/engine.hpp"
#include "mcpower/interval.hpp"
#include "mcpower/precision_rule.hpp"
#include "mcpower/samplers.hpp"

namespace mcpower {

struct PilotSummary {
    std::int64_t n = 0;
    std::int64_t t_max = 0;
    std::int64_t positives = 0;
    std::int64_t negatives = 0;
    std::int64_t unresolved = 0;
    double gamma_pilot = 0.0;
    Interval interval;
    std::vector<std::int64_t> resolved_times; // sorted, all <= t_max
    double beta_hat = 0.5;                    // add-half smoothed
    double survival_at_tmax = 0.0;
    std::uint64_t effort = 0;
};

struct PilotConfig {
    std::int64_t n = 1000;
    std::int64_t t_max = 1000;
    double gamma_pilot = 0.001;
    double epsilon = 1e-4;
    int workers = 1;
    std::uint64_t max_effort = 10'000'000'000ULL;
};

PilotSummary run_pilot(const PilotConfig& cfg, StreamSource& source,
                       BoundaryTable& table);

// Worst-case union-interval length when all but two streams are resolved
// and the positives sit at the balanced point.
double blind_worst_length(std::int64_t n, double gamma, double epsilon);

// Smallest N whose balanced worst case meets length delta.
std::int64_t n_blind(double delta, double gamma, double epsilon);

// Smallest N such that for every split r of N-2 resolved streams the
// pilot-intersected interval is admissible under the rule.
std::int64_t n_pilot(const Interval& pilot_interval, const PrecisionRule& rule,
                     double gamma_main, double epsilon);

struct NOptConfig {
    std::int64_t grid_points = 25;
    std::int64_t replicates = 200;
    double gamma_main = 0.01; // budget the main run will use
    double epsilon = 1e-4;
    std::uint64_t seed = 1;
};

struct NOptResult {
    std::int64_t n = 0;
    double expected_effort = 0.0; // emulated, excluding the pilot
    bool fallback = false;        // no tail mass; returned n_lo
};

// Emulates main runs at the stopping-time level over a geometric N grid:
// resolved times resample the pilot's empirical distribution, survivors
// draw from the anchored sqrt(log t / t) tail, outcomes are
// Bernoulli(beta_hat). Streams are never emulated at the bit level.
NOptResult estimate_n_opt(const PilotSummary& pilot, std::int64_t n_lo,
                          std::int64_t n_hi, const PrecisionRule& rule,
                          const NOptConfig& cfg);

namespace detail {
// Solve ln t / t = y for t >= t0 (the anchored survival tail inverse).
double tail_inverse(double y, double t0);
} // namespace detail

} // namespace mcpower
