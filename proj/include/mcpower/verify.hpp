// Re-runnable guarantee checks: each pits a production path against an
// independent brute-force route and reports pass/fail. Exposed behind
// the `verify` CLI subcommand and reused by the test suites.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcpower/boundary.hpp"
#include "mcpower/spending.hpp"

namespace mcpower::verify {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Crossing mass under p = alpha stays within eps_t on both sides
// (slack 1e-12), and total mass is conserved to 1e-10 at every step.
CheckResult check_boundary_guarantee(double alpha, const SpendingSchedule& sched,
                                     std::int64_t t_max);

// U_t cannot shrink and L_t cannot grow without violating the budget,
// recomputed by an independent forward DP.
CheckResult check_minimality(double alpha, const SpendingSchedule& sched,
                             std::int64_t t_max);

// Constructed boundaries stay inside the analytic envelope with the given
// (lambda, q) over [t_from, t_to]; reports every violating t.
CheckResult check_envelope(const BoundaryTable& table, double lambda, double q,
                           std::int64_t t_from, std::int64_t t_to);

// Wrong-decision mass: hitting the upper boundary at p = alpha and the
// lower boundary at p = alpha + shift both stay within eps_t.
CheckResult check_wrong_decision(double alpha, const SpendingSchedule& sched,
                                 std::int64_t t_max, double shift);

// Production alive distribution vs oracle DP, sup-norm tolerance.
CheckResult check_alive_agreement(double alpha, const SpendingSchedule& sched,
                                  std::int64_t t_max, double tol);

// Exact Clopper-Pearson coverage over a p grid.
CheckResult check_cp_coverage(std::int64_t n_max, const std::vector<double>& gammas,
                              int p_grid);

// Hull formula equals the explicit union (connected overlap included)
// and nesting under single resolutions, exhaustively to max_total.
CheckResult check_hull_union(std::int64_t max_total, const std::vector<double>& gammas,
                             const std::vector<double>& epsilons);

// Conditional distributions ordered across p (likelihood-ratio fact
// checked in its stochastic-order form).
CheckResult check_stochastic_ordering(double alpha, const SpendingSchedule& sched,
                                      std::int64_t t, double p1, double p2);

// Exact T+ dominance by the binomial bound for tiny configurations.
CheckResult check_joint_dominance(double alpha, const SpendingSchedule& sched,
                                  const std::vector<double>& pvals,
                                  const std::vector<std::int64_t>& t_values,
                                  double eta);

// Empirical survival decay for uniform p-values (slope of log-survival).
CheckResult check_survival_slope(double alpha, const SpendingSchedule& sched,
                                 std::int64_t n_streams, std::int64_t t_cap,
                                 std::uint64_t seed, double slope_bound);

struct VerifyOptions {
    double alpha = 0.05;
    double epsilon = 1e-4;
    std::int64_t half_life = 1000;
    std::int64_t t_max = 2000;
    std::int64_t minimality_t_max = 500;
    bool deep = false; // adds the survival-slope simulation
    std::uint64_t seed = 1;
};

std::vector<CheckResult> run_all(const VerifyOptions& opt);

} // namespace mcpower::verify
