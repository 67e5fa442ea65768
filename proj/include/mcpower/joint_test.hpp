// Checkpoint test on the unresolved streams as a whole: certifies lower
// bounds (r_t, a_t) on the positive/negative outcomes still to come by
// comparing extreme order statistics against the conditional null CDF,
// with binomial dominance thresholds.
#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "mcpower/boundary.hpp"
#include "mcpower/interval.hpp"
#include "mcpower/precision_rule.hpp"

namespace mcpower {

struct RaChoice {
    bool feasible = false;
    std::int64_t r = 0;
    std::int64_t a = 0;
};

// Smallest symmetric (k, k) whose credited interval meets the rule; at odd
// remainders the final asymmetric completion leans toward the pilot
// interval's heavier side. Infeasible when nothing within the unresolved
// budget works.
RaChoice choose_ra(CpCache& cache, std::int64_t R, std::int64_t A, std::int64_t u,
                   double epsilon, const std::optional<Interval>& pilot,
                   const PrecisionRule& rule);

struct JointStatistics {
    std::int64_t t_plus = 0;
    std::int64_t t_minus = 0;
};

// T+ counts order statistics i in [r_t, n] with G_t(S_(i)) <= eta;
// T- counts i in [1, n - a_t + 1] with G_t(S_(i)) >= 1 - eta.
// Sums must be sorted ascending. A zero r_t (a_t) makes the corresponding
// side vacuous; its statistic is reported as 0 and decide() auto-rejects.
JointStatistics test_statistics(std::span<const std::int64_t> sorted_sums,
                                const BoundaryTable& table, std::int64_t t,
                                std::int64_t r_t, std::int64_t a_t, double eta);

struct JointDecision {
    bool reject_plus = false;
    bool reject_minus = false;
    double p_plus = 1.0;  // P[Bin(n-r+1, eta) >= T+]
    double p_minus = 1.0; // P[Bin(n-a+1, eta) >= T-]
    bool both() const { return reject_plus && reject_minus; }
};

// Each side tested at level xi_t/2 against its dominating binomial;
// vacuous sides auto-reject.
JointDecision decide(std::int64_t t_plus, std::int64_t t_minus, std::int64_t n_t,
                     std::int64_t r_t, std::int64_t a_t, double eta, double xi_t);

} // namespace mcpower
