// Independent brute-force references: forward absorption DP at arbitrary
// p, exact path enumeration for small t, exact binomial tails, and the
// explicit member list behind the union interval. Written separately from
// the production paths they check.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mcpower/interval.hpp"

namespace mcpower::oracle {

struct CrossingProbs {
    // cumulative absorption mass by step t (index t, entry 0 unused = 0)
    std::vector<double> upper_by_t;
    std::vector<double> lower_by_t;
    // alive distribution at t_max
    std::int64_t alive_min_s = 0;
    std::vector<double> alive;
};

// Exact absorption probabilities under Bernoulli(p) steps against the
// given boundaries (indexed by step, entry 0 ignored).
CrossingProbs crossing_probs(double p, std::span<const std::int32_t> lower,
                             std::span<const std::int32_t> upper, std::int64_t t_max);

struct CondDist {
    std::int64_t min_s = 0;
    std::vector<double> pmf; // normalized, conditional on tau > t
};

// Conditional distribution of S_t given survival, by full 2^t path
// enumeration (t <= 22).
CondDist enumerate_conditional(double p, std::span<const std::int32_t> lower,
                               std::span<const std::int32_t> upper, std::int64_t t);

double binom_pmf(std::int64_t n, std::int64_t k, double p);

// P[Bin(n, p) >= k] by direct per-term summation.
double binom_tail(std::int64_t n, double p, std::int64_t k);

// The u+1 member intervals whose union the hull formula collapses.
std::vector<Interval> union_members(std::int64_t r, std::int64_t a, std::int64_t u,
                                    double gamma, double epsilon);

} // namespace mcpower::oracle
