// Binomial tail probabilities and regularized incomplete beta, the
// numeric kernels behind the confidence intervals and the joint-test
// thresholds.
#pragma once

#include <cstdint>

namespace mcpower::binom {

// P[Bin(n, p) >= k], exact summation with a ratio recurrence.
// Absolute accuracy ~1e-14 for n up to ~1e5.
double tail_ge(std::int64_t n, std::int64_t k, double p);

// P[Bin(n, p) <= k] = 1 - tail_ge(n, k+1, p), computed directly when
// that is the better-conditioned side.
double cdf_le(std::int64_t n, std::int64_t k, double p);

// Regularized incomplete beta I_x(a, b) via Lentz continued fraction.
double reg_inc_beta(double a, double b, double x);

// Smallest x with I_x(a, b) >= y (monotone bisection on doubles).
double reg_inc_beta_inv(double a, double b, double y);

} // namespace mcpower::binom
