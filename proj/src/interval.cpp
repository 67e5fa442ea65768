#include "mcpower/interval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mcpower/binom.hpp"

namespace mcpower {

namespace {

// Exact tail sums are cheap up to here; above it the incomplete-beta
// inversion is used.
constexpr std::int64_t kBisectionLimit = 10000;

void check_args(std::int64_t r, std::int64_t n, double gamma) {
    if (n < 0 || r < 0) throw std::invalid_argument("clopper_pearson: negative count");
    if (r > n) throw std::invalid_argument("clopper_pearson: r > n");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("clopper_pearson: gamma must be in (0,1)");
}

// d/dp P[Bin(n,p) >= r] = p^(r-1) (1-p)^(n-r) / B(r, n-r+1)
double tail_ge_deriv(std::int64_t n, std::int64_t r, double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    const double nd = static_cast<double>(n), rd = static_cast<double>(r);
    const double lg = std::lgamma(nd + 1.0) - std::lgamma(rd) - std::lgamma(nd - rd + 1.0) +
                      (rd - 1.0) * std::log(p) + (nd - rd) * std::log1p(-p);
    return std::exp(lg);
}

// Smallest p with P[Bin(n,p) >= r] >= target: safeguarded Newton inside a
// shrinking bracket, bisection whenever a step leaves it.
double solve_lower(std::int64_t n, std::int64_t r, double target) {
    double lo = 0.0, hi = 1.0;
    const double phat = static_cast<double>(r) / static_cast<double>(n);
    double x = std::clamp(phat, 1e-12, 1.0 - 1e-12);
    for (int i = 0; i < 200; ++i) {
        const double g = binom::tail_ge(n, r, x) - target;
        if (g >= 0.0)
            hi = x;
        else
            lo = x;
        if (hi - lo < 1e-13) break;
        const double d = tail_ge_deriv(n, r, x);
        double next = d > 0.0 ? x - g / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == x) break;
        x = next;
    }
    return hi;
}

// Largest p with P[Bin(n,p) <= r] >= target; the cdf is decreasing in p,
// d/dp P[Bin(n,p) <= r] = -p^r (1-p)^(n-r-1) / B(r+1, n-r).
double solve_upper(std::int64_t n, std::int64_t r, double target) {
    double lo = 0.0, hi = 1.0;
    const double phat = static_cast<double>(r) / static_cast<double>(n);
    double x = std::clamp(phat, 1e-12, 1.0 - 1e-12);
    for (int i = 0; i < 200; ++i) {
        const double g = binom::cdf_le(n, r, x) - target;
        if (g >= 0.0)
            lo = x;
        else
            hi = x;
        if (hi - lo < 1e-13) break;
        const double nd = static_cast<double>(n), rd = static_cast<double>(r);
        const double lg = std::lgamma(nd + 1.0) - std::lgamma(rd + 1.0) -
                          std::lgamma(nd - rd) + rd * std::log(x) +
                          (nd - rd - 1.0) * std::log1p(-x);
        const double d = -std::exp(lg);
        double next = d < 0.0 ? x - g / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == x) break;
        x = next;
    }
    return lo;
}

} // namespace

Interval clopper_pearson(std::int64_t r, std::int64_t n, double gamma) {
    check_args(r, n, gamma);
    if (n == 0) return {0.0, 1.0};
    const double half = 0.5 * gamma;

    double low, high;
    if (r == 0) {
        low = 0.0;
    } else if (r == n) {
        low = std::pow(half, 1.0 / static_cast<double>(n));
    } else if (n <= kBisectionLimit) {
        low = solve_lower(n, r, half);
    } else {
        low = binom::reg_inc_beta_inv(static_cast<double>(r),
                                      static_cast<double>(n - r + 1), half);
    }

    if (r == n) {
        high = 1.0;
    } else if (r == 0) {
        high = 1.0 - std::pow(half, 1.0 / static_cast<double>(n));
    } else if (n <= kBisectionLimit) {
        high = solve_upper(n, r, half);
    } else {
        high = binom::reg_inc_beta_inv(static_cast<double>(r + 1),
                                       static_cast<double>(n - r), 1.0 - half);
    }
    return {low, high};
}

Interval interval_infty(std::int64_t r, std::int64_t a, double gamma, double epsilon) {
    if (!(epsilon >= 0.0 && epsilon < 1.0))
        throw std::invalid_argument("interval_infty: epsilon must be in [0,1)");
    const Interval cp = clopper_pearson(r, r + a, gamma);
    const double denom = 1.0 - epsilon;
    double low = (cp.low - epsilon) / denom;
    double high = cp.high / denom;
    low = std::clamp(low, 0.0, 1.0);
    high = std::clamp(high, 0.0, 1.0);
    return {low, high};
}

Interval interval_union(std::int64_t r, std::int64_t a, std::int64_t u,
                        double gamma, double epsilon) {
    if (r < 0 || a < 0 || u < 0)
        throw std::invalid_argument("interval_union: negative count");
    const Interval lo_member = interval_infty(r, a + u, gamma, epsilon);
    const Interval hi_member = interval_infty(r + u, a, gamma, epsilon);
    return {lo_member.low, hi_member.high};
}

IntersectResult intersect_with_pilot(Interval main, Interval pilot) {
    const double low = std::max(main.low, pilot.low);
    const double high = std::min(main.high, pilot.high);
    if (low <= high) return {{low, high}, false};
    const double gap_mid = 0.5 * (low + high); // between the two intervals
    return {{gap_mid, gap_mid}, true};
}

CiState make_ci_state(std::int64_t r, std::int64_t a, std::int64_t u,
                      double gamma, double epsilon) {
    CiState s;
    s.positives = r;
    s.negatives = a;
    s.unresolved = u;
    s.gamma = gamma;
    s.epsilon = epsilon;
    s.interval = interval_union(r, a, u, gamma, epsilon);
    return s;
}

CpCache::CpCache(std::int64_t n, double gamma) : n_(n), gamma_(gamma) {
    if (n < 0) throw std::invalid_argument("CpCache: n must be >= 0");
    const auto size = static_cast<std::size_t>(n + 1);
    low_.assign(size, std::numeric_limits<double>::quiet_NaN());
    high_.assign(size, std::numeric_limits<double>::quiet_NaN());
}

double CpCache::low(std::int64_t r) {
    auto& slot = low_[static_cast<std::size_t>(r)];
    if (std::isnan(slot)) slot = clopper_pearson(r, n_, gamma_).low;
    return slot;
}

double CpCache::high(std::int64_t r) {
    auto& slot = high_[static_cast<std::size_t>(r)];
    if (std::isnan(slot)) slot = clopper_pearson(r, n_, gamma_).high;
    return slot;
}

Interval CpCache::union_interval(std::int64_t r, std::int64_t a, std::int64_t u,
                                 double epsilon) {
    if (r + a + u != n_)
        throw std::invalid_argument("CpCache: counts do not sum to n");
    const double denom = 1.0 - epsilon;
    const double lo = std::clamp((low(r) - epsilon) / denom, 0.0, 1.0);
    const double hi = std::clamp(high(r + u) / denom, 0.0, 1.0);
    return {lo, hi};
}

} // namespace mcpower
