#include "mcpower/binom.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mcpower::binom {

namespace {

double log_pmf(std::int64_t n, std::int64_t k, double p) {
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) +
           kd * std::log(p) + (nd - kd) * std::log1p(-p);
}

// Sum pmf(j) for j = k..n, walking up from k. Terms decay once past the
// mode, so this is used when k is at or above the mean.
double sum_upper(std::int64_t n, std::int64_t k, double p) {
    double term = std::exp(log_pmf(n, k, p));
    double sum = term;
    double comp = 0.0;
    const double odds = p / (1.0 - p);
    for (std::int64_t j = k; j < n; ++j) {
        term *= static_cast<double>(n - j) / static_cast<double>(j + 1) * odds;
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if (term < 1e-18 * sum) break;
    }
    if (sum < 0.0) return 0.0;
    if (sum > 1.0) return 1.0;
    return sum;
}

// Sum pmf(j) for j = 0..k, walking down from k.
double sum_lower(std::int64_t n, std::int64_t k, double p) {
    double term = std::exp(log_pmf(n, k, p));
    double sum = term;
    double comp = 0.0;
    const double inv_odds = (1.0 - p) / p;
    for (std::int64_t j = k; j > 0; --j) {
        term *= static_cast<double>(j) / static_cast<double>(n - j + 1) * inv_odds;
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if (term < 1e-18 * sum) break;
    }
    if (sum < 0.0) return 0.0;
    if (sum > 1.0) return 1.0;
    return sum;
}

} // namespace

double tail_ge(std::int64_t n, std::int64_t k, double p) {
    if (n < 0) throw std::invalid_argument("binom: n must be >= 0");
    if (k <= 0) return 1.0;
    if (k > n) return 0.0;
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    const double mean = static_cast<double>(n) * p;
    if (static_cast<double>(k) >= mean) return sum_upper(n, k, p);
    return 1.0 - sum_lower(n, k - 1, p);
}

double cdf_le(std::int64_t n, std::int64_t k, double p) {
    if (n < 0) throw std::invalid_argument("binom: n must be >= 0");
    if (k < 0) return 0.0;
    if (k >= n) return 1.0;
    if (p <= 0.0) return 1.0;
    if (p >= 1.0) return 0.0;
    const double mean = static_cast<double>(n) * p;
    if (static_cast<double>(k) <= mean) return sum_lower(n, k, p);
    return 1.0 - sum_upper(n, k + 1, p);
}

double reg_inc_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("reg_inc_beta: a, b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;

    // continued fraction for I_x(a,b), modified Lentz
    auto betacf = [](double aa, double bb, double xx) {
        constexpr int kMaxIter = 500;
        constexpr double kEps = 1e-16;
        constexpr double kTiny = 1e-300;
        const double qab = aa + bb;
        const double qap = aa + 1.0;
        const double qam = aa - 1.0;
        double c = 1.0;
        double d = 1.0 - qab * xx / qap;
        if (std::fabs(d) < kTiny) d = kTiny;
        d = 1.0 / d;
        double h = d;
        for (int m = 1; m <= kMaxIter; ++m) {
            const double md = static_cast<double>(m);
            const double m2 = 2.0 * md;
            double num = md * (bb - md) * xx / ((qam + m2) * (aa + m2));
            d = 1.0 + num * d;
            if (std::fabs(d) < kTiny) d = kTiny;
            c = 1.0 + num / c;
            if (std::fabs(c) < kTiny) c = kTiny;
            d = 1.0 / d;
            h *= d * c;
            num = -(aa + md) * (qab + md) * xx / ((aa + m2) * (qap + m2));
            d = 1.0 + num * d;
            if (std::fabs(d) < kTiny) d = kTiny;
            c = 1.0 + num / c;
            if (std::fabs(c) < kTiny) c = kTiny;
            d = 1.0 / d;
            const double del = d * c;
            h *= del;
            if (std::fabs(del - 1.0) < kEps) break;
        }
        return h;
    };

    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double reg_inc_beta_inv(double a, double b, double y) {
    if (y <= 0.0) return 0.0;
    if (y >= 1.0) return 1.0;
    const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    double lo = 0.0;
    double hi = 1.0;
    double x = a / (a + b);
    for (int i = 0; i < 200; ++i) {
        const double g = reg_inc_beta(a, b, x) - y;
        if (g >= 0.0)
            hi = x;
        else
            lo = x;
        if (hi - lo < 1e-14) break;
        const double ld = (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta;
        const double d = std::exp(ld);
        double next = d > 0.0 ? x - g / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == x) break;
        x = next;
    }
    return hi;
}

} // namespace mcpower::binom
