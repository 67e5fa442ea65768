#include "mcpower/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace mcpower::oracle {

CrossingProbs crossing_probs(double p, std::span<const std::int32_t> lower,
                             std::span<const std::int32_t> upper, std::int64_t t_max) {
    if (t_max < 0) throw std::invalid_argument("crossing_probs: t_max must be >= 0");
    if (static_cast<std::size_t>(t_max) >= lower.size() ||
        static_cast<std::size_t>(t_max) >= upper.size())
        throw std::invalid_argument("crossing_probs: boundaries shorter than t_max");

    CrossingProbs out;
    out.upper_by_t.assign(static_cast<std::size_t>(t_max + 1), 0.0);
    out.lower_by_t.assign(static_cast<std::size_t>(t_max + 1), 0.0);

    // Dense distribution over s = 0..t; simple and plainly correct.
    std::vector<double> dist(static_cast<std::size_t>(t_max + 2), 0.0);
    dist[0] = 1.0;
    double hit_upper = 0.0, hit_lower = 0.0;

    for (std::int64_t t = 1; t <= t_max; ++t) {
        for (std::int64_t s = t; s >= 1; --s)
            dist[static_cast<std::size_t>(s)] =
                dist[static_cast<std::size_t>(s)] * (1.0 - p) +
                dist[static_cast<std::size_t>(s - 1)] * p;
        dist[0] *= (1.0 - p);

        const std::int64_t ut = upper[static_cast<std::size_t>(t)];
        const std::int64_t lt = lower[static_cast<std::size_t>(t)];
        for (std::int64_t s = std::max<std::int64_t>(ut, 0); s <= t; ++s) {
            hit_upper += dist[static_cast<std::size_t>(s)];
            dist[static_cast<std::size_t>(s)] = 0.0;
        }
        for (std::int64_t s = 0; s <= std::min<std::int64_t>(lt, t); ++s) {
            hit_lower += dist[static_cast<std::size_t>(s)];
            dist[static_cast<std::size_t>(s)] = 0.0;
        }
        out.upper_by_t[static_cast<std::size_t>(t)] = hit_upper;
        out.lower_by_t[static_cast<std::size_t>(t)] = hit_lower;
    }

    std::int64_t min_s = 0;
    while (min_s <= t_max && dist[static_cast<std::size_t>(min_s)] == 0.0) ++min_s;
    std::int64_t max_s = t_max;
    while (max_s >= min_s && dist[static_cast<std::size_t>(max_s)] == 0.0) --max_s;
    out.alive_min_s = min_s;
    for (std::int64_t s = min_s; s <= max_s; ++s)
        out.alive.push_back(dist[static_cast<std::size_t>(s)]);
    return out;
}

CondDist enumerate_conditional(double p, std::span<const std::int32_t> lower,
                               std::span<const std::int32_t> upper, std::int64_t t) {
    if (t < 1 || t > 22)
        throw std::invalid_argument("enumerate_conditional: t must be in [1,22]");
    if (static_cast<std::size_t>(t) >= lower.size())
        throw std::invalid_argument("enumerate_conditional: boundaries too short");

    std::vector<double> mass(static_cast<std::size_t>(t + 1), 0.0);
    double alive_total = 0.0;

    // Depth-first walk over all bit strings, pruning at absorption.
    struct Frame { std::int64_t step; std::int64_t sum; double prob; };
    std::vector<Frame> stack;
    stack.push_back({0, 0, 1.0});
    while (!stack.empty()) {
        const Frame f = stack.back();
        stack.pop_back();
        if (f.step == t) {
            mass[static_cast<std::size_t>(f.sum)] += f.prob;
            alive_total += f.prob;
            continue;
        }
        const std::int64_t nt = f.step + 1;
        for (int bit = 0; bit <= 1; ++bit) {
            const std::int64_t s = f.sum + bit;
            const double pr = f.prob * (bit ? p : 1.0 - p);
            if (pr == 0.0) continue;
            if (s >= upper[static_cast<std::size_t>(nt)]) continue; // absorbed
            if (s <= lower[static_cast<std::size_t>(nt)]) continue; // absorbed
            stack.push_back({nt, s, pr});
        }
    }

    if (alive_total <= 0.0)
        throw std::domain_error("enumerate_conditional: no surviving paths");

    CondDist out;
    std::int64_t min_s = 0;
    while (min_s <= t && mass[static_cast<std::size_t>(min_s)] == 0.0) ++min_s;
    std::int64_t max_s = t;
    while (max_s >= min_s && mass[static_cast<std::size_t>(max_s)] == 0.0) --max_s;
    out.min_s = min_s;
    for (std::int64_t s = min_s; s <= max_s; ++s)
        out.pmf.push_back(mass[static_cast<std::size_t>(s)] / alive_total);
    return out;
}

double binom_pmf(std::int64_t n, std::int64_t k, double p) {
    if (k < 0 || k > n) return 0.0;
    if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
    if (p >= 1.0) return k == n ? 1.0 : 0.0;
    const double nd = static_cast<double>(n), kd = static_cast<double>(k);
    const double lg = std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) -
                      std::lgamma(nd - kd + 1.0) + kd * std::log(p) +
                      (nd - kd) * std::log1p(-p);
    return std::exp(lg);
}

double binom_tail(std::int64_t n, double p, std::int64_t k) {
    if (k <= 0) return 1.0;
    if (k > n) return 0.0;
    double acc = 0.0;
    for (std::int64_t j = n; j >= k; --j) {
        acc += binom_pmf(n, j, p);
        if (acc > 0.0 && binom_pmf(n, j, p) < 1e-20 * acc &&
            static_cast<double>(j) < static_cast<double>(n) * p)
            break;
    }
    if (acc > 1.0) acc = 1.0;
    return acc;
}

std::vector<Interval> union_members(std::int64_t r, std::int64_t a, std::int64_t u,
                                    double gamma, double epsilon) {
    std::vector<Interval> members;
    const std::int64_t n = r + a + u;
    for (std::int64_t k = r; k <= r + u; ++k)
        members.push_back(interval_infty(k, n - k, gamma, epsilon));
    return members;
}

} // namespace mcpower::oracle
