#include "mcpower/joint_test.hpp"

#include <algorithm>
#include <stdexcept>

#include "mcpower/binom.hpp"

namespace mcpower {

namespace {

Interval credited_interval(CpCache& cache, std::int64_t R, std::int64_t A,
                           std::int64_t u, std::int64_t r_add, std::int64_t a_add,
                           double epsilon, const std::optional<Interval>& pilot) {
    Interval iv = cache.union_interval(R + r_add, A + a_add, u - r_add - a_add, epsilon);
    if (pilot) iv = intersect_with_pilot(iv, *pilot).box;
    return iv;
}

} // namespace

RaChoice choose_ra(CpCache& cache, std::int64_t R, std::int64_t A, std::int64_t u,
                   double epsilon, const std::optional<Interval>& pilot,
                   const PrecisionRule& rule) {
    if (u < 1) throw std::invalid_argument("choose_ra: no unresolved streams");

    auto ok = [&](std::int64_t r_add, std::int64_t a_add) {
        return rule.admits(credited_interval(cache, R, A, u, r_add, a_add, epsilon, pilot));
    };

    // Admissibility is monotone in k (crediting more resolutions only
    // shrinks the interval), so the smallest workable k is found by
    // bisection over [0, u/2].
    const std::int64_t k_max = u / 2;
    if (ok(k_max, k_max)) {
        std::int64_t lo = 0, hi = k_max; // invariant: ok(hi)
        if (ok(0, 0)) return {true, 0, 0};
        while (hi - lo > 1) {
            const std::int64_t mid = lo + (hi - lo) / 2;
            if (ok(mid, mid))
                hi = mid;
            else
                lo = mid;
        }
        return {true, hi, hi};
    }

    // Odd remainder: one stream cannot be paired. The asymmetric
    // completion resolves all of them, leaning toward the pilot's side.
    if (u % 2 == 1) {
        const bool favor_r = !pilot || pilot->midpoint() >= 0.5;
        const std::int64_t r_add = k_max + (favor_r ? 1 : 0);
        const std::int64_t a_add = k_max + (favor_r ? 0 : 1);
        if (ok(r_add, a_add)) return {true, r_add, a_add};
    }
    return {false, 0, 0};
}

JointStatistics test_statistics(std::span<const std::int64_t> sorted_sums,
                                const BoundaryTable& table, std::int64_t t,
                                std::int64_t r_t, std::int64_t a_t, double eta) {
    const auto n = static_cast<std::int64_t>(sorted_sums.size());
    if (n < 1) throw std::invalid_argument("test_statistics: empty sums");
    if (r_t < 0 || a_t < 0 || r_t + a_t > n)
        throw std::invalid_argument("test_statistics: bad (r_t, a_t)");
    if (!(eta > 0.0 && eta < 1.0))
        throw std::invalid_argument("test_statistics: eta must be in (0,1)");

    const auto& dist = table.alive_dist(t);
    const std::int64_t top = dist.min_s + static_cast<std::int64_t>(dist.mass.size()) - 1;

    // G is monotone in s, so each side reduces to one threshold on s.
    // Largest s with G(s) <= eta:
    std::int64_t s_low = dist.min_s - 1;
    {
        double acc = 0.0;
        for (std::int64_t s = dist.min_s; s <= top; ++s) {
            acc += dist.mass[static_cast<std::size_t>(s - dist.min_s)];
            if (acc / dist.total <= eta)
                s_low = s;
            else
                break;
        }
    }
    // Smallest s with G(s) >= 1 - eta:
    std::int64_t s_high = top;
    {
        double acc = 0.0;
        for (std::int64_t s = dist.min_s; s <= top; ++s) {
            acc += dist.mass[static_cast<std::size_t>(s - dist.min_s)];
            if (acc / dist.total >= 1.0 - eta) { s_high = s; break; }
        }
    }

    JointStatistics st;
    if (r_t >= 1) {
        // count of sums <= s_low among order-statistic indices >= r_t
        const auto c_lo = static_cast<std::int64_t>(
            std::upper_bound(sorted_sums.begin(), sorted_sums.end(), s_low) -
            sorted_sums.begin());
        st.t_plus = std::max<std::int64_t>(0, c_lo - r_t + 1);
    }
    if (a_t >= 1) {
        // count of sums >= s_high among indices <= n - a_t + 1
        const auto c_hi = static_cast<std::int64_t>(
            sorted_sums.end() -
            std::lower_bound(sorted_sums.begin(), sorted_sums.end(), s_high));
        st.t_minus = std::max<std::int64_t>(0, c_hi - a_t + 1);
    }
    return st;
}

JointDecision decide(std::int64_t t_plus, std::int64_t t_minus, std::int64_t n_t,
                     std::int64_t r_t, std::int64_t a_t, double eta, double xi_t) {
    if (!(xi_t > 0.0)) throw std::invalid_argument("decide: xi_t must be positive");
    JointDecision d;
    if (r_t == 0) {
        d.reject_plus = true;
        d.p_plus = 0.0;
    } else {
        d.p_plus = binom::tail_ge(n_t - r_t + 1, t_plus, eta);
        d.reject_plus = d.p_plus <= 0.5 * xi_t;
    }
    if (a_t == 0) {
        d.reject_minus = true;
        d.p_minus = 0.0;
    } else {
        d.p_minus = binom::tail_ge(n_t - a_t + 1, t_minus, eta);
        d.reject_minus = d.p_minus <= 0.5 * xi_t;
    }
    return d;
}

} // namespace mcpower
