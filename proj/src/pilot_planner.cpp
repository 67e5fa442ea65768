#include "mcpower/pilot_planner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mcpower/rng.hpp"

namespace mcpower {

PilotSummary run_pilot(const PilotConfig& cfg, StreamSource& source,
                       BoundaryTable& table) {
    if (cfg.n < 1 || cfg.t_max < 1)
        throw std::invalid_argument("pilot: n and t_max must be >= 1");
    if (!(cfg.gamma_pilot > 0.0 && cfg.gamma_pilot < 1.0))
        throw std::invalid_argument("pilot: gamma_pilot must be in (0,1)");

    EngineConfig ec;
    ec.gamma = cfg.gamma_pilot;
    ec.epsilon = cfg.epsilon;
    ec.rule = PrecisionRule::fixed(0.0); // nothing admits; run to t_max
    ec.n_streams = cfg.n;
    ec.workers = cfg.workers;
    ec.max_steps = cfg.t_max;
    ec.max_effort = cfg.max_effort;

    const RunResult r = run_streams(ec, source, table);
    if (r.reason == StopReason::sampler_failure)
        throw SamplerError(r.error, 0);

    PilotSummary s;
    s.n = cfg.n;
    s.t_max = cfg.t_max;
    s.positives = r.positives;
    s.negatives = r.negatives;
    s.unresolved = r.unresolved;
    s.gamma_pilot = cfg.gamma_pilot;
    s.interval = interval_union(r.positives, r.negatives, r.unresolved,
                                cfg.gamma_pilot, cfg.epsilon);
    for (const auto& st : r.streams)
        if (st.status != StreamStatus::unresolved) s.resolved_times.push_back(st.steps);
    std::sort(s.resolved_times.begin(), s.resolved_times.end());
    s.beta_hat = (static_cast<double>(r.positives) + 0.5) /
                 (static_cast<double>(r.positives + r.negatives) + 1.0);
    s.survival_at_tmax = static_cast<double>(r.unresolved) / static_cast<double>(cfg.n);
    s.effort = r.effort;
    return s;
}

double blind_worst_length(std::int64_t n, double gamma, double epsilon) {
    if (n < 1) throw std::invalid_argument("blind_worst_length: n must be >= 1");
    if (n <= 2) return interval_union(0, 0, n, gamma, epsilon).length();
    const std::int64_t resolved = n - 2;
    return interval_union(resolved / 2, resolved - resolved / 2, 2, gamma, epsilon)
        .length();
}

std::int64_t n_blind(double delta, double gamma, double epsilon) {
    if (!(delta > 0.0 && delta <= 1.0))
        throw std::invalid_argument("n_blind: delta must be in (0,1]");
    if (blind_worst_length(1, gamma, epsilon) <= delta) return 1;

    std::int64_t hi = 2;
    while (blind_worst_length(hi, gamma, epsilon) > delta) {
        hi *= 2;
        if (hi > (std::int64_t{1} << 40))
            throw std::runtime_error("n_blind: no feasible N found");
    }
    std::int64_t lo = hi / 2; // worst_length(lo) > delta
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (blind_worst_length(mid, gamma, epsilon) <= delta)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

namespace {

// Admissibility of every r-split at this N, scanning only splits whose
// interval overlaps the pilot box (elsewhere the intersection is empty,
// hence zero-length and admitted).
bool pilot_feasible(std::int64_t n, const Interval& pilot, const PrecisionRule& rule,
                    double gamma_main, double epsilon) {
    if (n <= 2) {
        const Interval iv = interval_union(0, 0, n, gamma_main, epsilon);
        return rule.admits(intersect_with_pilot(iv, pilot).box);
    }
    CpCache cache(n, gamma_main);
    const std::int64_t resolved = n - 2;

    auto member = [&](std::int64_t r) {
        return cache.union_interval(r, resolved - r, 2, epsilon);
    };

    // Both endpoints grow with r, so the splits whose interval overlaps
    // the pilot box form one window; everything outside intersects to a
    // zero-length (admitted) interval.
    std::int64_t first = resolved + 1;
    for (std::int64_t lo = 0, hi = resolved; lo <= hi;) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (member(mid).high >= pilot.low) {
            first = mid;
            hi = mid - 1;
        } else {
            lo = mid + 1;
        }
    }
    std::int64_t last = -1;
    for (std::int64_t lo = 0, hi = resolved; lo <= hi;) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (member(mid).low <= pilot.high) {
            last = mid;
            lo = mid + 1;
        } else {
            hi = mid - 1;
        }
    }

    for (std::int64_t r = first; r <= last; ++r) {
        const auto x = intersect_with_pilot(member(r), pilot);
        if (!rule.admits(x.box)) return false;
    }
    return true;
}

} // namespace

std::int64_t n_pilot(const Interval& pilot_interval, const PrecisionRule& rule,
                     double gamma_main, double epsilon) {
    if (!(gamma_main > 0.0 && gamma_main < 1.0))
        throw std::invalid_argument("n_pilot: main gamma must be in (0,1)");

    auto feasible = [&](std::int64_t n) {
        return pilot_feasible(n, pilot_interval, rule, gamma_main, epsilon);
    };
    if (feasible(1)) return 1;

    // A fixed-length rule at the tightest demanded length is feasible, so
    // the blind count at that length bounds the search.
    std::int64_t hi = n_blind(std::min(1.0, rule.reference_delta()), gamma_main, epsilon);
    if (!feasible(hi)) {
        while (!feasible(hi)) {
            hi *= 2;
            if (hi > (std::int64_t{1} << 40))
                throw std::runtime_error("n_pilot: no feasible N found");
        }
    }
    std::int64_t lo = 1; // infeasible
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (feasible(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

namespace detail {

// Solve ln t / t = y for t >= t0 by safeguarded Newton.
double tail_inverse(double y, double t0) {
    const double cap = 9.0e15;
    if (y <= 0.0) return cap;
    double t = t0;
    // Newton on f(t) = ln t - y t from an asymptotic start.
    const double z = 1.0 / y;
    double guess = z * (std::log(z) + std::log(std::max(1.0, std::log(z))));
    if (guess < t0) guess = t0;
    if (guess > cap) return cap;
    t = guess;
    for (int i = 0; i < 20; ++i) {
        const double f = std::log(t) - y * t;
        const double fp = 1.0 / t - y;
        if (fp == 0.0) break;
        double next = t - f / fp;
        if (next < t0) next = t0;
        if (next > cap) { t = cap; break; }
        if (std::fabs(next - t) < 0.5) { t = next; break; }
        t = next;
    }
    return std::max(t, t0);
}

} // namespace detail

NOptResult estimate_n_opt(const PilotSummary& pilot, std::int64_t n_lo,
                          std::int64_t n_hi, const PrecisionRule& rule,
                          const NOptConfig& cfg) {
    if (n_lo < 1 || n_hi < n_lo)
        throw std::invalid_argument("estimate_n_opt: bad N range");
    if (pilot.survival_at_tmax <= 0.0 || pilot.resolved_times.empty())
        return {n_lo, 0.0, true};

    const double t_max = static_cast<double>(pilot.t_max);
    const double g0 = std::log(t_max) / t_max;
    const double p_resolve = 1.0 - pilot.survival_at_tmax;
    const auto& times = pilot.resolved_times; // sorted ascending
    const auto m = static_cast<std::uint64_t>(times.size());

    // Tail quantiles on a u-grid (log-interpolated); draws below the first
    // grid cell fall back to the exact solve.
    constexpr int kTailGrid = 2048;
    std::vector<double> tail_log_t(kTailGrid + 1);
    for (int k = 0; k <= kTailGrid; ++k) {
        const double u = std::max(static_cast<double>(k) / kTailGrid, 0.5 / kTailGrid);
        tail_log_t[static_cast<std::size_t>(k)] =
            std::log(detail::tail_inverse(u * u * g0, t_max));
    }
    auto tail_draw = [&](double u) {
        const double pos = u * kTailGrid;
        const int k = static_cast<int>(pos);
        if (k < 1) return detail::tail_inverse(u * u * g0, t_max);
        if (k >= kTailGrid) return t_max;
        const double w = pos - k;
        return std::exp(tail_log_t[static_cast<std::size_t>(k)] * (1.0 - w) +
                        tail_log_t[static_cast<std::size_t>(k + 1)] * w);
    };

    // Geometric N grid.
    std::vector<std::int64_t> grid;
    for (std::int64_t i = 0; i < cfg.grid_points; ++i) {
        const double w = cfg.grid_points == 1
                             ? 0.0
                             : static_cast<double>(i) / static_cast<double>(cfg.grid_points - 1);
        const auto n = static_cast<std::int64_t>(std::llround(
            static_cast<double>(n_lo) *
            std::pow(static_cast<double>(n_hi) / static_cast<double>(n_lo), w)));
        if (grid.empty() || n > grid.back()) grid.push_back(n);
    }

    NOptResult best;
    std::vector<std::int64_t> counts(times.size());
    std::vector<double> tail_u;
    std::vector<double> taus;
    std::vector<std::int64_t> prefix_r;
    std::vector<double> prefix_tau;

    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        const std::int64_t n = grid[gi];
        CpCache cache(n, cfg.gamma_main);
        double total_effort = 0.0;
        std::int64_t j_hint = 0;

        for (std::int64_t rep = 0; rep < cfg.replicates; ++rep) {
            rng::CounterEngine eng(rng::hash4(cfg.seed, rng::tag(rng::Domain::plan),
                                              static_cast<std::uint64_t>(gi),
                                              static_cast<std::uint64_t>(rep)));
            // Stopping times: resolved draws resample the pilot multiset
            // (bucket counts keep them sorted), tail draws are sorted by u.
            std::fill(counts.begin(), counts.end(), 0);
            tail_u.clear();
            for (std::int64_t i = 0; i < n; ++i) {
                // one raw draw per stream: low half decides resolution,
                // high half picks the bucket / tail quantile
                const std::uint64_t w = eng.next();
                const double u_lo = static_cast<double>(w & 0xffffffffULL) * 0x1.0p-32;
                const double u_hi = static_cast<double>(w >> 32) * 0x1.0p-32;
                if (u_lo < p_resolve)
                    ++counts[static_cast<std::size_t>(
                        static_cast<std::uint64_t>(u_hi * static_cast<double>(m)))];
                else
                    tail_u.push_back(u_hi + 0x1.0p-33);
            }
            taus.clear();
            taus.reserve(static_cast<std::size_t>(n));
            for (std::size_t k = 0; k < counts.size(); ++k)
                for (std::int64_t c = 0; c < counts[k]; ++c)
                    taus.push_back(static_cast<double>(times[k]));
            std::sort(tail_u.begin(), tail_u.end(), std::greater<double>());
            for (const double u : tail_u)
                taus.push_back(std::ceil(tail_draw(u)));

            // Outcomes are i.i.d., so assign them to sorted positions.
            prefix_r.assign(taus.size() + 1, 0);
            prefix_tau.assign(taus.size() + 1, 0.0);
            for (std::size_t k = 0; k < taus.size(); ++k) {
                prefix_r[k + 1] =
                    prefix_r[k] + (eng.next_unit() < pilot.beta_hat ? 1 : 0);
                prefix_tau[k + 1] = prefix_tau[k] + taus[k];
            }

            auto admissible_at = [&](std::int64_t j) {
                const std::int64_t r = prefix_r[static_cast<std::size_t>(j)];
                const std::int64_t a = j - r;
                Interval iv = cache.union_interval(r, a, n - j, cfg.epsilon);
                iv = intersect_with_pilot(iv, pilot.interval).box;
                return rule.admits(iv);
            };

            // Intervals are nested along resolutions, so the first
            // admissible index is found by bracketed search. The stopping
            // index barely moves between replicates; gallop around the
            // previous one to keep the probe set small.
            std::int64_t j_star = n;
            if (admissible_at(0)) {
                j_star = 0;
            } else {
                std::int64_t lo = 0, hi = n;
                if (j_hint > 0 && j_hint <= n) {
                    if (admissible_at(j_hint)) {
                        hi = j_hint;
                        std::int64_t step = 1;
                        while (hi - step > 0 && admissible_at(hi - step)) {
                            hi -= step;
                            step *= 2;
                        }
                        lo = std::max<std::int64_t>(0, hi - step);
                    } else {
                        lo = j_hint;
                        std::int64_t step = 1;
                        while (lo + step < n && !admissible_at(lo + step)) {
                            lo += step;
                            step *= 2;
                        }
                        hi = std::min<std::int64_t>(n, lo + step);
                    }
                }
                while (hi - lo > 1) {
                    const std::int64_t mid = lo + (hi - lo) / 2;
                    if (admissible_at(mid))
                        hi = mid;
                    else
                        lo = mid;
                }
                j_star = hi;
            }
            j_hint = j_star;
            const double t_stop =
                j_star == 0 ? 0.0 : taus[static_cast<std::size_t>(j_star - 1)];
            total_effort += prefix_tau[static_cast<std::size_t>(j_star)] +
                            static_cast<double>(n - j_star) * t_stop;
        }

        const double mean_effort = total_effort / static_cast<double>(cfg.replicates);
        if (gi == 0 || mean_effort < best.expected_effort) {
            best.n = n;
            best.expected_effort = mean_effort;
        }
    }
    return best;
}

} // namespace mcpower
