#include "mcpower/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "mcpower/interval.hpp"
#include "mcpower/joint_test.hpp"
#include "mcpower/oracle.hpp"
#include "mcpower/samplers.hpp"

namespace mcpower::verify {

namespace {

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

} // namespace

CheckResult check_boundary_guarantee(double alpha, const SpendingSchedule& sched,
                                     std::int64_t t_max) {
    CheckResult res{"boundary crossing mass within eps_t", true, ""};
    BoundaryTable table(alpha, sched);

    // Step the table one move at a time so conservation is visible at
    // every t; then confirm the spent mass against the independent DP.
    for (std::int64_t t = 1; t <= t_max; ++t) {
        table.extend_to(t);
        const auto& d = table.alive_dist(t);
        const double mass = d.total + table.spent_upper_at(t) + table.spent_lower_at(t);
        if (std::fabs(mass - 1.0) > 1e-10) {
            res.pass = false;
            res.detail = fmt("mass %.15f at t=%lld", mass, static_cast<long long>(t));
            return res;
        }
    }
    const auto dp = oracle::crossing_probs(alpha, table.lower_seq(), table.upper_seq(),
                                           t_max);
    for (std::int64_t t = 1; t <= t_max; ++t) {
        const double budget = sched.epsilon_at(t) + 1e-12;
        if (dp.upper_by_t[static_cast<std::size_t>(t)] > budget ||
            dp.lower_by_t[static_cast<std::size_t>(t)] > budget) {
            res.pass = false;
            res.detail = fmt("crossing mass exceeds eps_t at t=%lld",
                             static_cast<long long>(t));
            return res;
        }
        const double du = std::fabs(dp.upper_by_t[static_cast<std::size_t>(t)] -
                                    table.spent_upper_at(t));
        const double dl = std::fabs(dp.lower_by_t[static_cast<std::size_t>(t)] -
                                    table.spent_lower_at(t));
        if (du > 1e-10 || dl > 1e-10) {
            res.pass = false;
            res.detail = fmt("spent mass disagrees with oracle at t=%lld",
                             static_cast<long long>(t));
            return res;
        }
    }
    res.detail = fmt("t <= %lld", static_cast<long long>(t_max));
    return res;
}

CheckResult check_minimality(double alpha, const SpendingSchedule& sched,
                             std::int64_t t_max) {
    CheckResult res{"boundary minimality/maximality", true, ""};
    BoundaryTable table(alpha, sched);
    table.extend_to(t_max);

    // Independent forward DP mirroring the recursion, with pre-truncation
    // tails checked against the budget on both sides of each boundary.
    std::vector<double> dist(static_cast<std::size_t>(t_max + 2), 0.0);
    dist[0] = 1.0;
    double spent_up = 0.0, spent_lo = 0.0;
    for (std::int64_t t = 1; t <= t_max; ++t) {
        for (std::int64_t s = t; s >= 1; --s)
            dist[static_cast<std::size_t>(s)] =
                dist[static_cast<std::size_t>(s)] * (1.0 - alpha) +
                dist[static_cast<std::size_t>(s - 1)] * alpha;
        dist[0] *= (1.0 - alpha);

        const double budget = sched.epsilon_at(t);
        const std::int64_t ut = table.upper(t);
        const std::int64_t lt = table.lower(t);

        double tail_at_u = 0.0; // mass at s >= U_t
        for (std::int64_t s = std::max<std::int64_t>(ut, 0); s <= t; ++s)
            tail_at_u += dist[static_cast<std::size_t>(s)];
        const double tail_above = ut - 1 >= 0 && ut - 1 <= t
                                      ? tail_at_u + dist[static_cast<std::size_t>(ut - 1)]
                                      : tail_at_u;
        if (tail_at_u + spent_up > budget) {
            res.pass = false;
            res.detail = fmt("U_%lld too small", static_cast<long long>(t));
            return res;
        }
        if (ut - 1 > lt && !(tail_above + spent_up > budget)) {
            res.pass = false;
            res.detail = fmt("U_%lld not minimal", static_cast<long long>(t));
            return res;
        }

        double tail_at_l = 0.0; // mass at s <= L_t
        for (std::int64_t s = 0; s <= std::min<std::int64_t>(lt, t); ++s)
            tail_at_l += dist[static_cast<std::size_t>(s)];
        const double tail_below = lt + 1 >= 0 && lt + 1 <= t
                                      ? tail_at_l + dist[static_cast<std::size_t>(lt + 1)]
                                      : tail_at_l;
        if (tail_at_l + spent_lo > budget) {
            res.pass = false;
            res.detail = fmt("L_%lld too large", static_cast<long long>(t));
            return res;
        }
        if (lt + 1 < ut && !(tail_below + spent_lo > budget)) {
            res.pass = false;
            res.detail = fmt("L_%lld not maximal", static_cast<long long>(t));
            return res;
        }

        spent_up += tail_at_u;
        spent_lo += tail_at_l;
        for (std::int64_t s = std::max<std::int64_t>(ut, 0); s <= t; ++s)
            dist[static_cast<std::size_t>(s)] = 0.0;
        for (std::int64_t s = 0; s <= std::min<std::int64_t>(lt, t); ++s)
            dist[static_cast<std::size_t>(s)] = 0.0;
    }
    res.detail = fmt("t <= %lld", static_cast<long long>(t_max));
    return res;
}

CheckResult check_envelope(const BoundaryTable& table, double lambda, double q,
                           std::int64_t t_from, std::int64_t t_to) {
    CheckResult res{"analytic envelope contains constructed boundaries", true, ""};
    std::vector<std::int64_t> bad;
    for (std::int64_t t = t_from; t <= t_to; ++t) {
        const EnvelopeBounds env = envelope_bounds(table.alpha(), lambda, q, t);
        if (table.upper(t) > env.upper || table.lower(t) < env.lower) bad.push_back(t);
    }
    if (!bad.empty()) {
        res.pass = false;
        std::string list;
        for (std::size_t i = 0; i < bad.size() && i < 12; ++i)
            list += (i ? "," : "") + std::to_string(bad[i]);
        if (bad.size() > 12) list += ",...";
        res.detail = fmt("%zu violations at t in {%s}", bad.size(), list.c_str());
    } else {
        res.detail = fmt("t in [%lld, %lld]", static_cast<long long>(t_from),
                         static_cast<long long>(t_to));
    }
    return res;
}

CheckResult check_wrong_decision(double alpha, const SpendingSchedule& sched,
                                 std::int64_t t_max, double shift) {
    CheckResult res{"wrong-decision mass within eps_t", true, ""};
    BoundaryTable table(alpha, sched);
    table.extend_to(t_max);
    const auto at_alpha = oracle::crossing_probs(alpha, table.lower_seq(),
                                                 table.upper_seq(), t_max);
    const auto above = oracle::crossing_probs(alpha + shift, table.lower_seq(),
                                              table.upper_seq(), t_max);
    for (std::int64_t t = 1; t <= t_max; ++t) {
        const double budget = sched.epsilon_at(t) + 1e-12;
        if (at_alpha.upper_by_t[static_cast<std::size_t>(t)] > budget) {
            res.pass = false;
            res.detail = fmt("upper crossing at p=alpha exceeds eps_t at t=%lld",
                             static_cast<long long>(t));
            return res;
        }
        if (above.lower_by_t[static_cast<std::size_t>(t)] > budget) {
            res.pass = false;
            res.detail = fmt("lower crossing at p=alpha+%.3f exceeds eps_t at t=%lld",
                             shift, static_cast<long long>(t));
            return res;
        }
    }
    res.detail = fmt("t <= %lld, shift %.3f", static_cast<long long>(t_max), shift);
    return res;
}

CheckResult check_alive_agreement(double alpha, const SpendingSchedule& sched,
                                  std::int64_t t_max, double tol) {
    CheckResult res{"alive distribution matches oracle DP", true, ""};
    BoundaryTable table(alpha, sched);
    table.extend_to(t_max);
    const auto dp = oracle::crossing_probs(alpha, table.lower_seq(), table.upper_seq(),
                                           t_max);
    const auto& d = table.alive_dist(t_max);
    const std::int64_t top = d.min_s + static_cast<std::int64_t>(d.mass.size()) - 1;
    const std::int64_t otop =
        dp.alive_min_s + static_cast<std::int64_t>(dp.alive.size()) - 1;
    const std::int64_t lo = std::min(d.min_s, dp.alive_min_s);
    const std::int64_t hi = std::max(top, otop);
    double worst = 0.0;
    for (std::int64_t s = lo; s <= hi; ++s) {
        const double a = s >= d.min_s && s <= top
                             ? d.mass[static_cast<std::size_t>(s - d.min_s)]
                             : 0.0;
        const double b = s >= dp.alive_min_s && s <= otop
                             ? dp.alive[static_cast<std::size_t>(s - dp.alive_min_s)]
                             : 0.0;
        worst = std::max(worst, std::fabs(a - b));
    }
    res.pass = worst <= tol;
    res.detail = fmt("sup-norm %.3e at t=%lld", worst, static_cast<long long>(t_max));
    return res;
}

CheckResult check_cp_coverage(std::int64_t n_max, const std::vector<double>& gammas,
                              int p_grid) {
    CheckResult res{"Clopper-Pearson exact coverage", true, ""};
    for (double gamma : gammas) {
        for (std::int64_t n = 1; n <= n_max; ++n) {
            std::vector<Interval> iv;
            for (std::int64_t r = 0; r <= n; ++r)
                iv.push_back(clopper_pearson(r, n, gamma));
            for (int gp = 0; gp <= p_grid - 1; ++gp) {
                const double p = static_cast<double>(gp) / (p_grid - 1);
                double cover = 0.0;
                for (std::int64_t r = 0; r <= n; ++r)
                    if (iv[static_cast<std::size_t>(r)].contains(p))
                        cover += oracle::binom_pmf(n, r, p);
                if (cover < 1.0 - gamma - 1e-12) {
                    res.pass = false;
                    res.detail = fmt("coverage %.6f < %.6f at n=%lld p=%.3f gamma=%.3f",
                                     cover, 1.0 - gamma, static_cast<long long>(n), p,
                                     gamma);
                    return res;
                }
            }
        }
    }
    res.detail = fmt("n <= %lld", static_cast<long long>(n_max));
    return res;
}

CheckResult check_hull_union(std::int64_t max_total, const std::vector<double>& gammas,
                             const std::vector<double>& epsilons) {
    CheckResult res{"hull equals union; nesting holds", true, ""};
    for (double gamma : gammas) {
        for (double eps : epsilons) {
            // memoized endpoints per (r, n)
            std::map<std::pair<std::int64_t, std::int64_t>, Interval> memo;
            auto inf = [&](std::int64_t r, std::int64_t n) {
                const auto key = std::make_pair(r, n);
                auto it = memo.find(key);
                if (it == memo.end())
                    it = memo.emplace(key, interval_infty(r, n - r, gamma, eps)).first;
                return it->second;
            };
            for (std::int64_t total = 1; total <= max_total; ++total) {
                for (std::int64_t r = 0; r <= total; ++r) {
                    for (std::int64_t u = 0; u + r <= total; ++u) {
                        const std::int64_t a = total - r - u;
                        const Interval hull = interval_union(r, a, u, gamma, eps);
                        // explicit union: min low, max high, and connectivity
                        double mn = 2.0, mx = -1.0;
                        double prev_high = -1.0;
                        bool connected = true;
                        for (std::int64_t k = r; k <= r + u; ++k) {
                            const Interval m = inf(k, total);
                            mn = std::min(mn, m.low);
                            mx = std::max(mx, m.high);
                            if (k > r && m.low > prev_high) connected = false;
                            prev_high = std::max(prev_high, m.high);
                        }
                        if (hull.low != mn || hull.high != mx || !connected) {
                            res.pass = false;
                            res.detail = fmt(
                                "hull/union mismatch at r=%lld a=%lld u=%lld gamma=%g",
                                static_cast<long long>(r), static_cast<long long>(a),
                                static_cast<long long>(u), gamma);
                            return res;
                        }
                        if (u > 0) {
                            const Interval n1 = interval_union(r + 1, a, u - 1, gamma, eps);
                            const Interval n2 = interval_union(r, a + 1, u - 1, gamma, eps);
                            if (n1.low < hull.low - 1e-15 || n1.high > hull.high + 1e-15 ||
                                n2.low < hull.low - 1e-15 || n2.high > hull.high + 1e-15) {
                                res.pass = false;
                                res.detail = fmt("nesting fails at r=%lld a=%lld u=%lld",
                                                 static_cast<long long>(r),
                                                 static_cast<long long>(a),
                                                 static_cast<long long>(u));
                                return res;
                            }
                        }
                    }
                }
            }
        }
    }
    res.detail = fmt("all r+a+u <= %lld", static_cast<long long>(max_total));
    return res;
}

CheckResult check_stochastic_ordering(double alpha, const SpendingSchedule& sched,
                                      std::int64_t t, double p1, double p2) {
    CheckResult res{"conditional laws ordered across p", true, ""};
    BoundaryTable table(alpha, sched);
    table.extend_to(t);
    const auto d1 = oracle::enumerate_conditional(p1, table.lower_seq(),
                                                  table.upper_seq(), t);
    const auto d2 = oracle::enumerate_conditional(p2, table.lower_seq(),
                                                  table.upper_seq(), t);
    const std::int64_t lo = std::min(d1.min_s, d2.min_s);
    const std::int64_t hi =
        std::max(d1.min_s + static_cast<std::int64_t>(d1.pmf.size()),
                 d2.min_s + static_cast<std::int64_t>(d2.pmf.size()));
    double c1 = 0.0, c2 = 0.0;
    for (std::int64_t s = lo; s < hi; ++s) {
        if (s >= d1.min_s && s < d1.min_s + static_cast<std::int64_t>(d1.pmf.size()))
            c1 += d1.pmf[static_cast<std::size_t>(s - d1.min_s)];
        if (s >= d2.min_s && s < d2.min_s + static_cast<std::int64_t>(d2.pmf.size()))
            c2 += d2.pmf[static_cast<std::size_t>(s - d2.min_s)];
        if (c1 < c2 - 1e-12) {
            res.pass = false;
            res.detail = fmt("CDF(p=%.3f) < CDF(p=%.3f) at s=%lld t=%lld", p1, p2,
                             static_cast<long long>(s), static_cast<long long>(t));
            return res;
        }
    }
    res.detail = fmt("p1=%.3f p2=%.3f t=%lld", p1, p2, static_cast<long long>(t));
    return res;
}

CheckResult check_joint_dominance(double alpha, const SpendingSchedule& sched,
                                  const std::vector<double>& pvals,
                                  const std::vector<std::int64_t>& t_values,
                                  double eta) {
    CheckResult res{"joint statistic dominated by binomial bound", true, ""};
    for (const std::int64_t t : t_values) {
        BoundaryTable table(alpha, sched);
        table.extend_to(t);

        // per-p conditional distributions
        std::map<double, oracle::CondDist> dists;
        for (double p : pvals)
            dists.emplace(p, oracle::enumerate_conditional(p, table.lower_seq(),
                                                           table.upper_seq(), t));

        // all multisets of size n <= 3 from pvals
        std::vector<std::vector<double>> configs;
        for (std::size_t i = 0; i < pvals.size(); ++i) {
            configs.push_back({pvals[i]});
            for (std::size_t j = i; j < pvals.size(); ++j) {
                configs.push_back({pvals[i], pvals[j]});
                for (std::size_t k = j; k < pvals.size(); ++k)
                    configs.push_back({pvals[i], pvals[j], pvals[k]});
            }
        }

        for (const auto& cfgp : configs) {
            const auto n = static_cast<std::int64_t>(cfgp.size());
            for (std::int64_t r_t = 1; r_t <= n; ++r_t) {
                // exact T+ distribution by product enumeration
                std::map<std::int64_t, double> t_plus_dist;
                std::vector<std::size_t> idx(cfgp.size(), 0);
                std::vector<std::int64_t> sums(cfgp.size());
                for (;;) {
                    double prob = 1.0;
                    for (std::size_t i = 0; i < cfgp.size(); ++i) {
                        const auto& d = dists.at(cfgp[i]);
                        prob *= d.pmf[idx[i]];
                        sums[i] = d.min_s + static_cast<std::int64_t>(idx[i]);
                    }
                    std::vector<std::int64_t> sorted = sums;
                    std::sort(sorted.begin(), sorted.end());
                    std::int64_t t_plus = 0;
                    for (std::int64_t i = r_t; i <= n; ++i)
                        if (table.conditional_cdf(t, sorted[static_cast<std::size_t>(i - 1)]) <=
                            eta)
                            ++t_plus;
                    t_plus_dist[t_plus] += prob;

                    // odometer over product support
                    std::size_t pos = 0;
                    while (pos < idx.size()) {
                        if (++idx[pos] < dists.at(cfgp[pos]).pmf.size()) break;
                        idx[pos] = 0;
                        ++pos;
                    }
                    if (pos == idx.size()) break;
                }

                for (std::int64_t c = 0; c <= n - r_t + 1; ++c) {
                    double tail = 0.0;
                    for (const auto& [v, p] : t_plus_dist)
                        if (v >= c) tail += p;
                    const double bound = oracle::binom_tail(n - r_t + 1, eta, c);
                    if (tail > bound + 1e-12) {
                        res.pass = false;
                        res.detail =
                            fmt("P[T+>=%lld]=%.3e > binomial %.3e (n=%lld r=%lld t=%lld)",
                                static_cast<long long>(c), tail, bound,
                                static_cast<long long>(n), static_cast<long long>(r_t),
                                static_cast<long long>(t));
                        return res;
                    }
                }
            }
        }
    }
    res.detail = fmt("%zu p-values, %zu depths", pvals.size(), t_values.size());
    return res;
}

CheckResult check_survival_slope(double alpha, const SpendingSchedule& sched,
                                 std::int64_t n_streams, std::int64_t t_cap,
                                 std::uint64_t seed, double slope_bound) {
    CheckResult res{"uniform-p survival decay", true, ""};
    BoundaryTable table(alpha, sched);
    table.extend_to(t_cap);

    SamplerSpec spec;
    spec.kind = SamplerSpec::Kind::beta;
    spec.beta_x = 1.0;
    BuiltinSource src(spec, seed, rng::Domain::main_data, rng::Domain::main_bits,
                      static_cast<std::uint64_t>(n_streams));

    std::vector<std::int64_t> taus;
    taus.reserve(static_cast<std::size_t>(n_streams));
    for (std::int64_t i = 0; i < n_streams; ++i) {
        StreamState st;
        src.advance(static_cast<std::uint64_t>(i), st, table.lower_seq(),
                    table.upper_seq(), t_cap);
        taus.push_back(st.status == StreamStatus::unresolved ? t_cap + 1 : st.steps);
    }
    std::sort(taus.begin(), taus.end());

    // least-squares slope of log survival vs log t on a log grid
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int pts = 0;
    for (double lt = std::log(1000.0); lt <= std::log(static_cast<double>(t_cap));
         lt += 0.25) {
        const auto t = static_cast<std::int64_t>(std::exp(lt));
        const auto alive = static_cast<double>(
            taus.end() - std::upper_bound(taus.begin(), taus.end(), t));
        if (alive < 10) break;
        const double x = std::log(static_cast<double>(t));
        const double y = std::log(alive / static_cast<double>(n_streams));
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++pts;
    }
    if (pts < 3) {
        res.pass = false;
        res.detail = "too few grid points with survivors";
        return res;
    }
    const double slope = (pts * sxy - sx * sy) / (pts * sxx - sx * sx);
    res.pass = slope <= slope_bound;
    res.detail = fmt("slope %.3f (bound %.2f)", slope, slope_bound);
    return res;
}

std::vector<CheckResult> run_all(const VerifyOptions& opt) {
    SpendingSchedule sched{opt.epsilon, opt.half_life};
    std::vector<CheckResult> out;
    out.push_back(check_boundary_guarantee(opt.alpha, sched, opt.t_max));
    out.push_back(check_minimality(opt.alpha, sched, opt.minimality_t_max));
    if (opt.t_max >= sched.reported_T()) {
        BoundaryTable table(opt.alpha, sched);
        table.extend_to(opt.t_max);
        out.push_back(check_envelope(table, sched.reported_lambda(), sched.reported_q(),
                                     sched.reported_T(), opt.t_max));
    } else {
        out.push_back({"analytic envelope contains constructed boundaries", true,
                       "skipped: t_max is below the schedule-reported T"});
    }
    out.push_back(check_wrong_decision(opt.alpha, sched, opt.t_max, 0.02));
    out.push_back(check_alive_agreement(opt.alpha, sched, opt.t_max, 1e-10));
    out.push_back(check_cp_coverage(25, {0.01, 0.05}, 101));
    out.push_back(check_hull_union(20, {0.01, 0.05}, {0.0, 1e-4}));
    out.push_back(check_stochastic_ordering(opt.alpha, sched, 15, 0.05, 0.10));
    out.push_back(check_joint_dominance(opt.alpha, sched, {0.06, 0.10, 0.20},
                                        {4, 8, 12}, 0.05));
    if (opt.deep)
        out.push_back(check_survival_slope(opt.alpha, sched, 100000, 100000, opt.seed,
                                           -0.4));
    return out;
}

} // namespace mcpower::verify
