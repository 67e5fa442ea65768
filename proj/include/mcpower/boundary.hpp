// Stopping boundaries U_t, L_t built by the spending recursion, together
// with the exact distribution of the partial sum under p = alpha
// conditional on survival. One table per (alpha, schedule) pair serves
// any number of streams.
//
// Construction is sequential in t. The completed prefix is immutable:
// workers may read boundaries for t <= extended_to() while no extension
// is in progress.
#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "mcpower/spending.hpp"

namespace mcpower {

struct EnvelopeBounds {
    std::int64_t upper = 0;
    std::int64_t lower = 0;
};

// High-probability envelope for the boundaries under an
// increment-bounded spending sequence:
// ceil(t*alpha + sqrt(t(q ln t - ln lambda)/2)) and the mirrored floor.
EnvelopeBounds envelope_bounds(double alpha, double lambda, double q, std::int64_t t);

class BoundaryTable {
public:
    BoundaryTable(double alpha, SpendingSchedule sched);

    // Build boundaries through t_target (no-op if already there).
    void extend_to(std::int64_t t_target);

    // Keep a snapshot of the alive distribution when construction passes
    // step t, so conditional_cdf(t, .) works after further extension.
    // Must be requested before extending past t.
    void retain_at(std::int64_t t);

    std::int64_t extended_to() const { return extended_to_; }
    double alpha() const { return alpha_; }
    const SpendingSchedule& schedule() const { return sched_; }

    std::int64_t lower(std::int64_t t) const { return lower_[static_cast<std::size_t>(t)]; }
    std::int64_t upper(std::int64_t t) const { return upper_[static_cast<std::size_t>(t)]; }
    std::span<const std::int32_t> lower_seq() const { return lower_; }
    std::span<const std::int32_t> upper_seq() const { return upper_; }

    // Cumulative crossing mass under p = alpha by step t.
    double spent_upper_at(std::int64_t t) const { return spent_upper_by_t_[static_cast<std::size_t>(t)]; }
    double spent_lower_at(std::int64_t t) const { return spent_lower_by_t_[static_cast<std::size_t>(t)]; }

    // G_t^alpha(x) = P_alpha[S_t <= x | tau > t]. Available at the current
    // front and at retained steps.
    double conditional_cdf(std::int64_t t, std::int64_t x) const;

    struct AliveDist {
        std::int64_t t = 0;
        std::int64_t min_s = 0;          // support is [min_s, min_s + mass.size() - 1]
        std::vector<double> mass;        // P_alpha(S_t = s, tau > t)
        double total = 1.0;              // alive probability
    };

    // Alive distribution at t (current front or a retained step).
    const AliveDist& alive_dist(std::int64_t t) const;
    bool has_alive_dist(std::int64_t t) const { return find_dist(t) != nullptr; }

private:
    void step_once();
    const AliveDist* find_dist(std::int64_t t) const;

    double alpha_;
    SpendingSchedule sched_;
    std::int64_t extended_to_ = 0;

    std::vector<std::int32_t> lower_;
    std::vector<std::int32_t> upper_;
    std::vector<double> spent_upper_by_t_;
    std::vector<double> spent_lower_by_t_;

    double spent_upper_ = 0.0, spent_upper_comp_ = 0.0;
    double spent_lower_ = 0.0, spent_lower_comp_ = 0.0;

    AliveDist front_;
    std::vector<double> scratch_;
    std::map<std::int64_t, AliveDist> retained_;
    std::vector<std::int64_t> retain_requests_;
};

} // namespace mcpower
