#include "mcpower/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mcpower {

EnvelopeBounds envelope_bounds(double alpha, double lambda, double q, std::int64_t t) {
    if (t < 1) throw std::invalid_argument("envelope_bounds: t must be >= 1");
    const double td = static_cast<double>(t);
    const double arg = td * (q * std::log(td) - std::log(lambda)) / 2.0;
    if (arg < 0.0)
        throw std::domain_error("envelope_bounds: negative square-root argument");
    const double half_width = std::sqrt(arg);
    EnvelopeBounds b;
    b.upper = static_cast<std::int64_t>(std::ceil(td * alpha + half_width));
    b.lower = static_cast<std::int64_t>(std::floor(td * alpha - half_width));
    return b;
}

BoundaryTable::BoundaryTable(double alpha, SpendingSchedule sched)
    : alpha_(alpha), sched_(sched) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("BoundaryTable: alpha must be in (0,1)");
    sched_.validate();

    // t = 0: S_0 = 0 with certainty, nothing spent. Sentinel boundaries
    // keep S_0 strictly interior.
    lower_.push_back(-1);
    upper_.push_back(1);
    spent_upper_by_t_.push_back(0.0);
    spent_lower_by_t_.push_back(0.0);
    front_.t = 0;
    front_.min_s = 0;
    front_.mass = {1.0};
    front_.total = 1.0;
}

void BoundaryTable::retain_at(std::int64_t t) {
    if (t <= extended_to_) {
        if (!find_dist(t))
            throw std::invalid_argument("BoundaryTable: step already passed, cannot retain");
        return;
    }
    retain_requests_.push_back(t);
}

void BoundaryTable::extend_to(std::int64_t t_target) {
    while (extended_to_ < t_target) step_once();
}

void BoundaryTable::step_once() {
    const std::int64_t t = extended_to_ + 1;
    const double budget = sched_.epsilon_at(t);
    if (budget < spent_upper_ || budget < spent_lower_)
        throw std::logic_error("BoundaryTable: budget below already-spent mass");

    // One Bernoulli(alpha) step: h over [lo, hi+1].
    const std::int64_t lo = front_.min_s;
    const std::int64_t hi = front_.min_s + static_cast<std::int64_t>(front_.mass.size()) - 1;
    const std::size_t hwidth = front_.mass.size() + 1;
    scratch_.assign(hwidth, 0.0);
    for (std::size_t i = 0; i < front_.mass.size(); ++i) {
        const double m = front_.mass[i];
        scratch_[i] += m * (1.0 - alpha_);
        scratch_[i + 1] += m * alpha_;
    }
    auto h_at = [&](std::int64_t s) { return scratch_[static_cast<std::size_t>(s - lo)]; };

    // U_t = min{ j : sum_{s>=j} h(s) + spent_upper <= eps_t }. Scan down
    // from the unreachable level hi+2; Kahan-compensated tail.
    std::int64_t u_bound = hi + 2;
    double up_tail = 0.0, up_comp = 0.0;
    while (u_bound - 1 >= lo) {
        const double y = h_at(u_bound - 1) - up_comp;
        const double s = up_tail + y;
        const double new_comp = (s - up_tail) - y;
        if (s + spent_upper_ > budget) break;
        up_tail = s;
        up_comp = new_comp;
        --u_bound;
    }

    // L_t = max{ j : sum_{s<=j} h(s) + spent_lower <= eps_t }, scanning up
    // from lo-1. Levels below the support carry no mass, so L_t >= -1.
    std::int64_t l_bound = lo - 1;
    double low_tail = 0.0, low_comp = 0.0;
    while (l_bound + 1 <= hi + 1 && l_bound + 1 < u_bound) {
        const double y = h_at(l_bound + 1) - low_comp;
        const double s = low_tail + y;
        const double new_comp = (s - low_tail) - y;
        if (s + spent_lower_ > budget) break;
        low_tail = s;
        low_comp = new_comp;
        ++l_bound;
    }

    if (l_bound >= u_bound - 1)
        throw std::logic_error("BoundaryTable: alive region vanished");

    {
        const double y = up_tail - spent_upper_comp_;
        const double s = spent_upper_ + y;
        spent_upper_comp_ = (s - spent_upper_) - y;
        spent_upper_ = s;
    }
    {
        const double y = low_tail - spent_lower_comp_;
        const double s = spent_lower_ + y;
        spent_lower_comp_ = (s - spent_lower_) - y;
        spent_lower_ = s;
    }

    const std::int64_t alive_lo = std::max<std::int64_t>(l_bound + 1, lo);
    const std::int64_t alive_hi = std::min<std::int64_t>(u_bound - 1, hi + 1);
    AliveDist next;
    next.t = t;
    next.min_s = alive_lo;
    next.mass.assign(static_cast<std::size_t>(alive_hi - alive_lo + 1), 0.0);
    double total = 0.0, total_comp = 0.0;
    for (std::int64_t s = alive_lo; s <= alive_hi; ++s) {
        const double m = h_at(s);
        next.mass[static_cast<std::size_t>(s - alive_lo)] = m;
        const double y = m - total_comp;
        const double acc = total + y;
        total_comp = (acc - total) - y;
        total = acc;
    }
    next.total = total;
    front_ = std::move(next);

    lower_.push_back(static_cast<std::int32_t>(l_bound));
    upper_.push_back(static_cast<std::int32_t>(u_bound));
    spent_upper_by_t_.push_back(spent_upper_);
    spent_lower_by_t_.push_back(spent_lower_);
    extended_to_ = t;

    if (!retain_requests_.empty()) {
        auto it = std::find(retain_requests_.begin(), retain_requests_.end(), t);
        if (it != retain_requests_.end()) {
            retained_.emplace(t, front_);
            retain_requests_.erase(it);
        }
    }
}

const BoundaryTable::AliveDist* BoundaryTable::find_dist(std::int64_t t) const {
    if (t == front_.t) return &front_;
    auto it = retained_.find(t);
    if (it != retained_.end()) return &it->second;
    return nullptr;
}

const BoundaryTable::AliveDist& BoundaryTable::alive_dist(std::int64_t t) const {
    const AliveDist* d = find_dist(t);
    if (!d) throw std::invalid_argument("BoundaryTable: alive distribution not retained for this step");
    return *d;
}

double BoundaryTable::conditional_cdf(std::int64_t t, std::int64_t x) const {
    const AliveDist& d = alive_dist(t);
    if (!(d.total > 0.0))
        throw std::domain_error("BoundaryTable: conditioning event has probability zero");
    if (x < d.min_s) return 0.0;
    const std::int64_t top = d.min_s + static_cast<std::int64_t>(d.mass.size()) - 1;
    if (x >= top) return 1.0;
    double acc = 0.0, comp = 0.0;
    for (std::int64_t s = d.min_s; s <= x; ++s) {
        const double y = d.mass[static_cast<std::size_t>(s - d.min_s)] - comp;
        const double a = acc + y;
        comp = (a - acc) - y;
        acc = a;
    }
    return acc / d.total;
}

} // namespace mcpower
