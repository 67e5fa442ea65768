#include "mcpower/precision_rule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mcpower {

PrecisionRule PrecisionRule::fixed(double delta) {
    if (!(delta >= 0.0)) throw std::invalid_argument("rule fixed: delta must be >= 0");
    PrecisionRule r;
    r.kind_ = Kind::fixed;
    r.delta_ = delta;
    return r;
}

PrecisionRule PrecisionRule::sqrt_profile(double delta_ref, double m_ref) {
    if (!(delta_ref >= 0.0)) throw std::invalid_argument("rule sqrt: delta must be >= 0");
    if (!(m_ref > 0.0 && m_ref < 1.0))
        throw std::invalid_argument("rule sqrt: reference midpoint must be in (0,1)");
    PrecisionRule r;
    r.kind_ = Kind::sqrt_profile;
    r.delta_ = delta_ref;
    r.m_ref_ = m_ref;
    return r;
}

PrecisionRule PrecisionRule::band(double outer, double inner, double left_cut,
                                  double right_cut) {
    if (!(inner >= 0.0 && outer >= inner))
        throw std::invalid_argument("rule band: need 0 <= inner <= outer");
    if (!(left_cut < right_cut))
        throw std::invalid_argument("rule band: cuts out of order");
    PrecisionRule r;
    r.kind_ = Kind::band;
    r.outer_ = outer;
    r.inner_ = inner;
    r.left_cut_ = left_cut;
    r.right_cut_ = right_cut;
    return r;
}

PrecisionRule PrecisionRule::left_tail(double delta, double cut) {
    if (!(delta >= 0.0)) throw std::invalid_argument("rule lefttail: delta must be >= 0");
    PrecisionRule r;
    r.kind_ = Kind::left_tail;
    r.delta_ = delta;
    r.cut_ = cut;
    return r;
}

PrecisionRule PrecisionRule::custom(std::vector<std::pair<double, double>> table) {
    if (table.size() < 2) throw std::invalid_argument("rule custom: need at least two rows");
    std::sort(table.begin(), table.end());
    for (const auto& [m, d] : table) {
        if (!(m >= 0.0 && m <= 1.0))
            throw std::invalid_argument("rule custom: midpoints must be in [0,1]");
        if (!(d >= 0.0))
            throw std::invalid_argument("rule custom: lengths must be >= 0");
    }
    PrecisionRule r;
    r.kind_ = Kind::custom;
    r.table_ = std::move(table);

    // Shrink-monotonicity holds iff delta is 2-Lipschitz from above; check
    // on a grid and warn, do not reject.
    bool lipschitz_ok = true;
    constexpr int kGrid = 400;
    double prev = r.delta_at(0.0);
    for (int i = 1; i <= kGrid && lipschitz_ok; ++i) {
        const double m = static_cast<double>(i) / kGrid;
        const double cur = r.delta_at(m);
        if (std::fabs(cur - prev) > 2.0 / kGrid + 1e-12) lipschitz_ok = false;
        prev = cur;
    }
    if (!lipschitz_ok)
        r.warnings_.push_back(
            "custom rule is steeper than 2 in places; a subinterval of an "
            "admitted interval may be rejected");
    return r;
}

double PrecisionRule::delta_at(double midpoint) const {
    if (!(midpoint >= 0.0 && midpoint <= 1.0))
        throw std::invalid_argument("delta_at: midpoint must be in [0,1]");
    switch (kind_) {
    case Kind::fixed:
        return delta_;
    case Kind::sqrt_profile:
        // ratio first: at the reference midpoint the bound is the
        // reference length bit-exactly
        return delta_ * (std::sqrt(midpoint * (1.0 - midpoint)) /
                         std::sqrt(m_ref_ * (1.0 - m_ref_)));
    case Kind::band: {
        const double clear = std::min(2.0 * (midpoint - left_cut_),
                                      2.0 * (right_cut_ - midpoint));
        return std::max(inner_, std::min(outer_, clear));
    }
    case Kind::left_tail:
        return std::max(delta_, 2.0 * (midpoint - cut_));
    case Kind::custom: {
        if (midpoint <= table_.front().first) return table_.front().second;
        if (midpoint >= table_.back().first) return table_.back().second;
        auto it = std::upper_bound(table_.begin(), table_.end(),
                                   std::make_pair(midpoint, 0.0),
                                   [](const auto& a, const auto& b) { return a.first < b.first; });
        const auto& [m1, d1] = *(it - 1);
        const auto& [m2, d2] = *it;
        if (m2 == m1) return std::max(d1, d2);
        const double w = (midpoint - m1) / (m2 - m1);
        return d1 + w * (d2 - d1);
    }
    }
    return delta_;
}

bool PrecisionRule::admits(const Interval& iv) const {
    if (!(iv.low >= 0.0 && iv.low <= iv.high && iv.high <= 1.0))
        throw std::invalid_argument("admits: not a subinterval of [0,1]");
    return iv.length() <= delta_at(iv.midpoint());
}

double PrecisionRule::reference_delta() const {
    switch (kind_) {
    case Kind::fixed:
    case Kind::sqrt_profile:
    case Kind::left_tail:
        return delta_;
    case Kind::band:
        return inner_;
    case Kind::custom: {
        double best = -1.0;
        for (const auto& [m, d] : table_)
            if (d > 0.0 && (best < 0.0 || d < best)) best = d;
        if (best < 0.0)
            throw std::invalid_argument(
                "custom rule has no positive length; set --epsilon explicitly");
        return best;
    }
    }
    return delta_;
}

PrecisionRule PrecisionRule::scaled(double s) const {
    if (!(s > 0.0)) throw std::invalid_argument("rule scale must be positive");
    switch (kind_) {
    case Kind::fixed:
        return fixed(delta_ * s);
    case Kind::sqrt_profile:
        return sqrt_profile(delta_ * s, m_ref_);
    case Kind::band:
        return band(outer_ * s, inner_ * s, left_cut_, right_cut_);
    case Kind::left_tail:
        return left_tail(delta_ * s, cut_);
    case Kind::custom: {
        auto t = table_;
        for (auto& [m, d] : t) d *= s;
        return custom(std::move(t));
    }
    }
    return *this;
}

namespace {

std::vector<double> parse_numbers(const std::string& args, std::size_t expected,
                                  const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(args);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(std::stod(item));
    if (out.size() != expected)
        throw std::invalid_argument("rule " + what + ": expected " +
                                    std::to_string(expected) + " parameters");
    return out;
}

} // namespace

PrecisionRule PrecisionRule::parse(const std::string& text) {
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);

    if (name == "fixed")
        return fixed(parse_numbers(args, 1, "fixed")[0]);
    if (name == "sqrt") {
        if (args.empty()) return sqrt_profile();
        const auto v = parse_numbers(args, 2, "sqrt");
        return sqrt_profile(v[0], v[1]);
    }
    if (name == "band") {
        if (args.empty()) return band();
        const auto v = parse_numbers(args, 4, "band");
        return band(v[0], v[1], v[2], v[3]);
    }
    if (name == "lefttail") {
        if (args.empty()) return left_tail();
        const auto v = parse_numbers(args, 2, "lefttail");
        return left_tail(v[0], v[1]);
    }
    if (name == "custom") {
        std::ifstream in(args);
        if (!in) throw std::invalid_argument("rule custom: cannot open " + args);
        std::vector<std::pair<double, double>> table;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream row(line);
            double m, d;
            if (row >> m >> d) table.emplace_back(m, d);
        }
        return custom(std::move(table));
    }
    throw std::invalid_argument("unknown rule: " + text);
}

std::string PrecisionRule::describe() const {
    char buf[160];
    switch (kind_) {
    case Kind::fixed:
        std::snprintf(buf, sizeof buf, "fixed:%g", delta_);
        break;
    case Kind::sqrt_profile:
        std::snprintf(buf, sizeof buf, "sqrt:%g,%g", delta_, m_ref_);
        break;
    case Kind::band:
        std::snprintf(buf, sizeof buf, "band:%g,%g,%g,%g", outer_, inner_, left_cut_,
                      right_cut_);
        break;
    case Kind::left_tail:
        std::snprintf(buf, sizeof buf, "lefttail:%g,%g", delta_, cut_);
        break;
    case Kind::custom:
        std::snprintf(buf, sizeof buf, "custom[%zu rows]", table_.size());
        break;
    }
    return buf;
}

} // namespace mcpower
