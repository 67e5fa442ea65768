// Stopping-precision rules: the set of confidence intervals that allow
// the run to stop, encoded as a maximum length as a function of the
// interval midpoint. admits() and delta_at() share one code path, so
// "interval admitted" and "length <= delta_at(midpoint)" agree exactly,
// boundary cases included.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mcpower/interval.hpp"

namespace mcpower {

class PrecisionRule {
public:
    enum class Kind { fixed, sqrt_profile, band, left_tail, custom };

    static PrecisionRule fixed(double delta);
    // delta_ref * sqrt(M(1-M)) / sqrt(m_ref(1-m_ref))
    static PrecisionRule sqrt_profile(double delta_ref = 0.02, double m_ref = 0.05);
    // inner length everywhere; outer length once the interval clears the cuts
    static PrecisionRule band(double outer = 0.1, double inner = 0.02,
                              double left_cut = 0.05, double right_cut = 0.95);
    // any interval clear of the cut; inner length otherwise
    static PrecisionRule left_tail(double delta = 0.02, double cut = 0.05);
    // piecewise-linear max length over midpoints; entries sorted by midpoint
    static PrecisionRule custom(std::vector<std::pair<double, double>> table);

    // Grammar: fixed:D | sqrt | sqrt:D,MREF | band:OUT,IN,LC,RC |
    //          lefttail:D,CUT | custom:<path to two-column table>
    static PrecisionRule parse(const std::string& text);

    double delta_at(double midpoint) const;
    bool admits(const Interval& iv) const;

    // Tightest length the rule can demand; basis for the default epsilon.
    double reference_delta() const;

    // Same rule with every length constant multiplied by s (cuts unchanged).
    PrecisionRule scaled(double s) const;

    Kind kind() const { return kind_; }
    std::string describe() const;

    // Non-fatal validation notes (e.g. a custom table that fails the
    // shrink-monotonicity grid check).
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    PrecisionRule() = default;

    Kind kind_ = Kind::fixed;
    double delta_ = 0.02;
    double m_ref_ = 0.05;
    double outer_ = 0.1, inner_ = 0.02, left_cut_ = 0.05, right_cut_ = 0.95;
    double cut_ = 0.05;
    std::vector<std::pair<double, double>> table_;
    std::vector<std::string> warnings_;
};

} // namespace mcpower
