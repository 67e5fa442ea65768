// Conservative confidence intervals for the power: exact Clopper-Pearson,
// the epsilon-inflated interval for resolved streams, and the union
// interval over the possible outcomes of unresolved streams.
#pragma once

#include <cstdint>
#include <vector>

namespace mcpower {

struct Interval {
    double low = 0.0;
    double high = 1.0;

    double length() const { return high - low; }
    double midpoint() const { return 0.5 * (low + high); }
    bool contains(double x) const { return low <= x && x <= high; }
};

// Equal-tailed exact binomial interval with coverage >= 1-gamma for r
// successes in n trials. Endpoints accurate to better than 1e-10.
Interval clopper_pearson(std::int64_t r, std::int64_t n, double gamma);

// Clopper-Pearson for r positives out of r+a resolved streams, mapped
// through the per-stream error bound epsilon:
//   [ (b- - eps)/(1-eps), b+/(1-eps) ]  clipped to [0,1].
Interval interval_infty(std::int64_t r, std::int64_t a, double gamma, double epsilon);

// Union over all resolutions of u outstanding streams; by endpoint
// monotonicity in r this equals the hull
//   [ low of interval_infty(r, a+u), high of interval_infty(r+u, a) ].
Interval interval_union(std::int64_t r, std::int64_t a, std::int64_t u,
                        double gamma, double epsilon);

struct IntersectResult {
    Interval box;
    bool empty = false; // the two intervals were disjoint
};

// Set intersection of two subintervals of [0,1]. A disjoint pair is a
// joint-error event; it is reported as a zero-length interval at the
// midpoint of the gap, flagged.
IntersectResult intersect_with_pilot(Interval main, Interval pilot);

// Interval state at one instant of a run.
struct CiState {
    std::int64_t positives = 0;
    std::int64_t negatives = 0;
    std::int64_t unresolved = 0;
    double gamma = 0.0;
    double epsilon = 0.0;
    Interval interval;
};

CiState make_ci_state(std::int64_t r, std::int64_t a, std::int64_t u,
                      double gamma, double epsilon);

// Memoized Clopper-Pearson endpoints at fixed (n, gamma). A run keeps
// n = r + a + u constant, so the hull endpoints repeat heavily.
class CpCache {
public:
    CpCache(std::int64_t n, double gamma);

    double low(std::int64_t r);
    double high(std::int64_t r);

    Interval union_interval(std::int64_t r, std::int64_t a, std::int64_t u,
                            double epsilon);

    std::int64_t n() const { return n_; }
    double gamma() const { return gamma_; }

private:
    std::int64_t n_;
    double gamma_;
    std::vector<double> low_;
    std::vector<double> high_;
};

} // namespace mcpower
