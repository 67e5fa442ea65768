// Counter-based randomness: every variate is a pure function of
// (root seed, domain, stream id, step), so results do not depend on
// scheduling or worker count.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace mcpower::rng {

// splitmix64 finalizer
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline constexpr std::uint64_t hash4(std::uint64_t seed, std::uint64_t domain,
                                     std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = seed;
    h = mix64(h + kGolden * (domain + 1));
    h = mix64(h + kGolden * (a + 1));
    h = mix64(h + kGolden * (b + 1));
    return h;
}

// 53-bit uniform in [0, 1)
inline constexpr double to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// uniform in (0, 1]; safe as a log argument
inline constexpr double to_unit_pos(std::uint64_t x) {
    return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
}

inline double uniform(std::uint64_t seed, std::uint64_t domain,
                      std::uint64_t a, std::uint64_t b) {
    return to_unit(hash4(seed, domain, a, b));
}

// Per-stream key for the one-mix-per-step bit sequence below.
inline constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t domain,
                                          std::uint64_t id) {
    return hash4(seed, domain, id, 0x5eedb17ULL);
}

// splitmix64 stream: state key + golden*j, finalized. One mix per bit.
inline constexpr std::uint64_t keyed_bits(std::uint64_t key, std::uint64_t j) {
    return mix64(key + kGolden * j);
}

// Stateful engine for variates that need several raw draws (shuffles,
// Box-Muller pairs). Seeded from a counter hash, so it inherits the
// schedule independence of the underlying mapping.
class CounterEngine {
public:
    explicit CounterEngine(std::uint64_t key) : key_(key), ctr_(0) {}

    std::uint64_t next() { return mix64(key_ + kGolden * (++ctr_)); }

    double next_unit() { return to_unit(next()); }
    double next_unit_pos() { return to_unit_pos(next()); }

    // integer in [0, n), floor method; bias is O(n / 2^64)
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    double normal() {
        double u1 = next_unit_pos();
        double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t key_;
    std::uint64_t ctr_;
};

// Domain separation tags.
enum class Domain : std::uint64_t {
    main_data = 1,
    main_bits = 2,
    pilot_data = 3,
    pilot_bits = 4,
    plan = 5,
};

inline constexpr std::uint64_t tag(Domain d) { return static_cast<std::uint64_t>(d); }

} // namespace mcpower::rng
