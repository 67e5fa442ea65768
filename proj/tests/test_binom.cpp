#include <doctest.h>

#include <cmath>

#include "mcpower/binom.hpp"
#include "mcpower/oracle.hpp"

using namespace mcpower;

TEST_CASE("binomial tail edges") {
    CHECK(binom::tail_ge(10, 0, 0.3) == 1.0);
    CHECK(binom::tail_ge(10, -2, 0.3) == 1.0);
    CHECK(binom::tail_ge(10, 11, 0.3) == 0.0);
    CHECK(binom::tail_ge(10, 4, 0.0) == 0.0);
    CHECK(binom::tail_ge(10, 4, 1.0) == 1.0);
    CHECK(binom::cdf_le(10, 10, 0.7) == 1.0);
    CHECK(binom::cdf_le(10, -1, 0.7) == 0.0);
}

TEST_CASE("tail against exact value") {
    // exact rational sum: P[Bin(100, 0.05) >= 20]
    CHECK(binom::tail_ge(100, 20, 0.05) ==
          doctest::Approx(1.0522953420147268e-07).epsilon(1e-9));
}

TEST_CASE("tail matches the oracle route") {
    for (const std::int64_t n : {5, 17, 100, 1000}) {
        for (const double p : {0.01, 0.05, 0.3, 0.5, 0.9}) {
            for (std::int64_t k = 0; k <= n; k += (n > 40 ? n / 13 : 1)) {
                const double a = binom::tail_ge(n, k, p);
                const double b = oracle::binom_tail(n, p, k);
                CHECK(a == doctest::Approx(b).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("incomplete beta identity with binomial tails") {
    // P[Bin(n,p) >= k] = I_p(k, n-k+1)
    for (const std::int64_t n : {10, 137, 2000}) {
        for (const double p : {0.02, 0.05, 0.4, 0.77}) {
            for (std::int64_t k = 1; k <= n; k += std::max<std::int64_t>(1, n / 7)) {
                const double tail = binom::tail_ge(n, k, p);
                const double ib = binom::reg_inc_beta(static_cast<double>(k),
                                                      static_cast<double>(n - k + 1), p);
                CHECK(tail == doctest::Approx(ib).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("incomplete beta inversion round trip") {
    for (const double a : {1.0, 3.5, 40.0, 5000.0}) {
        for (const double b : {1.0, 7.0, 120.0, 5000.0}) {
            for (const double y : {1e-6, 0.005, 0.3, 0.97}) {
                const double x = binom::reg_inc_beta_inv(a, b, y);
                CHECK(binom::reg_inc_beta(a, b, x) == doctest::Approx(y).epsilon(1e-8));
            }
        }
    }
    CHECK(binom::reg_inc_beta_inv(2.0, 3.0, 0.0) == 0.0);
    CHECK(binom::reg_inc_beta_inv(2.0, 3.0, 1.0) == 1.0);
}

TEST_CASE("incomplete beta edges and errors") {
    CHECK(binom::reg_inc_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(binom::reg_inc_beta(2.0, 3.0, 1.0) == 1.0);
    CHECK_THROWS(binom::reg_inc_beta(0.0, 1.0, 0.5));
}
