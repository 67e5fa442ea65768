#include <doctest.h>

#include <cmath>

#include "mcpower/spending.hpp"

using namespace mcpower;

TEST_CASE("epsilon_at ratio form") {
    SpendingSchedule s{1e-4, 1000};
    CHECK(s.epsilon_at(0) == 0.0);
    CHECK(s.epsilon_at(1000) == doctest::Approx(5e-5).epsilon(1e-12));
    CHECK(s.epsilon_at(1'000'000'000) == doctest::Approx(1e-4).epsilon(1e-6));
    CHECK(s.epsilon_at(5) < 1e-4);
    CHECK_THROWS(s.epsilon_at(-1));
}

TEST_CASE("epsilon_at monotone and below the limit") {
    SpendingSchedule s{0.25, 1000};
    double prev = 0.0;
    for (std::int64_t t = 0; t <= 1'000'000; t += (t < 2000 ? 1 : 997)) {
        const double e = s.epsilon_at(t);
        CHECK(e >= prev);
        CHECK(e < 0.25);
        prev = e;
    }
}

TEST_CASE("increment bound with the schedule-reported constants") {
    // eps_t - eps_{t-1} = eps*h/((h+t)(h+t-1)) >= (eps*h/4) t^-q from t = h on.
    for (const double eps : {1e-4, 0.01, 0.25}) {
        SpendingSchedule s{eps, 1000};
        const double lambda = s.reported_lambda();
        const double q = s.reported_q();
        const std::int64_t T = s.reported_T();
        CHECK(lambda == doctest::Approx(eps * 1000 / 4.0));
        for (std::int64_t t = T; t <= 1'000'000; t += (t < 5000 ? 1 : 991)) {
            const double inc = s.epsilon_at(t) - s.epsilon_at(t - 1);
            const double bound = lambda * std::pow(static_cast<double>(t), -q);
            CHECK(inc >= bound * (1.0 - 1e-9));
        }
    }
}

TEST_CASE("schedule validation") {
    CHECK_THROWS(SpendingSchedule{0.0, 1000}.validate());
    CHECK_THROWS(SpendingSchedule{1.0, 1000}.validate());
    CHECK_THROWS(SpendingSchedule{0.1, 0}.validate());
}

TEST_CASE("joint spending checkpoints") {
    JointSpendingSchedule j{0.001, 200000, 20};
    CHECK(j.xi_cumulative_at_checkpoint(1) == doctest::Approx(0.001 / 21.0).epsilon(1e-12));
    CHECK(j.xi_cumulative_at_checkpoint(20) == doctest::Approx(5e-4).epsilon(1e-12));
    CHECK(j.xi_cumulative_at_checkpoint(2'000'000'000) ==
          doctest::Approx(0.001).epsilon(1e-6));

    double cum = 0.0;
    double prev = 0.0;
    for (std::int64_t i = 1; i <= 500; ++i) {
        const double c = j.xi_cumulative_at_checkpoint(i);
        CHECK(c >= prev);
        CHECK(c <= 0.001 + 1e-15);
        cum += j.xi_at_checkpoint(i);
        CHECK(cum == doctest::Approx(c).epsilon(1e-10));
        prev = c;
    }

    CHECK(j.checkpoint_time(3) == 600000);
    CHECK(j.is_checkpoint(200000));
    CHECK(j.is_checkpoint(400000));
    CHECK_FALSE(j.is_checkpoint(200001));
    CHECK_FALSE(j.is_checkpoint(0));
}
