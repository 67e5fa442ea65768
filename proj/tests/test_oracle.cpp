#include <doctest.h>

#include <cmath>

#include "mcpower/boundary.hpp"
#include "mcpower/oracle.hpp"
#include "mcpower/verify.hpp"

using namespace mcpower;

TEST_CASE("crossing probabilities at degenerate p") {
    SpendingSchedule sched{0.01, 50};
    BoundaryTable table(0.05, sched);
    table.extend_to(1000);

    const auto ones = oracle::crossing_probs(1.0, table.lower_seq(), table.upper_seq(),
                                             1000);
    std::int64_t first_ut = 0;
    for (std::int64_t t = 1; t <= 1000; ++t)
        if (table.upper(t) <= t) { first_ut = t; break; }
    for (std::int64_t t = 1; t <= 1000; ++t) {
        CHECK(ones.lower_by_t[static_cast<std::size_t>(t)] == 0.0);
        CHECK(ones.upper_by_t[static_cast<std::size_t>(t)] ==
              (t >= first_ut ? 1.0 : 0.0));
    }

    const auto zeros = oracle::crossing_probs(0.0, table.lower_seq(), table.upper_seq(),
                                              1000);
    std::int64_t first_l0 = 0;
    for (std::int64_t t = 1; t <= 1000; ++t)
        if (table.lower(t) >= 0) { first_l0 = t; break; }
    for (std::int64_t t = 1; t <= 1000; ++t) {
        CHECK(zeros.upper_by_t[static_cast<std::size_t>(t)] == 0.0);
        CHECK(zeros.lower_by_t[static_cast<std::size_t>(t)] ==
              (t >= first_l0 ? 1.0 : 0.0));
    }
}

TEST_CASE("mass conservation in the DP") {
    SpendingSchedule sched{1e-4, 1000};
    BoundaryTable table(0.05, sched);
    table.extend_to(800);
    const auto dp = oracle::crossing_probs(0.07, table.lower_seq(), table.upper_seq(),
                                           800);
    double alive = 0.0;
    for (const double m : dp.alive) alive += m;
    CHECK(alive + dp.upper_by_t[800] + dp.lower_by_t[800] ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("path enumeration agrees with the DP") {
    SpendingSchedule sched{0.2, 5}; // sharp schedule: truncation bites early
    BoundaryTable table(0.05, sched);
    table.extend_to(12);

    for (const double p : {0.05, 0.3}) {
        const auto en = oracle::enumerate_conditional(p, table.lower_seq(),
                                                      table.upper_seq(), 12);
        const auto dp = oracle::crossing_probs(p, table.lower_seq(), table.upper_seq(),
                                               12);
        double alive = 0.0;
        for (const double m : dp.alive) alive += m;
        REQUIRE(en.min_s == dp.alive_min_s);
        REQUIRE(en.pmf.size() == dp.alive.size());
        for (std::size_t i = 0; i < en.pmf.size(); ++i)
            CHECK(en.pmf[i] == doctest::Approx(dp.alive[i] / alive).epsilon(1e-12));
    }
}

TEST_CASE("enumeration at t=1 is the Bernoulli law") {
    SpendingSchedule sched{1e-4, 1000};
    BoundaryTable table(0.05, sched);
    table.extend_to(1);
    const auto en = oracle::enumerate_conditional(0.3, table.lower_seq(),
                                                  table.upper_seq(), 1);
    REQUIRE(en.pmf.size() == 2);
    CHECK(en.pmf[0] == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(en.pmf[1] == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("enumeration matches the production conditional law at p = alpha") {
    SpendingSchedule sched{0.2, 5};
    BoundaryTable table(0.05, sched);
    table.extend_to(15);
    const auto en = oracle::enumerate_conditional(0.05, table.lower_seq(),
                                                  table.upper_seq(), 15);
    const auto& alive = table.alive_dist(15);
    REQUIRE(en.min_s == alive.min_s);
    REQUIRE(en.pmf.size() == alive.mass.size());
    for (std::size_t i = 0; i < en.pmf.size(); ++i)
        CHECK(en.pmf[i] ==
              doctest::Approx(alive.mass[i] / alive.total).epsilon(1e-10));
}

TEST_CASE("binom_tail edges and spot value") {
    CHECK(oracle::binom_tail(10, 0.3, 0) == 1.0);
    CHECK(oracle::binom_tail(10, 0.3, 11) == 0.0);
    CHECK(oracle::binom_tail(100, 0.05, 20) ==
          doctest::Approx(1.0522953420147268e-07).epsilon(1e-9));
}

TEST_CASE("uniform p-value survival decays like the heavy-tail bound") {
    const auto res = verify::check_survival_slope(0.05, SpendingSchedule{1e-4, 1000},
                                                  100000, 100000, 17, -0.4);
    CHECK_MESSAGE(res.pass, res.detail);
}

TEST_CASE("union members enumerate all outcomes") {
    const auto members = oracle::union_members(2, 3, 4, 0.05, 0.0);
    REQUIRE(members.size() == 5);
    for (std::size_t i = 0; i + 1 < members.size(); ++i) {
        CHECK(members[i].low <= members[i + 1].low);
        CHECK(members[i].high <= members[i + 1].high);
    }
}
