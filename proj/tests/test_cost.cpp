#include "breachcat/cost.hpp"
#include "breachcat/errors.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace breachcat;

TEST_CASE("cost kinds round trip")
{
    for (auto k : {CostKind::FlatModerate, CostKind::PowerJacobs, CostKind::PowerRomanosky, CostKind::FlatLarge,
                   CostKind::FlatExtremeBand})
        CHECK(cost_kind_from_string(to_string(k)) == k);
    CHECK_THROWS(cost_kind_from_string("bogus"));
}

TEST_CASE("per-event costs")
{
    CHECK(event_cost(1e4, CostModel::flat_moderate()).high == Catch::Approx(1.48e6));
    CHECK(event_cost(1e4, CostModel::power_jacobs()).high == Catch::Approx(1.48e6));
    CHECK(event_cost(5e6, CostModel::power_romanosky()).high == Catch::Approx(5e6));
    const auto band = event_cost(1e8, CostModel::extreme_band());
    CHECK(band.low == Catch::Approx(1e8));
    CHECK(band.high == Catch::Approx(5e8));
    CHECK(event_cost(2e5, CostModel::flat_large()).high == Catch::Approx(1e6));

    CHECK(event_cost(1e5, CostModel::flat_moderate()).warnings.empty());
    CHECK_FALSE(event_cost(1e6, CostModel::flat_moderate()).warnings.empty());
    CHECK_THROWS_AS(event_cost(0.5, CostModel::flat_moderate()), PreconditionError);
}

TEST_CASE("power costs are increasing and sublinear")
{
    for (const auto& m : {CostModel::power_jacobs(), CostModel::power_romanosky()}) {
        double prev_cost = 0.0, prev_rate = INFINITY;
        for (double s = 10.0; s <= 1e9; s *= 10.0) {
            const double c = event_cost(s, m).high;
            CHECK(c > prev_cost);
            CHECK(c / s < prev_rate);
            prev_cost = c;
            prev_rate = c / s;
        }
        CHECK(event_cost(1e6, m).high / event_cost(1e5, m).high == Catch::Approx(std::pow(10.0, m.exponent)));
    }
}

TEST_CASE("annual extrapolation")
{
    const double v = annual_cost_extrapolation(0.28, 109000, 1e4, 150);
    CHECK(v == Catch::Approx(45.78e9));
    CHECK(v >= 40e9);
    CHECK(v <= 46e9);
    CHECK(annual_cost_extrapolation(0.5, 10, 100, 2) == Catch::Approx(1000.0));
    CHECK_THROWS_AS(annual_cost_extrapolation(0.0, 10, 100, 2), PreconditionError);
    CHECK_THROWS_AS(annual_cost_extrapolation(1.5, 10, 100, 2), PreconditionError);
    CHECK_THROWS_AS(annual_cost_extrapolation(0.5, -1, 100, 2), PreconditionError);
}

TEST_CASE("historical large-breach cost")
{
    auto ev = [](int y, std::uint64_t ids) {
        EventRecord e;
        e.event_date = Date::from_ymd(y, 3, 1);
        e.ids = ids;
        return e;
    };
    const std::vector<EventRecord> events{ev(2010, 200000), ev(2016, 300000), ev(2015, 50000), ev(2016, 0)};
    const auto h = historical_large_cost(events, 100000, 5.0);
    CHECK(h.n_events == 2);
    CHECK(h.total == Catch::Approx(2.5e6));
    CHECK(h.trailing_total == Catch::Approx(1.5e6));
    CHECK(h.trailing_share == Catch::Approx(0.6));
    CHECK(h.trailing_per_year == Catch::Approx(3e5));

    const auto empty = historical_large_cost({}, 100000, 5.0);
    CHECK(empty.total == 0.0);
    CHECK(empty.n_events == 0);
    CHECK_FALSE(empty.trailing_window);
    CHECK_THROWS_AS(historical_large_cost(events, 0, 5.0), PreconditionError);
}
