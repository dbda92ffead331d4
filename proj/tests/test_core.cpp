#include <doctest.h>

#include <sstream>

#include "caprisk/core.hpp"
#include "caprisk/rng.hpp"
#include "test_util.hpp"

using namespace caprisk;
using caprisk::test::make_series;
using caprisk::test::make_series_at;

TEST_CASE("csv ingestion maps rows to one series per system") {
    std::istringstream in("system_id,day_index,used_fraction,total_capacity\n"
                          "s1,0,0.50,1000\n"
                          "s1,1,0.51,1000\n");
    const auto fleet = parse_csv(in);
    REQUIRE(fleet.size() == 1);
    CHECK(fleet[0].system_id == "s1");
    REQUIRE(fleet[0].observations.size() == 2);
    CHECK(fleet[0].observations[0].day == 0);
    CHECK(fleet[0].observations[0].used == 0.50);
    CHECK(fleet[0].observations[1].used == 0.51);
    CHECK(fleet[0].total_capacity == 1000.0);
}

TEST_CASE("header-only input yields an empty fleet") {
    std::istringstream in("system_id,day_index,used_fraction,total_capacity\n");
    CHECK(parse_csv(in).empty());
}

TEST_CASE("out-of-range fractions are validation errors") {
    std::istringstream in("system_id,day_index,used_fraction,total_capacity\n"
                          "s1,2,1.20,1000\n");
    CHECK_THROWS_AS(parse_csv(in), ValidationError);

    std::istringstream neg("system_id,day_index,used_fraction,total_capacity\n"
                           "s1,2,-0.20,1000\n");
    CHECK_THROWS_AS(parse_csv(neg), ValidationError);

    std::istringstream total("system_id,day_index,used_fraction,total_capacity\n"
                             "s1,2,0.20,0\n");
    CHECK_THROWS_AS(parse_csv(total), ValidationError);
}

TEST_CASE("malformed rows raise parse errors naming the row") {
    std::istringstream in("system_id,day_index,used_fraction,total_capacity\n"
                          "s1,0,0.5,1000\n"
                          "s1,not_a_day,0.5,1000\n");
    try {
        parse_csv(in);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }

    std::istringstream missing("system_id,day_index,used_fraction,total_capacity\n"
                               "s1,0,0.5\n");
    CHECK_THROWS_AS(parse_csv(missing), ParseError);

    std::istringstream header("not,the,right,header\n");
    CHECK_THROWS_AS(parse_csv(header), ParseError);

    std::istringstream empty("");
    CHECK_THROWS_AS(parse_csv(empty), ParseError);
}

TEST_CASE("duplicate (system, day) pairs are rejected") {
    std::istringstream in("system_id,day_index,used_fraction,total_capacity\n"
                          "s1,4,0.5,1000\n"
                          "s1,4,0.6,1000\n");
    CHECK_THROWS_AS(parse_csv(in), ValidationError);
}

TEST_CASE("changing total capacity mid-system is rejected") {
    std::istringstream in("system_id,day_index,used_fraction,total_capacity\n"
                          "s1,0,0.5,1000\n"
                          "s1,1,0.5,2000\n");
    CHECK_THROWS_AS(parse_csv(in), ValidationError);
}

TEST_CASE("observations come back sorted by day regardless of row order") {
    std::istringstream in("system_id,day_index,used_fraction,total_capacity\n"
                          "s1,5,0.52,1000\n"
                          "s1,1,0.50,1000\n"
                          "s1,3,0.51,1000\n");
    const auto fleet = parse_csv(in);
    REQUIRE(fleet.size() == 1);
    REQUIRE(fleet[0].observations.size() == 3);
    CHECK(fleet[0].observations[0].day == 1);
    CHECK(fleet[0].observations[1].day == 3);
    CHECK(fleet[0].observations[2].day == 5);
}

TEST_CASE("headroom is one minus the most recent used fraction") {
    CHECK(headroom(make_series("a", {0.10, 0.88})).y == doctest::Approx(0.12).epsilon(1e-12));
    CHECK(headroom(make_series("b", {1.00})).y == 0.0);
    CHECK(headroom(make_series("c", {0.50})).y == 0.50);
    CHECK_THROWS_AS(headroom(make_series("d", {})), InsufficientDataError);
}

TEST_CASE("headroom plus last used is exactly one") {
    SequentialRng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const double used = rng.next_u01();
        const CapacitySeries s = make_series("p", {0.1, used});
        CHECK(headroom(s).y + s.observations.back().used == 1.0);
    }
}

TEST_CASE("emit then ingest round-trips a fleet exactly") {
    SequentialRng rng(17);
    std::vector<CapacitySeries> fleet;
    for (int k = 0; k < 20; ++k) {
        CapacitySeries s;
        s.system_id = "sys" + std::to_string(k);
        s.total_capacity = 1.0 + 999.0 * rng.next_u01();
        std::int64_t day = static_cast<std::int64_t>(rng.uniform_index(5));
        const int n = 2 + static_cast<int>(rng.uniform_index(40));
        for (int i = 0; i < n; ++i) {
            s.observations.push_back({day, rng.next_u01()});
            day += 1 + static_cast<std::int64_t>(rng.uniform_index(3));
        }
        fleet.push_back(std::move(s));
    }
    std::ostringstream out;
    emit_csv(out, fleet);
    std::istringstream in(out.str());
    const auto round_tripped = parse_csv(in);
    REQUIRE(round_tripped.size() == fleet.size());
    for (const CapacitySeries& original : fleet) {
        const auto it = std::find_if(round_tripped.begin(), round_tripped.end(),
                                     [&](const CapacitySeries& s) {
                                         return s.system_id == original.system_id;
                                     });
        REQUIRE(it != round_tripped.end());
        CHECK(*it == original);
    }
}

TEST_CASE("latest daily run stops at the first gap") {
    const CapacitySeries gapped =
        make_series_at("g", {0, 1, 2, 5, 6, 7, 8}, {0.1, 0.1, 0.1, 0.2, 0.2, 0.2, 0.2});
    const auto run = latest_daily_run(gapped);
    REQUIRE(run.size() == 4);
    CHECK(run.front().day == 5);
    CHECK(run.back().day == 8);

    const CapacitySeries solo = make_series("s", {0.5});
    CHECK(latest_daily_run(solo).size() == 1);
    CHECK(latest_daily_run(make_series("e", {})).empty());
}

TEST_CASE("validate_series enforces the documented invariants") {
    CapacitySeries bad_order = make_series("x", {0.1, 0.2});
    bad_order.observations[1].day = 0;
    CHECK_THROWS_AS(validate_series(bad_order), ValidationError);

    CapacitySeries bad_total = make_series("x", {0.1});
    bad_total.total_capacity = 0.0;
    CHECK_THROWS_AS(validate_series(bad_total), ValidationError);

    CapacitySeries bad_used = make_series("x", {0.1});
    bad_used.observations[0].used = 1.5;
    CHECK_THROWS_AS(validate_series(bad_used), ValidationError);

    CHECK_NOTHROW(validate_series(make_series("ok", {0.0, 0.5, 1.0})));
}
