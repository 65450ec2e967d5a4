#include <doctest.h>

#include <set>

#include "mhdeep/errors.hpp"
#include "mhdeep/sensors.hpp"

using namespace mhdeep;

TEST_SUITE("sensors") {

TEST_CASE("per-sensor window dims match the rate table") {
    // 15 s of each stream, flattened: rate * 15 * channels.
    CHECK(sensor_window_dims(SensorId::GSR) == 60);
    CHECK(sensor_window_dims(SensorId::ST) == 60);
    CHECK(sensor_window_dims(SensorId::IBI) == 15);
    CHECK(sensor_window_dims(SensorId::AccW) == 1440);
    CHECK(sensor_window_dims(SensorId::Temp) == 75);
    CHECK(sensor_window_dims(SensorId::Grav) == 225);
    CHECK(sensor_window_dims(SensorId::AccP) == 225);
    CHECK(sensor_window_dims(SensorId::Vel) == 225);
}

TEST_CASE("feature dimension identity") {
    CHECK(category_dims(CategorySet::all()) == 2325);
    CHECK(category_dims(watch_categories()) == 1575);
    CHECK(category_dims(phone_categories()) == 750);
    CHECK(category_dims(watch_categories()) + category_dims(phone_categories()) ==
          category_dims(CategorySet::all()));

    // Same totals derived straight from the rate table, independent of the
    // per-sensor helper.
    int total = 0, watch = 0, phone = 0;
    for (const auto& s : kSensors) {
        const int d = s.rate_hz * 15 * s.channels;
        total += d;
        (s.source == Source::Watch ? watch : phone) += d;
    }
    CHECK(total == 2325);
    CHECK(watch == 1575);
    CHECK(phone == 750);
}

TEST_CASE("subset dims") {
    const auto cats = CategorySet::of(
        {SensorId::AccP, SensorId::Temp, SensorId::Vel, SensorId::AccW, SensorId::GSR});
    CHECK(category_dims(cats) == 2025);  // 225+75+225+1440+60
    CHECK(category_dims(CategorySet::of({SensorId::IBI})) == 15);
    CHECK_THROWS_AS(category_dims(CategorySet{}), ConfigError);
}

TEST_CASE("category set parsing") {
    CHECK(CategorySet::parse("255") == CategorySet::all());
    CHECK(CategorySet::parse("1") == CategorySet::of({SensorId::GSR}));
    CHECK(CategorySet::parse("GSR,AccW") == CategorySet::of({SensorId::GSR, SensorId::AccW}));
    CHECK(CategorySet::parse(" Temp , Vel ") == CategorySet::of({SensorId::Temp, SensorId::Vel}));
    CHECK_THROWS_AS(CategorySet::parse("Foo"), ConfigError);
    CHECK_THROWS_AS(CategorySet::parse("256"), ConfigError);
    CHECK_THROWS_AS(CategorySet::parse(""), ConfigError);

    // round trip through the canonical string form
    for (unsigned bits = 1; bits <= 255; ++bits) {
        const auto set = CategorySet::from_bits(bits);
        CHECK(CategorySet::parse(set.to_string()) == set);
    }
}

TEST_CASE("canonical ordering") {
    const auto v = CategorySet::all().to_vector();
    REQUIRE(v.size() == 8);
    CHECK(v.front() == SensorId::GSR);
    CHECK(v.back() == SensorId::Vel);
    std::set<int> offsets;
    for (const auto& s : kSensors) offsets.insert(channel_offset(s.id));
    CHECK(offsets.size() == 8);
    CHECK(*offsets.begin() == 0);
}

}  // TEST_SUITE
