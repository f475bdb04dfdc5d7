#include <cmath>

#include "doctest.h"
#include "dsnav/csv.hpp"
#include "dsnav/epoch.hpp"
#include "dsnav/errors.hpp"
#include "dsnav/rng.hpp"

using namespace dsnav;

TEST_CASE("rng: streams are deterministic and distinct") {
    Rng a(12345), b(12345), c(54321);
    for (int i = 0; i < 100; ++i) {
        const std::uint64_t va = a.next_u64();
        CHECK(va == b.next_u64());
        CHECK(va != c.next_u64());
    }
    Rng s0 = Rng::for_stream(7, 0);
    Rng s1 = Rng::for_stream(7, 1);
    CHECK(s0.next_u64() != s1.next_u64());
}

TEST_CASE("rng: gaussian moments look sane") {
    Rng rng(2718);
    const int n = 200000;
    double mean = 0.0, m2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian();
        mean += g;
        m2 += g * g;
    }
    mean /= n;
    const double var = m2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("iso8601 parsing: differences give calendar-correct spans") {
    const double t0 = iso8601_to_seconds("2020-01-20T00:00:00");
    CHECK(iso8601_to_seconds("2020-01-21T00:00:00") - t0 == 86400.0);
    CHECK(iso8601_to_seconds("2020-01-20T12:30:15") - t0 == 45015.0);
    CHECK(iso8601_to_seconds("2020-01-20") == t0);
    CHECK(iso8601_to_seconds("2020-03-01") - iso8601_to_seconds("2020-02-28") == 2 * 86400.0);  // leap year
    CHECK(iso8601_to_seconds("2021-03-01") - iso8601_to_seconds("2021-02-28") == 86400.0);
    CHECK(iso8601_to_seconds("2020-01-20T00:00:00.5") - t0 == 0.5);
    CHECK_THROWS_AS(iso8601_to_seconds("2020/01/20"), ConfigError);
    CHECK_THROWS_AS(iso8601_to_seconds("2020-13-01"), ConfigError);
    CHECK_THROWS_AS(iso8601_to_seconds("2020-01-20T25:00:00"), ConfigError);
}

TEST_CASE("csv doubles round-trip bit-exactly") {
    Rng rng(1);
    for (int i = 0; i < 2000; ++i) {
        double v;
        if (i % 5 == 0) {
            v = (rng.uniform() - 0.5) * std::pow(10.0, -300.0 + 600.0 * rng.uniform());
        } else {
            v = (rng.uniform() - 0.5) * std::pow(10.0, -12.0 + 24.0 * rng.uniform());
        }
        CHECK(parse_double(format_double(v)) == v);
    }
    CHECK(parse_double(format_double(0.0)) == 0.0);
    CHECK(format_double(1.0) == "1");
    CHECK_THROWS_AS(parse_double("1.2.3"), IoError);
    CHECK_THROWS_AS(parse_double(""), IoError);
}

TEST_CASE("csv line splitting keeps empty fields") {
    const auto fields = split_csv_line("a,,1.5,phase:x");
    REQUIRE(fields.size() == 4);
    CHECK(fields[0] == "a");
    CHECK(fields[1].empty());
    CHECK(fields[3] == "phase:x");
}
