#include <doctest.h>

#include "gridsr/grid.hpp"

using namespace gridsr;

TEST_CASE("season assignment follows the meteorological calendar") {
    CHECK(season_of(parse_time("2020-01-13T00:00")) == Season::DJF);
    CHECK(season_of(parse_time("2020-02-03T12:00")) == Season::DJF);
    CHECK(season_of(parse_time("2019-09-01T00:00")) == Season::SON);
    CHECK(season_of(parse_time("2019-12-31T21:00")) == Season::DJF);
    CHECK(season_of(parse_time("1995-03-01T00:00")) == Season::MAM);
    CHECK(season_of(parse_time("1995-06-30T18:00")) == Season::JJA);
    CHECK(season_of(parse_time("1995-11-30T18:00")) == Season::SON);
}

TEST_CASE("every timestamp maps to exactly one season") {
    TimeStamp t = parse_time("1999-01-01T00:00");
    for (int k = 0; k < 365 * 8; ++k) {
        const Season s = season_of(t);
        int hits = 0;
        for (Season c : {Season::DJF, Season::MAM, Season::JJA, Season::SON})
            if (c == s) ++hits;
        REQUIRE(hits == 1);
        t += kTimeStepSeconds;
    }
}

TEST_CASE("split assignment uses the configured year ranges") {
    TimeSplit split; // 1985-2013 / 2014-2018 / 2019-2020
    split.validate();
    CHECK(split.assign(parse_time("1985-01-01T00:00")) == SplitLabel::Train);
    CHECK(split.assign(parse_time("2013-12-31T21:00")) == SplitLabel::Train);
    CHECK(split.assign(parse_time("2014-06-01T00:00")) == SplitLabel::Validation);
    CHECK(split.assign(parse_time("2020-07-01T00:00")) == SplitLabel::Test);
    CHECK_THROWS_AS(split.assign(parse_time("1984-12-31T21:00")), ConfigError);
    CHECK_THROWS_AS(split.assign(parse_time("2021-01-01T00:00")), ConfigError);
}

TEST_CASE("split ranges must be disjoint and ordered") {
    TimeSplit bad;
    bad.validation_start = 2010; // overlaps train
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("time parsing and formatting round-trip") {
    for (const char* iso : {"2020-01-13T00:00Z", "1985-01-01T03:00Z", "2013-12-31T21:00Z"}) {
        const TimeStamp t = parse_time(iso);
        CHECK(format_time(t) == iso);
        CHECK(on_time_grid(t));
    }
    CHECK_FALSE(on_time_grid(parse_time("2020-01-13T01:00")));
    CHECK_THROWS_AS(parse_time("not-a-time"), ConfigError);
}

TEST_CASE("grid index to coordinate round-trip is the identity") {
    GridSpec g{47.0, -6.0, -0.05, 0.05, 200, 320};
    g.validate();
    for (int i = 0; i < g.n_lat; i += 7)
        for (int j = 0; j < g.n_lon; j += 11) {
            CHECK(g.nearest_lat_index(g.lat_of(i)) == i);
            CHECK(g.nearest_lon_index(g.lon_of(j)) == j);
        }
}

TEST_CASE("grid validation rejects degenerate specs") {
    GridSpec g;
    g.n_lat = 0;
    CHECK_THROWS_AS(g.validate(), GeometryError);
    GridSpec h{0, 0, 0.0, 1.0, 4, 4};
    CHECK_THROWS_AS(h.validate(), GeometryError);
}

TEST_CASE("alignment covers nested block-mean grids") {
    GridSpec hr{45.0, -6.0, -0.05, 0.05, 80, 80};
    GridSpec lr{45.0 + 1.5 * -0.05, -6.0 + 1.5 * 0.05, -0.2, 0.2, 20, 20};
    CHECK(aligned(hr, lr));
    CHECK(covers(lr, hr));

    GridSpec far{10.0, 100.0, -0.05, 0.05, 10, 10};
    CHECK_FALSE(aligned(hr, far));
}

TEST_CASE("field validation enforces shape, time grid, and finiteness") {
    GridSpec g{45.0, -6.0, -0.05, 0.05, 4, 4};
    Field f(g, parse_time("2000-01-01T00:00"));
    f.validate();

    Field wrong = f;
    wrong.values.pop_back();
    CHECK_THROWS_AS(wrong.validate(), ShapeError);

    Field offgrid = f;
    offgrid.time += 3600;
    CHECK_THROWS_AS(offgrid.validate(), IngestError);

    Field nan = f;
    nan.values[5] = std::nan("");
    CHECK_THROWS_AS(nan.validate(), IngestError);
}

TEST_CASE("covariates validate land-sea range and shared grids") {
    GridSpec g{45.0, -6.0, -0.05, 0.05, 8, 8};
    StaticCovariates cov;
    cov.lr_orography = Field(g, 0);
    cov.lr_landsea = Field(g, 0, 0.5);
    cov.hr_orography = Field(g, 0);
    cov.hr_landsea = Field(g, 0, 0.5);
    cov.validate();
    cov.hr_landsea.values[0] = 1.5;
    CHECK_THROWS_AS(cov.validate(), DomainError);
}
