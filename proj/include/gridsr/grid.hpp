#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gridsr/common.hpp"

namespace gridsr {

//============================================================================
// Time
//
// Timestamps are UTC seconds since the Unix epoch, restricted to the 3-hour
// grid (00Z, 03Z, ...). Sub-3-hourly times are rejected at ingestion.
//============================================================================

using TimeStamp = std::int64_t; // seconds since 1970-01-01T00:00Z

inline constexpr std::int64_t kSecondsPerHour = 3600;
inline constexpr std::int64_t kTimeStepSeconds = 3 * kSecondsPerHour;

struct CivilDate {
    int year;
    int month;  // 1..12
    int day;    // 1..31
    int hour;   // 0..23
    int minute; // 0..59
};

// Howard Hinnant's civil calendar algorithms.
std::int64_t days_from_civil(int y, int m, int d);
CivilDate civil_from_time(TimeStamp t);
TimeStamp time_from_civil(const CivilDate& d);

// Parses "2020-01-13T00:00Z", "2020-01-13T00Z" or "2020-01-13".
TimeStamp parse_time(const std::string& iso);
std::string format_time(TimeStamp t);

inline bool on_time_grid(TimeStamp t) { return t % kTimeStepSeconds == 0; }
inline int year_of(TimeStamp t) { return civil_from_time(t).year; }

enum class Season { DJF, MAM, JJA, SON };

Season season_of(TimeStamp t);
const char* season_name(Season s);

enum class SplitLabel { Train, Validation, Test };
const char* split_name(SplitLabel s);

// Inclusive year ranges; disjoint and ordered train < validation < test.
struct TimeSplit {
    int train_start = 1985, train_end = 2013;
    int validation_start = 2014, validation_end = 2018;
    int test_start = 2019, test_end = 2020;

    void validate() const;
    SplitLabel assign(TimeStamp t) const;
    bool contains(TimeStamp t) const;
};

//============================================================================
// Grids
//============================================================================

// Regular lat-lon grid. Cell center of index (i, j) is
// (lat_start + i*dlat, lon_start + j*dlon). Latitude is typically stored
// north-to-south, i.e. dlat < 0.
struct GridSpec {
    double lat_start = 0.0;
    double lon_start = 0.0;
    double dlat = -1.0;
    double dlon = 1.0;
    int n_lat = 1;
    int n_lon = 1;

    void validate() const;

    double lat_of(int i) const { return lat_start + i * dlat; }
    double lon_of(int j) const { return lon_start + j * dlon; }

    // Fractional index of a coordinate along each axis.
    double lat_index(double lat) const { return (lat - lat_start) / dlat; }
    double lon_index(double lon) const { return (lon - lon_start) / dlon; }

    int nearest_lat_index(double lat) const {
        return static_cast<int>(std::lround(lat_index(lat)));
    }
    int nearest_lon_index(double lon) const {
        return static_cast<int>(std::lround(lon_index(lon)));
    }

    // Extent: outer cell edges (centers extended by half a cell).
    double lat_min() const;
    double lat_max() const;
    double lon_min() const;
    double lon_max() const;

    std::size_t size() const { return static_cast<std::size_t>(n_lat) * n_lon; }

    bool same_layout(const GridSpec& other) const;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// True iff every cell center of `inner` lies within `outer`'s extent, i.e.
// `inner` samples a sub-region of the footprint covered by `outer`.
bool covers(const GridSpec& outer, const GridSpec& inner);

// Checkable alignment predicate: one grid's centers fall inside the other's
// extent (either nesting direction).
bool aligned(const GridSpec& a, const GridSpec& b);

// Georeferenced values on a grid. Immutable by convention after construction;
// everything downstream treats Fields as values.
struct Field {
    GridSpec spec;
    TimeStamp time = 0;
    std::vector<double> values; // row-major [n_lat][n_lon]

    Field() = default;
    Field(GridSpec s, TimeStamp t, double fill = 0.0)
        : spec(s), time(t), values(s.size(), fill) {}

    double& at(int i, int j) { return values[static_cast<std::size_t>(i) * spec.n_lon + j]; }
    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * spec.n_lon + j]; }

    // Throws ShapeError / IngestError on violated invariants.
    void validate() const;
    bool all_finite() const;
};

struct StaticCovariates {
    Field lr_orography; // meters
    Field lr_landsea;   // fraction in [0, 1]
    Field hr_orography;
    Field hr_landsea;

    void validate() const;
};

} // namespace gridsr
