#include "gridsr/grid.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>

namespace gridsr {

//============================================================================
// Time
//============================================================================

std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

static void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    y = static_cast<int>(yy + (m <= 2));
}

CivilDate civil_from_time(TimeStamp t) {
    std::int64_t days = t / 86400;
    std::int64_t rem = t % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    CivilDate out{};
    civil_from_days(days, out.year, out.month, out.day);
    out.hour = static_cast<int>(rem / 3600);
    out.minute = static_cast<int>((rem % 3600) / 60);
    return out;
}

TimeStamp time_from_civil(const CivilDate& d) {
    return days_from_civil(d.year, d.month, d.day) * 86400 +
           static_cast<std::int64_t>(d.hour) * 3600 +
           static_cast<std::int64_t>(d.minute) * 60;
}

TimeStamp parse_time(const std::string& iso) {
    CivilDate d{};
    d.hour = 0;
    d.minute = 0;
    int n = std::sscanf(iso.c_str(), "%d-%d-%dT%d:%d", &d.year, &d.month, &d.day, &d.hour, &d.minute);
    if (n < 3) throw ConfigError("parse_time: cannot parse timestamp '" + iso + "'");
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31 || d.hour < 0 || d.hour > 23)
        throw ConfigError("parse_time: out-of-range timestamp '" + iso + "'");
    return time_from_civil(d);
}

std::string format_time(TimeStamp t) {
    const CivilDate d = civil_from_time(t);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02dZ", d.year, d.month, d.day, d.hour, d.minute);
    return std::string(buf);
}

Season season_of(TimeStamp t) {
    switch (civil_from_time(t).month) {
        case 12: case 1: case 2: return Season::DJF;
        case 3: case 4: case 5: return Season::MAM;
        case 6: case 7: case 8: return Season::JJA;
        default: return Season::SON;
    }
}

const char* season_name(Season s) {
    switch (s) {
        case Season::DJF: return "DJF";
        case Season::MAM: return "MAM";
        case Season::JJA: return "JJA";
        case Season::SON: return "SON";
    }
    return "?";
}

const char* split_name(SplitLabel s) {
    switch (s) {
        case SplitLabel::Train: return "train";
        case SplitLabel::Validation: return "validation";
        case SplitLabel::Test: return "test";
    }
    return "?";
}

void TimeSplit::validate() const {
    if (train_start > train_end || validation_start > validation_end || test_start > test_end)
        throw ConfigError("TimeSplit: each year range must satisfy start <= end");
    if (!(train_end < validation_start && validation_end < test_start))
        throw ConfigError("TimeSplit: ranges must be disjoint and ordered train < validation < test");
}

SplitLabel TimeSplit::assign(TimeStamp t) const {
    const int y = year_of(t);
    if (y >= train_start && y <= train_end) return SplitLabel::Train;
    if (y >= validation_start && y <= validation_end) return SplitLabel::Validation;
    if (y >= test_start && y <= test_end) return SplitLabel::Test;
    throw ConfigError("TimeSplit: year " + std::to_string(y) + " falls outside all split ranges");
}

bool TimeSplit::contains(TimeStamp t) const {
    const int y = year_of(t);
    return (y >= train_start && y <= train_end) ||
           (y >= validation_start && y <= validation_end) ||
           (y >= test_start && y <= test_end);
}

//============================================================================
// Grids
//============================================================================

void GridSpec::validate() const {
    if (n_lat < 1 || n_lon < 1)
        throw GeometryError("GridSpec: n_lat and n_lon must be >= 1");
    if (dlat == 0.0 || dlon == 0.0)
        throw GeometryError("GridSpec: dlat and dlon must be nonzero");
}

double GridSpec::lat_min() const {
    const double a = lat_start - 0.5 * dlat;
    const double b = lat_start + (n_lat - 0.5) * dlat;
    return std::min(a, b);
}

double GridSpec::lat_max() const {
    const double a = lat_start - 0.5 * dlat;
    const double b = lat_start + (n_lat - 0.5) * dlat;
    return std::max(a, b);
}

double GridSpec::lon_min() const {
    const double a = lon_start - 0.5 * dlon;
    const double b = lon_start + (n_lon - 0.5) * dlon;
    return std::min(a, b);
}

double GridSpec::lon_max() const {
    const double a = lon_start - 0.5 * dlon;
    const double b = lon_start + (n_lon - 0.5) * dlon;
    return std::max(a, b);
}

bool GridSpec::same_layout(const GridSpec& other) const {
    return n_lat == other.n_lat && n_lon == other.n_lon &&
           std::abs(lat_start - other.lat_start) < 1e-9 &&
           std::abs(lon_start - other.lon_start) < 1e-9 &&
           std::abs(dlat - other.dlat) < 1e-12 && std::abs(dlon - other.dlon) < 1e-12;
}

bool covers(const GridSpec& outer, const GridSpec& inner) {
    const double eps = 1e-9;
    return inner.lat_min() >= outer.lat_min() - eps && inner.lat_max() <= outer.lat_max() + eps &&
           inner.lon_min() >= outer.lon_min() - eps && inner.lon_max() <= outer.lon_max() + eps;
}

bool aligned(const GridSpec& a, const GridSpec& b) {
    return covers(a, b) || covers(b, a);
}

void Field::validate() const {
    spec.validate();
    if (values.size() != spec.size())
        throw ShapeError("Field: values size " + std::to_string(values.size()) +
                         " does not match grid " + std::to_string(spec.n_lat) + "x" +
                         std::to_string(spec.n_lon));
    if (!on_time_grid(time))
        throw IngestError("Field: timestamp " + format_time(time) + " is not on the 3-hourly grid");
    if (!all_finite())
        throw IngestError("Field: non-finite values at " + format_time(time));
}

bool Field::all_finite() const {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

void StaticCovariates::validate() const {
    lr_orography.spec.validate();
    hr_orography.spec.validate();
    if (!lr_orography.spec.same_layout(lr_landsea.spec))
        throw GeometryError("StaticCovariates: LR fields must share one grid");
    if (!hr_orography.spec.same_layout(hr_landsea.spec))
        throw GeometryError("StaticCovariates: HR fields must share one grid");
    for (const Field* f : {&lr_landsea, &hr_landsea})
        for (double v : f->values)
            if (!(v >= 0.0 && v <= 1.0))
                throw DomainError("StaticCovariates: land-sea fraction outside [0, 1]");
}

} // namespace gridsr
