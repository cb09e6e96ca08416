#include "gridsr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "gridsr/netcdf.hpp"

namespace gridsr {

namespace {

netcdf::Variable coord_var(const std::string& name, std::vector<double> values,
                           const std::string& units) {
    netcdf::Variable v;
    v.name = name;
    v.dims = {name};
    v.atts.push_back(netcdf::Attribute::str("units", units));
    v.data = std::move(values);
    return v;
}

GridSpec grid_from_coords(const netcdf::Variable& lat, const netcdf::Variable& lon,
                          const std::string& path) {
    if (lat.data.size() < 1 || lon.data.size() < 1)
        throw IngestError("load_dataset: empty coordinate axes in " + path);
    GridSpec g;
    g.n_lat = static_cast<int>(lat.data.size());
    g.n_lon = static_cast<int>(lon.data.size());
    g.lat_start = lat.data.front();
    g.lon_start = lon.data.front();
    g.dlat = g.n_lat > 1 ? lat.data[1] - lat.data[0] : -1.0;
    g.dlon = g.n_lon > 1 ? lon.data[1] - lon.data[0] : 1.0;
    for (int i = 1; i < g.n_lat; ++i)
        if (std::abs(lat.data[i] - (g.lat_start + i * g.dlat)) > 1e-6 * std::abs(g.dlat))
            throw IngestError("load_dataset: latitude axis of " + path + " is not regular");
    for (int j = 1; j < g.n_lon; ++j)
        if (std::abs(lon.data[j] - (g.lon_start + j * g.dlon)) > 1e-6 * std::abs(g.dlon))
            throw IngestError("load_dataset: longitude axis of " + path + " is not regular");
    g.validate();
    return g;
}

} // namespace

std::vector<std::size_t> PairedDataset::indices_for(SplitLabel label) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < lr.size(); ++i)
        if (split.contains(lr[i].time) && split.assign(lr[i].time) == label) out.push_back(i);
    return out;
}

std::uint64_t PairedDataset::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const Field& f : lr) {
        h = fnv1a(&f.time, sizeof(f.time), h);
        h = fnv1a(f.values.data(), f.values.size() * sizeof(double), h);
    }
    for (const Field& f : hr) h = fnv1a(f.values.data(), f.values.size() * sizeof(double), h);
    return h;
}

void write_series(const std::string& path, const std::string& variable,
                  const std::vector<Field>& fields,
                  const std::vector<std::pair<std::string, std::string>>& global_atts) {
    if (fields.empty()) throw ConfigError("write_series: empty series");
    const GridSpec& g = fields.front().spec;
    netcdf::NcFile file;
    for (const auto& [k, v] : global_atts)
        file.global_atts.push_back(netcdf::Attribute::str(k, v));
    file.add_dim("time", static_cast<std::int64_t>(fields.size()));
    file.add_dim("latitude", g.n_lat);
    file.add_dim("longitude", g.n_lon);

    std::vector<double> times, lats, lons;
    for (const Field& f : fields) {
        if (!f.spec.same_layout(g))
            throw IngestError("write_series: grid changes over time");
        times.push_back(static_cast<double>(f.time) / kSecondsPerHour);
    }
    for (int i = 0; i < g.n_lat; ++i) lats.push_back(g.lat_of(i));
    for (int j = 0; j < g.n_lon; ++j) lons.push_back(g.lon_of(j));

    file.vars.push_back(coord_var("time", std::move(times), "hours since 1970-01-01 00:00:00"));
    file.vars.push_back(coord_var("latitude", std::move(lats), "degrees_north"));
    file.vars.push_back(coord_var("longitude", std::move(lons), "degrees_east"));

    netcdf::Variable data;
    data.name = variable;
    data.dims = {"time", "latitude", "longitude"};
    data.atts.push_back(netcdf::Attribute::str("units", "K"));
    data.data.reserve(fields.size() * g.size());
    for (const Field& f : fields) data.data.insert(data.data.end(), f.values.begin(), f.values.end());
    file.vars.push_back(std::move(data));

    netcdf::write_file(path, file);
}

std::vector<std::pair<std::string, std::string>> read_series_attributes(const std::string& path) {
    const netcdf::NcFile file = netcdf::read_file(path);
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& a : file.global_atts)
        if (a.is_text) out.emplace_back(a.name, a.text);
    return out;
}

std::vector<Field> read_series(const std::string& path, const std::string& variable) {
    const netcdf::NcFile file = netcdf::read_file(path);
    const netcdf::Variable* lat = file.find_var("latitude");
    const netcdf::Variable* lon = file.find_var("longitude");
    const netcdf::Variable* time = file.find_var("time");
    if (!lat || !lon || !time)
        throw IngestError("load_dataset: " + path +
                          " lacks CF coordinate variables latitude/longitude/time");
    const netcdf::Variable* data = file.find_var(variable);
    if (!data)
        throw IngestError("load_dataset: variable '" + variable + "' not found in " + path);
    if (data->dims.size() != 3 || data->dims[0] != "time")
        throw IngestError("load_dataset: variable '" + variable + "' must be [time,lat,lon] in " +
                          path);

    const GridSpec g = grid_from_coords(*lat, *lon, path);
    const std::size_t nt = time->data.size();
    if (data->data.size() != nt * g.size())
        throw IngestError("load_dataset: data size mismatch in " + path);

    std::vector<Field> out;
    out.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        const double hours = time->data[t];
        const TimeStamp ts = static_cast<TimeStamp>(std::llround(hours)) * kSecondsPerHour;
        if (!on_time_grid(ts))
            throw IngestError("load_dataset: timestamp " + std::to_string(hours) +
                              "h in " + path + " is not on the 3-hourly grid");
        Field f(g, ts);
        std::copy(data->data.begin() + t * g.size(), data->data.begin() + (t + 1) * g.size(),
                  f.values.begin());
        for (int i = 0; i < g.n_lat; ++i)
            for (int j = 0; j < g.n_lon; ++j)
                if (!std::isfinite(f.at(i, j)))
                    throw IngestError("load_dataset: NaN cell at (" + format_time(ts) + ", " +
                                      std::to_string(i) + ", " + std::to_string(j) + ") in " + path);
        out.push_back(std::move(f));
    }
    std::sort(out.begin(), out.end(),
              [](const Field& a, const Field& b) { return a.time < b.time; });
    for (std::size_t t = 1; t < out.size(); ++t)
        if (out[t].time == out[t - 1].time)
            throw IngestError("load_dataset: duplicate timestamp " + format_time(out[t].time) +
                              " in " + path);
    return out;
}

void write_covariates(const std::string& path, const Field& orography, const Field& landsea) {
    if (!orography.spec.same_layout(landsea.spec))
        throw GeometryError("write_covariates: fields must share one grid");
    const GridSpec& g = orography.spec;
    netcdf::NcFile file;
    file.add_dim("latitude", g.n_lat);
    file.add_dim("longitude", g.n_lon);
    std::vector<double> lats, lons;
    for (int i = 0; i < g.n_lat; ++i) lats.push_back(g.lat_of(i));
    for (int j = 0; j < g.n_lon; ++j) lons.push_back(g.lon_of(j));
    file.vars.push_back(coord_var("latitude", std::move(lats), "degrees_north"));
    file.vars.push_back(coord_var("longitude", std::move(lons), "degrees_east"));

    netcdf::Variable oro;
    oro.name = "orography";
    oro.dims = {"latitude", "longitude"};
    oro.atts.push_back(netcdf::Attribute::str("units", "m"));
    oro.data = orography.values;
    file.vars.push_back(std::move(oro));

    netcdf::Variable sea;
    sea.name = "land_sea_fraction";
    sea.dims = {"latitude", "longitude"};
    sea.atts.push_back(netcdf::Attribute::str("units", "1"));
    sea.data = landsea.values;
    file.vars.push_back(std::move(sea));

    netcdf::write_file(path, file);
}

std::pair<Field, Field> read_covariates(const std::string& path) {
    const netcdf::NcFile file = netcdf::read_file(path);
    const netcdf::Variable* lat = file.find_var("latitude");
    const netcdf::Variable* lon = file.find_var("longitude");
    const netcdf::Variable* oro = file.find_var("orography");
    const netcdf::Variable* sea = file.find_var("land_sea_fraction");
    if (!lat || !lon || !oro || !sea)
        throw IngestError("read_covariates: " + path +
                          " needs latitude/longitude/orography/land_sea_fraction");
    const GridSpec g = grid_from_coords(*lat, *lon, path);
    Field foro(g, 0), fsea(g, 0);
    if (oro->data.size() != g.size() || sea->data.size() != g.size())
        throw IngestError("read_covariates: data size mismatch in " + path);
    foro.values = oro->data;
    fsea.values = sea->data;
    return {std::move(foro), std::move(fsea)};
}

PairedDataset load_dataset(const DatasetManifest& manifest) {
    manifest.split.validate();
    std::vector<Field> lr = read_series(manifest.lr_path, manifest.variable);
    std::vector<Field> hr = read_series(manifest.hr_path, manifest.variable);

    auto in_manifest_range = [&](TimeStamp t) {
        if (manifest.time_start && t < *manifest.time_start) return false;
        if (manifest.time_end && t > *manifest.time_end) return false;
        return true;
    };
    std::erase_if(lr, [&](const Field& f) { return !in_manifest_range(f.time); });
    std::erase_if(hr, [&](const Field& f) { return !in_manifest_range(f.time); });

    PairedDataset out;
    out.split = manifest.split;
    if (!lr.empty() && !hr.empty()) {
        const TimeStamp lo = std::max(lr.front().time, hr.front().time);
        const TimeStamp hi = std::min(lr.back().time, hr.back().time);
        std::map<TimeStamp, const Field*> hr_by_time;
        for (const Field& f : hr) hr_by_time[f.time] = &f;
        std::map<TimeStamp, const Field*> lr_by_time;
        for (const Field& f : lr) lr_by_time[f.time] = &f;

        std::vector<TimeStamp> gaps;
        for (const Field& f : lr)
            if (f.time >= lo && f.time <= hi && !hr_by_time.count(f.time)) gaps.push_back(f.time);
        for (const Field& f : hr)
            if (f.time >= lo && f.time <= hi && !lr_by_time.count(f.time)) gaps.push_back(f.time);
        if (!gaps.empty()) {
            std::sort(gaps.begin(), gaps.end());
            std::ostringstream os;
            os << "load_dataset: " << gaps.size() << " timestamp(s) present on one side only:";
            for (std::size_t i = 0; i < std::min<std::size_t>(gaps.size(), 8); ++i)
                os << " " << format_time(gaps[i]);
            if (gaps.size() > 8) os << " ...";
            throw AlignmentError(os.str());
        }
        for (Field& f : lr) {
            if (f.time < lo || f.time > hi) continue;
            out.hr.push_back(*hr_by_time.at(f.time));
            out.lr.push_back(std::move(f));
        }
    }

    if (!manifest.lr_covariates_path.empty() || !manifest.hr_covariates_path.empty()) {
        if (manifest.lr_covariates_path.empty() || manifest.hr_covariates_path.empty())
            throw ConfigError("load_dataset: covariates need both lr and hr paths");
        StaticCovariates cov;
        auto [lo_, ls_] = read_covariates(manifest.lr_covariates_path);
        auto [ho_, hs_] = read_covariates(manifest.hr_covariates_path);
        cov.lr_orography = std::move(lo_);
        cov.lr_landsea = std::move(ls_);
        cov.hr_orography = std::move(ho_);
        cov.hr_landsea = std::move(hs_);
        cov.validate();
        out.covariates = std::move(cov);
    }
    return out;
}

DatasetManifest write_synthetic_dataset(const std::string& dir, const SyntheticDataset& data,
                                        const std::string& variable, const TimeSplit& split) {
    std::filesystem::create_directories(dir);
    DatasetManifest m;
    m.variable = variable;
    m.split = split;
    m.lr_path = dir + "/lr.nc";
    m.hr_path = dir + "/hr.nc";
    m.lr_covariates_path = dir + "/covariates_lr.nc";
    m.hr_covariates_path = dir + "/covariates_hr.nc";
    write_series(m.lr_path, variable, data.lr);
    write_series(m.hr_path, variable, data.hr);
    write_covariates(m.lr_covariates_path, data.covariates.lr_orography, data.covariates.lr_landsea);
    write_covariates(m.hr_covariates_path, data.covariates.hr_orography, data.covariates.hr_landsea);
    return m;
}

} // namespace gridsr
