#include "gridsr/reports.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include <limits>

#include "gridsr/dataset.hpp"
#include "gridsr/netcdf.hpp"
#include "gridsr/png.hpp"

namespace gridsr::reports {

using metrics::MetricTable;

namespace {

std::string fmt_value(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
}

nlohmann::json meta_json(const ReportMeta& meta) {
    nlohmann::json j;
    j["code_version"] = meta.code_version;
    j["normalization"] = meta.normalization;
    j["checkpoint_fingerprints"] = meta.checkpoint_fingerprints;
    j["reproducible"] = meta.reproducible;
    if (!meta.reproducible && !meta.created.empty()) j["created"] = meta.created;
    return j;
}

} // namespace

std::string table_to_csv(const MetricTable& table, const ReportMeta& meta) {
    std::ostringstream os;
    os << "# gridsr " << meta.code_version << " metric table\n";
    os << "# normalization: " << meta.normalization << "\n";
    os << "# data range L (SSIM C1/C2, PSNR MAX): " << fmt_value(table.range_L) << "\n";
    os << "# aggregation: " << table.aggregation << "\n";
    for (const auto& [method, fp] : meta.checkpoint_fingerprints)
        os << "# checkpoint " << method << ": " << fp << "\n";
    if (!meta.reproducible && !meta.created.empty()) os << "# created: " << meta.created << "\n";
    os << "metric,method";
    for (const char* col : metrics::kTableColumns) os << "," << col;
    os << "\n";
    for (std::size_t m = 0; m < metrics::kTableMetrics.size(); ++m) {
        for (std::size_t mi = 0; mi < table.methods.size(); ++mi) {
            os << metrics::kTableMetrics[m] << "," << table.methods[mi];
            for (int col = 0; col < 5; ++col) {
                const auto& cell = table.cells[m][mi][col];
                os << "," << (cell.defined ? fmt_value(cell.value) : "NA");
            }
            os << "\n";
        }
    }
    // Best-per-cell markers (kept out of the numeric rows).
    for (std::size_t m = 0; m < metrics::kTableMetrics.size(); ++m) {
        for (int col = 0; col < 5; ++col) {
            std::vector<std::string> best;
            bool tie = false;
            for (std::size_t mi = 0; mi < table.methods.size(); ++mi) {
                const auto& cell = table.cells[m][mi][col];
                if (cell.defined && cell.best) {
                    best.push_back(table.methods[mi]);
                    tie = tie || cell.tie;
                }
            }
            if (best.empty()) continue;
            os << "# best " << metrics::kTableMetrics[m] << " " << metrics::kTableColumns[col]
               << ":";
            for (const auto& b : best) os << " " << b;
            if (tie) os << " (tie at 2 decimals)";
            os << "\n";
        }
    }
    return os.str();
}

std::string table_to_json(const MetricTable& table, const ReportMeta& meta) {
    nlohmann::json j;
    j["meta"] = meta_json(meta);
    j["range_L"] = table.range_L;
    j["aggregation"] = table.aggregation;
    j["methods"] = table.methods;
    j["columns"] = metrics::kTableColumns;
    nlohmann::json cells = nlohmann::json::object();
    for (std::size_t m = 0; m < metrics::kTableMetrics.size(); ++m) {
        nlohmann::json per_method = nlohmann::json::object();
        for (std::size_t mi = 0; mi < table.methods.size(); ++mi) {
            nlohmann::json row = nlohmann::json::array();
            for (int col = 0; col < 5; ++col) {
                const auto& cell = table.cells[m][mi][col];
                nlohmann::json cj;
                if (!cell.defined) {
                    cj["value"] = nullptr;
                } else if (std::isinf(cell.value)) {
                    cj["value"] = cell.value > 0 ? "inf" : "-inf";
                } else {
                    cj["value"] = cell.value;
                }
                cj["defined"] = cell.defined;
                cj["best"] = cell.best;
                cj["tie"] = cell.tie;
                row.push_back(cj);
            }
            per_method[table.methods[mi]] = row;
        }
        cells[metrics::kTableMetrics[m]] = per_method;
    }
    j["cells"] = cells;
    return j.dump(2);
}

metrics::MetricTable table_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    MetricTable table;
    table.range_L = j.at("range_L").get<double>();
    table.aggregation = j.at("aggregation").get<std::string>();
    table.methods = j.at("methods").get<std::vector<std::string>>();
    table.cells.resize(metrics::kTableMetrics.size());
    for (std::size_t m = 0; m < metrics::kTableMetrics.size(); ++m) {
        const auto& per_method = j.at("cells").at(metrics::kTableMetrics[m]);
        table.cells[m].resize(table.methods.size());
        for (std::size_t mi = 0; mi < table.methods.size(); ++mi) {
            const auto& row = per_method.at(table.methods[mi]);
            for (int col = 0; col < 5; ++col) {
                const auto& cj = row.at(col);
                MetricTable::Cell cell;
                cell.defined = cj.at("defined").get<bool>();
                if (cell.defined) {
                    if (cj.at("value").is_string()) {
                        cell.value = cj.at("value").get<std::string>() == "inf"
                                         ? std::numeric_limits<double>::infinity()
                                         : -std::numeric_limits<double>::infinity();
                    } else {
                        cell.value = cj.at("value").get<double>();
                    }
                }
                cell.best = cj.at("best").get<bool>();
                cell.tie = cj.at("tie").get<bool>();
                table.cells[m][mi][col] = cell;
            }
        }
    }
    return table;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("write_text_file: cannot write '" + path + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

void write_metric_maps(const std::string& path_prefix, const metrics::MetricMaps& maps) {
    const GridSpec& g = maps.rmse.spec;
    netcdf::NcFile file;
    file.add_dim("latitude", g.n_lat);
    file.add_dim("longitude", g.n_lon);
    std::vector<double> lats, lons;
    for (int i = 0; i < g.n_lat; ++i) lats.push_back(g.lat_of(i));
    for (int j = 0; j < g.n_lon; ++j) lons.push_back(g.lon_of(j));
    auto coord = [](std::string name, std::vector<double> vals, std::string units) {
        netcdf::Variable v;
        v.name = std::move(name);
        v.dims = {v.name};
        v.atts.push_back(netcdf::Attribute::str("units", std::move(units)));
        v.data = std::move(vals);
        return v;
    };
    file.vars.push_back(coord("latitude", std::move(lats), "degrees_north"));
    file.vars.push_back(coord("longitude", std::move(lons), "degrees_east"));
    auto add_map = [&](const std::string& name, const std::vector<double>& data,
                       const std::string& units) {
        netcdf::Variable v;
        v.name = name;
        v.dims = {"latitude", "longitude"};
        v.atts.push_back(netcdf::Attribute::str("units", units));
        v.data = data;
        file.vars.push_back(std::move(v));
    };
    add_map("bias", maps.bias.values, "K");
    add_map("rmse", maps.rmse.values, "K");
    add_map("rmse_over_std", maps.rmse_over_std.values, "1");
    std::vector<double> undef(maps.undefined.begin(), maps.undefined.end());
    add_map("rmse_over_std_undefined", undef, "1");
    netcdf::write_file(path_prefix + ".nc", file);

    auto render = [&](const std::string& suffix, const Field& f) {
        double vmin = f.values.front(), vmax = vmin;
        for (double v : f.values) {
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
        render_field_png(path_prefix + "_" + suffix + ".png", f, vmin, vmax);
    };
    render("bias", maps.bias);
    render("rmse", maps.rmse);
    render("rmse_over_std", maps.rmse_over_std);
}

std::vector<TimeStamp> export_case_study(
    const std::vector<std::pair<std::string, const std::vector<Field>*>>& methods,
    const std::vector<TimeStamp>& timestamps, const std::string& out_dir) {
    if (methods.empty()) throw ConfigError("export_case_study: empty method list");
    std::filesystem::create_directories(out_dir);
    std::vector<TimeStamp> missing;
    for (TimeStamp ts : timestamps) {
        std::vector<std::pair<std::string, const Field*>> found;
        for (const auto& [name, series] : methods) {
            const Field* hit = nullptr;
            for (const Field& f : *series)
                if (f.time == ts) {
                    hit = &f;
                    break;
                }
            if (hit) found.emplace_back(name, hit);
        }
        if (found.size() != methods.size()) {
            missing.push_back(ts);
            continue;
        }
        double vmin = found.front().second->values.front(), vmax = vmin;
        for (const auto& [name, f] : found)
            for (double v : f->values) {
                vmin = std::min(vmin, v);
                vmax = std::max(vmax, v);
            }
        std::string stamp = format_time(ts);
        for (char& c : stamp)
            if (c == ':') c = '-';
        for (const auto& [name, f] : found) {
            const std::string base = out_dir + "/" + name + "_" + stamp;
            write_series(base + ".nc", "temperature", {*f});
            render_field_png(base + ".png", *f, vmin, vmax);
        }
    }
    return missing;
}

} // namespace gridsr::reports
