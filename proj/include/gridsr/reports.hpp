#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridsr/metrics.hpp"

namespace gridsr::reports {

// Provenance stamped into every report. Wall-clock timestamps are omitted
// when reproducible is set so repeated runs emit identical bytes.
struct ReportMeta {
    std::string code_version;
    std::map<std::string, std::string> checkpoint_fingerprints; // method -> hex
    std::string normalization;
    bool reproducible = false;
    std::string created; // empty when reproducible
};

std::string table_to_csv(const metrics::MetricTable& table, const ReportMeta& meta);
std::string table_to_json(const metrics::MetricTable& table, const ReportMeta& meta);
metrics::MetricTable table_from_json(const std::string& text);

void write_text_file(const std::string& path, const std::string& content);

// Gridbox maps as NetCDF (bias/rmse/rmse_over_std plus an undefined mask)
// and rendered PNGs.
void write_metric_maps(const std::string& path_prefix, const metrics::MetricMaps& maps);

// Per-method, per-timestamp prediction exports with a shared color scale per
// timestamp. Returns the requested timestamps that were missing (they are
// skipped); callers treat a nonempty result as a failure status.
std::vector<TimeStamp> export_case_study(
    const std::vector<std::pair<std::string, const std::vector<Field>*>>& methods,
    const std::vector<TimeStamp>& timestamps, const std::string& out_dir);

} // namespace gridsr::reports
