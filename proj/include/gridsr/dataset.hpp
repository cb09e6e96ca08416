#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridsr/grid.hpp"
#include "gridsr/synthetic.hpp"

namespace gridsr {

struct DatasetManifest {
    std::string lr_path;
    std::string hr_path;
    std::string variable = "temperature";
    std::string lr_covariates_path; // optional
    std::string hr_covariates_path; // optional
    std::optional<TimeStamp> time_start;
    std::optional<TimeStamp> time_end;
    TimeSplit split;
};

// Time-aligned LR/HR series in chronological order plus static covariates.
struct PairedDataset {
    std::vector<Field> lr;
    std::vector<Field> hr;
    std::optional<StaticCovariates> covariates;
    TimeSplit split;

    std::size_t size() const { return lr.size(); }
    std::vector<std::size_t> indices_for(SplitLabel label) const;
    std::uint64_t fingerprint() const;
};

// Loads the paired series from NetCDF files. Within the overlap of the two
// time ranges every timestamp must be present on both sides; one-sided gaps
// raise AlignmentError listing them. NaN cells raise IngestError naming the
// first offending (time, i, j).
PairedDataset load_dataset(const DatasetManifest& manifest);

// NetCDF layout shared by the synthetic generator and real ingested files:
// coordinate variables latitude/longitude/time plus one data variable.
// Optional global attributes carry provenance (checkpoint fingerprints).
void write_series(const std::string& path, const std::string& variable,
                  const std::vector<Field>& fields,
                  const std::vector<std::pair<std::string, std::string>>& global_atts = {});
std::vector<Field> read_series(const std::string& path, const std::string& variable);
std::vector<std::pair<std::string, std::string>> read_series_attributes(const std::string& path);

void write_covariates(const std::string& path, const Field& orography, const Field& landsea);
std::pair<Field, Field> read_covariates(const std::string& path);

// Writes lr.nc, hr.nc, covariates_lr.nc, covariates_hr.nc into a directory
// and returns the matching manifest.
DatasetManifest write_synthetic_dataset(const std::string& dir, const SyntheticDataset& data,
                                        const std::string& variable, const TimeSplit& split);

} // namespace gridsr
