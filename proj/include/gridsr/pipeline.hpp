#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridsr/bicubic.hpp"
#include "gridsr/dataset.hpp"
#include "gridsr/models.hpp"
#include "gridsr/tiling.hpp"

namespace gridsr::pipeline {

enum class TilingMode { Full, Tiles, Patches };

const char* tiling_mode_name(TilingMode m);
TilingMode tiling_mode_from_name(const std::string& name);

// Covariates z-scored over their own domains; the form every model input and
// the Eq.-style patch weighting consume.
struct PreparedCovariates {
    Field lr_orography, lr_landsea;
    Field hr_orography, hr_landsea;

    static PreparedCovariates standardize(const StaticCovariates& raw);
};

//----------------------------------------------------------------------------
// Sample assembly
//----------------------------------------------------------------------------

// One full-domain training/inference sample.
struct FullSample {
    InstanceStats stats;
    std::vector<double> model_input;     // normalized, shape depends on arch
    std::vector<double> baseline;        // bicubic at the HR grid, raw units
    std::vector<double> target_residual; // (hr - baseline)/sigma; empty without hr
    TimeStamp time = 0;
};

FullSample make_full_sample(models::Architecture arch, const Field& lr, const Field* hr,
                            const GridSpec& hr_spec, NormVariant variant);

// One tile sample. The baseline is the full-field bicubic restricted to the
// tile, so stitched zero-residual predictions reproduce the full-field
// bicubic exactly.
struct TileSample {
    TileRegion tile;
    InstanceStats stats;
    std::vector<double> model_input; // normalized LR window
    std::vector<double> lr_cov;      // [2, lw, lw] standardized
    std::vector<double> hr_cov;      // [2, cw, cw] standardized
    std::vector<double> baseline;    // [tile^2]
    std::vector<double> target_residual;
    TimeStamp time = 0;
};

TileSample make_tile_sample(const Field& lr, const Field* hr, const Field& bicubic_full,
                            const PreparedCovariates& cov, const TileRegion& tile,
                            NormVariant variant);

models::BatchInputs batch_full(const std::vector<const FullSample*>& samples,
                               const models::ModelConfig& config);
models::BatchInputs batch_tiles(const std::vector<const TileSample*>& samples,
                                const models::ModelConfig& config);

// Target residual tensor for a batch (training side).
nn::Tensor batch_targets_full(const std::vector<const FullSample*>& samples, int hr_n_lat,
                              int hr_n_lon);
nn::Tensor batch_targets_tile(const std::vector<const TileSample*>& samples, int tile_size);

TileLayout layout_for(const models::ModelConfig& config, const GridSpec& hr_spec,
                      const GridSpec& lr_spec);

//----------------------------------------------------------------------------
// Inference
//----------------------------------------------------------------------------

// Downscales an LR series to the HR grid. Tile modes require covariates;
// mode Tiles stitches the disjoint grid, mode Patches blends a 50%-stride
// overlapping layout with Hann weights.
std::vector<Field> predict(models::Model& model, const std::vector<Field>& lr_series,
                           const GridSpec& hr_spec, TilingMode mode,
                           const std::optional<StaticCovariates>& covariates,
                           nn::i64 batch_size = 8);

} // namespace gridsr::pipeline
