#pragma once

#include <string>
#include <vector>

#include "gridsr/grid.hpp"

namespace gridsr {

// An HR output window plus its enlarged LR input window and the HR covariate
// window. All coordinates are grid-point indices into the respective grids.
struct TileRegion {
    int hr_row0 = 0, hr_col0 = 0, hr_size = 0;
    int lr_row0 = 0, lr_col0 = 0, lr_size = 0;
    int cov_row0 = 0, cov_col0 = 0, cov_size = 0;

    friend bool operator==(const TileRegion&, const TileRegion&) = default;
};

// Window geometry shared by tile construction. lr_size is the fixed LR
// context window edge (13 in the reference configuration); cov_size the HR
// covariate window edge (52 = tile +/- 6, clamped to the domain).
struct TileLayout {
    GridSpec hr_spec;
    GridSpec lr_spec;
    int tile_size = 40;
    int lr_size = 13;
    int cov_size = 52;

    void validate() const;
};

// LR context window of lr_size x lr_size centered on the HR window's
// geographic center, clamped inside the LR domain; the covariate window is
// the matching HR-resolution footprint. Throws GeometryError when the LR
// footprint cannot contain the HR footprint.
TileRegion tile_at(const TileLayout& layout, int hr_row0, int hr_col0);

// Disjoint tiles exactly covering the HR domain in row-major order.
std::vector<TileRegion> make_tile_grid(const TileLayout& layout);

// Uniformly random in-domain HR window.
TileRegion random_patch(const TileLayout& layout, Rng& rng);

// Regular overlapping grid with 50% stride (inference layout for the patch
// variant); windows are clamped flush to the domain edges.
std::vector<TileRegion> overlapping_patch_grid(const TileLayout& layout);

std::vector<double> extract_hr_window(const Field& field, const TileRegion& tile);

enum class StitchMode { Disjoint, Blend };

// Reassembles per-tile predictions into a full HR field. Disjoint mode
// requires a partition and places patches verbatim; blend mode Hann-weights
// overlapping patches and normalizes per cell.
Field stitch(const std::vector<std::pair<TileRegion, std::vector<double>>>& predictions,
             const GridSpec& hr_spec, StitchMode mode, TimeStamp time = 0);

std::string tiles_to_json(const std::vector<TileRegion>& tiles);

} // namespace gridsr
