#include "gridsr/tiling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace gridsr {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kBlendMinWeight = 1e-3;

int clamp_origin(int origin, int size, int n) {
    return std::clamp(origin, 0, n - size);
}

// Window footprint along one axis as [min_edge, max_edge].
std::pair<double, double> footprint(double start, double step, int idx0, int size) {
    const double a = start + (idx0 - 0.5) * step;
    const double b = start + (idx0 + size - 0.5) * step;
    return {std::min(a, b), std::max(a, b)};
}

} // namespace

void TileLayout::validate() const {
    hr_spec.validate();
    lr_spec.validate();
    if (tile_size < 1 || lr_size < 1)
        throw GeometryError("TileLayout: tile_size and lr_size must be positive");
    if (cov_size < tile_size)
        throw GeometryError("TileLayout: covariate window must contain the tile");
    if (tile_size > hr_spec.n_lat || tile_size > hr_spec.n_lon)
        throw GeometryError("TileLayout: tile exceeds HR domain");
    if (lr_size > lr_spec.n_lat || lr_size > lr_spec.n_lon)
        throw GeometryError("TileLayout: lr window exceeds LR domain");
    if (!aligned(hr_spec, lr_spec))
        throw GeometryError("TileLayout: HR and LR grids are not aligned");
}

TileRegion tile_at(const TileLayout& layout, int hr_row0, int hr_col0) {
    const GridSpec& hr = layout.hr_spec;
    const GridSpec& lr = layout.lr_spec;
    const int ts = layout.tile_size;
    const int ls = layout.lr_size;

    TileRegion t;
    t.hr_row0 = hr_row0;
    t.hr_col0 = hr_col0;
    t.hr_size = ts;
    t.lr_size = ls;

    // Center the LR window on the tile's geographic center, then clamp.
    const double center_lat = hr.lat_of(hr_row0) + 0.5 * (ts - 1) * hr.dlat;
    const double center_lon = hr.lon_of(hr_col0) + 0.5 * (ts - 1) * hr.dlon;
    const double ci = lr.lat_index(center_lat);
    const double cj = lr.lon_index(center_lon);
    t.lr_row0 = clamp_origin(static_cast<int>(std::lround(ci - 0.5 * (ls - 1))), ls, lr.n_lat);
    t.lr_col0 = clamp_origin(static_cast<int>(std::lround(cj - 0.5 * (ls - 1))), ls, lr.n_lon);

    // Footprint containment: the LR window must cover the HR tile.
    const auto [hr_lat_lo, hr_lat_hi] = footprint(hr.lat_start, hr.dlat, hr_row0, ts);
    const auto [hr_lon_lo, hr_lon_hi] = footprint(hr.lon_start, hr.dlon, hr_col0, ts);
    const auto [lr_lat_lo, lr_lat_hi] = footprint(lr.lat_start, lr.dlat, t.lr_row0, ls);
    const auto [lr_lon_lo, lr_lon_hi] = footprint(lr.lon_start, lr.dlon, t.lr_col0, ls);
    const double eps = 1e-9;
    if (lr_lat_lo > hr_lat_lo + eps || lr_lat_hi < hr_lat_hi - eps ||
        lr_lon_lo > hr_lon_lo + eps || lr_lon_hi < hr_lon_hi - eps)
        throw GeometryError("tile_at: LR window footprint cannot contain the HR tile; "
                            "increase lr_size");

    // HR covariate window, centered on the tile and clamped to the domain.
    t.cov_size = std::min({layout.cov_size, hr.n_lat, hr.n_lon});
    t.cov_row0 = clamp_origin(hr_row0 - (t.cov_size - ts) / 2, t.cov_size, hr.n_lat);
    t.cov_col0 = clamp_origin(hr_col0 - (t.cov_size - ts) / 2, t.cov_size, hr.n_lon);
    return t;
}

std::vector<TileRegion> make_tile_grid(const TileLayout& layout) {
    layout.validate();
    const GridSpec& hr = layout.hr_spec;
    const int ts = layout.tile_size;
    if (hr.n_lat % ts != 0 || hr.n_lon % ts != 0)
        throw GeometryError("make_tile_grid: HR dims " + std::to_string(hr.n_lat) + "x" +
                            std::to_string(hr.n_lon) + " not divisible by tile size " +
                            std::to_string(ts));
    std::vector<TileRegion> tiles;
    tiles.reserve(static_cast<std::size_t>(hr.n_lat / ts) * (hr.n_lon / ts));
    for (int i = 0; i < hr.n_lat / ts; ++i)
        for (int j = 0; j < hr.n_lon / ts; ++j) tiles.push_back(tile_at(layout, i * ts, j * ts));
    return tiles;
}

TileRegion random_patch(const TileLayout& layout, Rng& rng) {
    layout.validate();
    const int max_i = layout.hr_spec.n_lat - layout.tile_size;
    const int max_j = layout.hr_spec.n_lon - layout.tile_size;
    const int i = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_i) + 1));
    const int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_j) + 1));
    return tile_at(layout, i, j);
}

std::vector<TileRegion> overlapping_patch_grid(const TileLayout& layout) {
    layout.validate();
    const int ts = layout.tile_size;
    const int stride = std::max(1, ts / 2);
    auto origins = [&](int n) {
        std::vector<int> out;
        for (int o = 0;; o += stride) {
            const int c = std::min(o, n - ts);
            if (out.empty() || out.back() != c) out.push_back(c);
            if (c == n - ts) break;
        }
        return out;
    };
    std::vector<TileRegion> tiles;
    for (int i : origins(layout.hr_spec.n_lat))
        for (int j : origins(layout.hr_spec.n_lon)) tiles.push_back(tile_at(layout, i, j));
    return tiles;
}

std::vector<double> extract_hr_window(const Field& field, const TileRegion& tile) {
    std::vector<double> out(static_cast<std::size_t>(tile.hr_size) * tile.hr_size);
    for (int i = 0; i < tile.hr_size; ++i)
        for (int j = 0; j < tile.hr_size; ++j)
            out[static_cast<std::size_t>(i) * tile.hr_size + j] =
                field.at(tile.hr_row0 + i, tile.hr_col0 + j);
    return out;
}

Field stitch(const std::vector<std::pair<TileRegion, std::vector<double>>>& predictions,
             const GridSpec& hr_spec, StitchMode mode, TimeStamp time) {
    hr_spec.validate();
    for (const auto& [tile, patch] : predictions) {
        if (static_cast<std::size_t>(tile.hr_size) * tile.hr_size != patch.size())
            throw ShapeError("stitch: patch size does not match its tile");
        if (tile.hr_row0 < 0 || tile.hr_col0 < 0 || tile.hr_row0 + tile.hr_size > hr_spec.n_lat ||
            tile.hr_col0 + tile.hr_size > hr_spec.n_lon)
            throw GeometryError("stitch: tile outside the HR domain");
    }
    Field out(hr_spec, time);

    if (mode == StitchMode::Disjoint) {
        std::vector<std::uint8_t> hits(hr_spec.size(), 0);
        for (const auto& [tile, patch] : predictions) {
            for (int i = 0; i < tile.hr_size; ++i)
                for (int j = 0; j < tile.hr_size; ++j) {
                    const std::size_t cell =
                        static_cast<std::size_t>(tile.hr_row0 + i) * hr_spec.n_lon + tile.hr_col0 + j;
                    if (hits[cell]++)
                        throw GeometryError("stitch: overlapping tiles in disjoint mode at (" +
                                            std::to_string(tile.hr_row0 + i) + ", " +
                                            std::to_string(tile.hr_col0 + j) + ")");
                    out.values[cell] = patch[static_cast<std::size_t>(i) * tile.hr_size + j];
                }
        }
        for (std::size_t c = 0; c < hits.size(); ++c)
            if (!hits[c])
                throw GeometryError("stitch: disjoint tiling does not cover the domain");
        return out;
    }

    // Blend: separable Hann weights with a positive floor so edge rows keep a
    // nonzero contribution, normalized per cell.
    std::vector<double> wsum(hr_spec.size(), 0.0);
    std::vector<double> acc(hr_spec.size(), 0.0);
    for (const auto& [tile, patch] : predictions) {
        const int n = tile.hr_size;
        std::vector<double> w1(n);
        for (int t = 0; t < n; ++t) {
            const double s = std::sin(kPi * (t + 0.5) / n);
            w1[t] = std::max(s * s, kBlendMinWeight);
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const std::size_t cell =
                    static_cast<std::size_t>(tile.hr_row0 + i) * hr_spec.n_lon + tile.hr_col0 + j;
                const double w = w1[i] * w1[j];
                wsum[cell] += w;
                acc[cell] += w * patch[static_cast<std::size_t>(i) * tile.hr_size + j];
            }
    }
    std::vector<std::size_t> uncovered;
    for (std::size_t c = 0; c < wsum.size(); ++c) {
        if (wsum[c] <= 0.0) {
            uncovered.push_back(c);
            continue;
        }
        out.values[c] = acc[c] / wsum[c];
    }
    if (!uncovered.empty()) {
        std::ostringstream os;
        os << "stitch: " << uncovered.size() << " cell(s) not covered by any patch:";
        for (std::size_t k = 0; k < std::min<std::size_t>(uncovered.size(), 8); ++k)
            os << " (" << uncovered[k] / hr_spec.n_lon << "," << uncovered[k] % hr_spec.n_lon << ")";
        if (uncovered.size() > 8) os << " ...";
        throw GeometryError(os.str());
    }
    return out;
}

std::string tiles_to_json(const std::vector<TileRegion>& tiles) {
    nlohmann::json arr = nlohmann::json::array();
    for (const TileRegion& t : tiles) {
        arr.push_back({{"hr_row0", t.hr_row0},
                       {"hr_col0", t.hr_col0},
                       {"hr_size", t.hr_size},
                       {"lr_row0", t.lr_row0},
                       {"lr_col0", t.lr_col0},
                       {"lr_size", t.lr_size},
                       {"cov_row0", t.cov_row0},
                       {"cov_col0", t.cov_col0},
                       {"cov_size", t.cov_size}});
    }
    return arr.dump(2);
}

} // namespace gridsr
