#include <doctest.h>

#include <cmath>
#include <set>

#include "gridsr/tiling.hpp"

using namespace gridsr;

namespace {

// Reference geometry: the 0.25-degree LR grid covers a wider area than the
// 0.05-degree HR grid, as in the source reanalyses.
TileLayout reference_layout() {
    TileLayout layout;
    layout.hr_spec = GridSpec{45.0, -6.0, -0.05, 0.05, 200, 320};
    layout.lr_spec = GridSpec{47.0, -8.0, -0.25, 0.25, 57, 81};
    layout.tile_size = 40;
    layout.lr_size = 13;
    layout.cov_size = 52;
    return layout;
}

// Desk geometry: LR is the exact block-mean grid of HR at scale 4.
TileLayout desk_layout(int n) {
    TileLayout layout;
    layout.hr_spec = GridSpec{45.0, -6.0, -0.05, 0.05, n, n};
    layout.lr_spec = GridSpec{45.0 + 1.5 * -0.05, -6.0 + 1.5 * 0.05, -0.2, 0.2, n / 4, n / 4};
    layout.tile_size = 40;
    layout.lr_size = 13;
    layout.cov_size = 52;
    return layout;
}

} // namespace

TEST_CASE("200x320 at tile 40 yields 40 disjoint covering tiles") {
    const TileLayout layout = reference_layout();
    const std::vector<TileRegion> tiles = make_tile_grid(layout);
    REQUIRE(tiles.size() == 40);

    std::set<std::pair<int, int>> covered;
    for (const TileRegion& t : tiles) {
        CHECK(t.hr_size == 40);
        CHECK(t.lr_size == 13);
        for (int i = 0; i < t.hr_size; ++i)
            for (int j = 0; j < t.hr_size; ++j) {
                const auto cell = std::make_pair(t.hr_row0 + i, t.hr_col0 + j);
                CHECK(covered.insert(cell).second); // disjoint
            }
    }
    CHECK(covered.size() == 200u * 320u); // covering
    // Row-major order.
    CHECK(tiles[0].hr_row0 == 0);
    CHECK(tiles[0].hr_col0 == 0);
    CHECK(tiles[1].hr_col0 == 40);
    CHECK(tiles[8].hr_row0 == 40);
}

TEST_CASE("single-tile domain and 4-tile partition") {
    TileLayout layout = desk_layout(40);
    layout.lr_spec.n_lat = 13; // LR domain padded out to the window size
    layout.lr_spec.n_lon = 13;
    const auto one = make_tile_grid(layout);
    REQUIRE(one.size() == 1);
    CHECK(one[0].hr_row0 == 0);
    CHECK(one[0].hr_col0 == 0);

    layout = desk_layout(80);
    const auto four = make_tile_grid(layout);
    REQUIRE(four.size() == 4);
    std::set<std::pair<int, int>> cells;
    for (const auto& t : four)
        for (int i = 0; i < t.hr_size; ++i)
            for (int j = 0; j < t.hr_size; ++j)
                CHECK(cells.insert({t.hr_row0 + i, t.hr_col0 + j}).second);
    CHECK(cells.size() == 6400u);
}

TEST_CASE("non-divisible dims raise a geometry error") {
    TileLayout layout = reference_layout();
    layout.hr_spec.n_lat = 201;
    CHECK_THROWS_AS(make_tile_grid(layout), GeometryError);
}

TEST_CASE("LR windows contain the HR footprint, centered with boundary clamping") {
    const TileLayout layout = reference_layout();
    const std::vector<TileRegion> tiles = make_tile_grid(layout);

    auto lat_extent = [](const GridSpec& g, int i0, int n) {
        const double a = g.lat_start + (i0 - 0.5) * g.dlat;
        const double b = g.lat_start + (i0 + n - 0.5) * g.dlat;
        return std::make_pair(std::min(a, b), std::max(a, b));
    };
    auto lon_extent = [](const GridSpec& g, int j0, int n) {
        const double a = g.lon_start + (j0 - 0.5) * g.dlon;
        const double b = g.lon_start + (j0 + n - 0.5) * g.dlon;
        return std::make_pair(std::min(a, b), std::max(a, b));
    };

    for (const TileRegion& t : tiles) {
        const auto [hl, hh] = lat_extent(layout.hr_spec, t.hr_row0, t.hr_size);
        const auto [ll, lh] = lat_extent(layout.lr_spec, t.lr_row0, t.lr_size);
        CHECK(ll <= hl + 1e-9);
        CHECK(lh >= hh - 1e-9);
        const auto [hgl, hgh] = lon_extent(layout.hr_spec, t.hr_col0, t.hr_size);
        const auto [lgl, lgh] = lon_extent(layout.lr_spec, t.lr_col0, t.lr_size);
        CHECK(lgl <= hgl + 1e-9);
        CHECK(lgh >= hgh - 1e-9);
        // Covariate window contains the tile.
        CHECK(t.cov_row0 <= t.hr_row0);
        CHECK(t.cov_col0 <= t.hr_col0);
        CHECK(t.cov_row0 + t.cov_size >= t.hr_row0 + t.hr_size);
        CHECK(t.cov_col0 + t.cov_size >= t.hr_col0 + t.hr_size);
    }

    SUBCASE("corner tile clamps to the LR origin when the LR domain is tight") {
        const auto desk_tiles = make_tile_grid(desk_layout(80));
        CHECK(desk_tiles.front().lr_row0 == 0);
        CHECK(desk_tiles.front().lr_col0 == 0);
        // Bottom-right corner clamps against the upper bound.
        CHECK(desk_tiles.back().lr_row0 == 20 - 13);
        CHECK(desk_tiles.back().lr_col0 == 20 - 13);
    }
    SUBCASE("interior tile overhang is 2-3 LR cells per side (footprint 8 + window 13)") {
        const TileRegion& t = tiles[2 * 8 + 3]; // interior tile
        const auto [hl, hh] = lat_extent(layout.hr_spec, t.hr_row0, t.hr_size);
        const auto [ll, lh] = lat_extent(layout.lr_spec, t.lr_row0, t.lr_size);
        const double cell = std::abs(layout.lr_spec.dlat);
        const double south = (hl - ll) / cell;
        const double north = (lh - hh) / cell;
        CHECK(south >= 2.0 - 1e-9);
        CHECK(north >= 2.0 - 1e-9);
        CHECK(south <= 3.0 + 1e-9);
        CHECK(north <= 3.0 + 1e-9);
    }
}

TEST_CASE("degenerate containment: LR window spans exactly the whole LR domain") {
    TileLayout layout;
    layout.hr_spec = GridSpec{45.0, -6.0, -0.05, 0.05, 52, 52};
    layout.lr_spec = GridSpec{45.0 + 1.5 * -0.05, -6.0 + 1.5 * 0.05, -0.2, 0.2, 13, 13};
    layout.tile_size = 52;
    layout.lr_size = 13;
    const TileRegion t = tile_at(layout, 0, 0);
    CHECK(t.lr_row0 == 0);
    CHECK(t.lr_col0 == 0);
    CHECK(t.lr_size == 13);
}

TEST_CASE("lr window too small raises a geometry error") {
    TileLayout layout = reference_layout();
    layout.lr_size = 7; // a 40-cell tile spans 8 LR cells at this scale
    CHECK_THROWS_AS(make_tile_grid(layout), GeometryError);

    TileLayout desk = desk_layout(80);
    desk.lr_size = 9; // 10 LR cells needed at scale 4
    CHECK_THROWS_AS(make_tile_grid(desk), GeometryError);
}

TEST_CASE("random patches stay in bounds and spread uniformly") {
    const TileLayout layout = reference_layout();
    Rng rng(4242);

    SUBCASE("domain equal to the tile admits a single origin") {
        TileLayout one = desk_layout(40);
        one.lr_spec.n_lat = 13;
        one.lr_spec.n_lon = 13;
        for (int k = 0; k < 20; ++k) {
            const TileRegion t = random_patch(one, rng);
            CHECK(t.hr_row0 == 0);
            CHECK(t.hr_col0 == 0);
        }
    }

    SUBCASE("origins bucketed on a 5x8 grid are uniform within 2%") {
        // Origins live in {0..160}x{0..280}; coarsen to 5x8 buckets.
        const int draws = 100000;
        std::vector<int> counts(40, 0);
        for (int k = 0; k < draws; ++k) {
            const TileRegion t = random_patch(layout, rng);
            CHECK(t.hr_row0 >= 0);
            CHECK(t.hr_row0 <= 160);
            CHECK(t.hr_col0 >= 0);
            CHECK(t.hr_col0 <= 280);
            const int bi = std::min(4, t.hr_row0 * 5 / 161);
            const int bj = std::min(7, t.hr_col0 * 8 / 281);
            ++counts[bi * 8 + bj];
        }
        for (int c : counts) CHECK(std::abs(c / double(draws) - 1.0 / 40.0) < 0.02);
    }

    SUBCASE("fixed seed reproduces the patch sequence") {
        Rng r1(5), r2(5);
        for (int k = 0; k < 100; ++k) CHECK(random_patch(layout, r1) == random_patch(layout, r2));
    }
}

TEST_CASE("stitch of extracted disjoint tiles is the identity") {
    const TileLayout layout = reference_layout();
    const auto tiles = make_tile_grid(layout);
    Field f(layout.hr_spec, 0);
    Rng rng(1);
    for (double& v : f.values) v = rng.next_normal();

    std::vector<std::pair<TileRegion, std::vector<double>>> preds;
    for (const TileRegion& t : tiles) preds.emplace_back(t, extract_hr_window(f, t));
    const Field back = stitch(preds, layout.hr_spec, StitchMode::Disjoint);
    CHECK(back.values == f.values);
}

TEST_CASE("disjoint stitch rejects overlaps and gaps") {
    const TileLayout layout = reference_layout();
    const auto tiles = make_tile_grid(layout);
    Field f(layout.hr_spec, 0, 1.0);
    std::vector<std::pair<TileRegion, std::vector<double>>> preds;
    for (const TileRegion& t : tiles) preds.emplace_back(t, extract_hr_window(f, t));

    SUBCASE("duplicate tile overlaps") {
        preds.push_back(preds.front());
        CHECK_THROWS_AS(stitch(preds, layout.hr_spec, StitchMode::Disjoint), GeometryError);
    }
    SUBCASE("missing tile leaves uncovered cells") {
        preds.pop_back();
        CHECK_THROWS_AS(stitch(preds, layout.hr_spec, StitchMode::Disjoint), GeometryError);
    }
}

TEST_CASE("blend mode: constants pass through, overlaps interpolate, weights normalize") {
    GridSpec g{45.0, -6.0, -0.05, 0.05, 40, 60};

    TileRegion a;
    a.hr_row0 = 0;
    a.hr_col0 = 0;
    a.hr_size = 40;
    TileRegion b = a;
    b.hr_col0 = 20; // half-overlapping

    SUBCASE("identical constants blend to the constant") {
        std::vector<std::pair<TileRegion, std::vector<double>>> preds{
            {a, std::vector<double>(1600, 7.5)}, {b, std::vector<double>(1600, 7.5)}};
        const Field out = stitch(preds, g, StitchMode::Blend);
        for (double v : out.values) CHECK(v == doctest::Approx(7.5).epsilon(1e-12));
    }

    SUBCASE("overlap cells lie strictly between the two patch values") {
        std::vector<std::pair<TileRegion, std::vector<double>>> preds{
            {a, std::vector<double>(1600, 1.0)}, {b, std::vector<double>(1600, 3.0)}};
        const Field out = stitch(preds, g, StitchMode::Blend);
        for (int i = 0; i < 40; ++i)
            for (int j = 20; j < 40; ++j) {
                CHECK(out.at(i, j) > 1.0);
                CHECK(out.at(i, j) < 3.0);
            }
        // Non-overlap regions keep their patch value.
        CHECK(out.at(5, 5) == doctest::Approx(1.0));
        CHECK(out.at(5, 55) == doctest::Approx(3.0));
    }

    SUBCASE("uncovered cells are a coverage error") {
        std::vector<std::pair<TileRegion, std::vector<double>>> preds{
            {a, std::vector<double>(1600, 1.0)}};
        CHECK_THROWS_AS(stitch(preds, g, StitchMode::Blend), GeometryError);
    }
}

TEST_CASE("blend normalization: accumulated weights sum to one on random layouts") {
    // Randomized covering layouts; verify per-cell normalized weight sums by
    // blending all-ones patches: the output must be exactly 1 everywhere.
    Rng rng(777);
    GridSpec g{45.0, -6.0, -0.05, 0.05, 48, 48};
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::pair<TileRegion, std::vector<double>>> preds;
        // Regular covering grid plus random extra patches.
        for (int i = 0; i <= 32; i += 16)
            for (int j = 0; j <= 32; j += 16) {
                TileRegion t;
                t.hr_row0 = i;
                t.hr_col0 = j;
                t.hr_size = 16;
                preds.emplace_back(t, std::vector<double>(256, 1.0));
            }
        const int extras = 1 + static_cast<int>(rng.next_below(6));
        for (int k = 0; k < extras; ++k) {
            TileRegion t;
            t.hr_size = 16;
            t.hr_row0 = static_cast<int>(rng.next_below(33));
            t.hr_col0 = static_cast<int>(rng.next_below(33));
            preds.emplace_back(t, std::vector<double>(256, 1.0));
        }
        const Field out = stitch(preds, g, StitchMode::Blend);
        for (double v : out.values) CHECK(std::abs(v - 1.0) < 1e-12);
    }
}

TEST_CASE("overlapping patch grid covers the domain flush to the edges") {
    TileLayout layout = reference_layout();
    layout.hr_spec.n_lat = 100; // not a multiple of the tile: stride clamps
    const auto patches = overlapping_patch_grid(layout);
    std::vector<int> hits(static_cast<std::size_t>(layout.hr_spec.n_lat) * layout.hr_spec.n_lon, 0);
    for (const auto& t : patches)
        for (int i = 0; i < t.hr_size; ++i)
            for (int j = 0; j < t.hr_size; ++j)
                ++hits[static_cast<std::size_t>(t.hr_row0 + i) * layout.hr_spec.n_lon + t.hr_col0 + j];
    for (int h : hits) CHECK(h >= 1);
}

TEST_CASE("tile layout exports as JSON records") {
    const std::string json = tiles_to_json(make_tile_grid(desk_layout(80)));
    CHECK(json.find("\"hr_row0\"") != std::string::npos);
    CHECK(json.find("\"lr_size\"") != std::string::npos);
}
