#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "gridsr/grid.hpp"

namespace gridsr::metrics {

double rmse(std::span<const double> pred, std::span<const double> ref);
double mae(std::span<const double> pred, std::span<const double> ref);
// mean(pred - ref); positive values indicate overestimation.
double bias(std::span<const double> pred, std::span<const double> ref);

// Whole-field SSIM from global population moments (no sliding window).
struct SSIMParams {
    double c1 = 0.0;
    double c2 = 0.0;

    // C1 = (0.01 L)^2, C2 = (0.03 L)^2 for data dynamic range L.
    static SSIMParams from_range(double L);
};

double ssim(std::span<const double> pred, std::span<const double> ref, const SSIMParams& params);

struct PSNRParams {
    double max_value = 255.0;
};

// +infinity sentinel when pred == ref.
double psnr(std::span<const double> pred, std::span<const double> ref, const PSNRParams& params);

double rmse(const Field& pred, const Field& ref);
double mae(const Field& pred, const Field& ref);
double bias(const Field& pred, const Field& ref);
double ssim(const Field& pred, const Field& ref, const SSIMParams& params);
double psnr(const Field& pred, const Field& ref, const PSNRParams& params);

//----------------------------------------------------------------------------
// Per-gridbox metric maps over the time axis
//----------------------------------------------------------------------------

struct MetricMaps {
    Field bias;
    Field rmse;
    Field rmse_over_std;
    // Cells where the reference temporal standard deviation is zero;
    // rmse_over_std is undefined there (reported explicitly, never NaN).
    std::vector<std::uint8_t> undefined;

    std::size_t undefined_count() const;
};

MetricMaps gridbox_maps(const std::vector<Field>& pred, const std::vector<Field>& ref);

//----------------------------------------------------------------------------
// Seasonal-by-method tables
//----------------------------------------------------------------------------

inline constexpr std::array<const char*, 5> kTableColumns = {"DJF", "MAM", "JJA", "SON", "Annual"};
inline constexpr std::array<const char*, 5> kTableMetrics = {"RMSE", "MAE", "Bias", "SSIM", "PSNR"};

struct MetricTable {
    struct Cell {
        double value = 0.0;
        bool defined = false;
        bool best = false;
        bool tie = false; // best shared at 2-decimal rounding
    };

    std::vector<std::string> methods;
    // cells[metric][method][column]; metric/column order as in the constants.
    std::vector<std::vector<std::array<Cell, 5>>> cells;
    double range_L = 0.0;   // reference max - min, drives SSIM C1/C2 and PSNR MAX
    std::string aggregation =
        "RMSE/MAE/Bias: per-gridbox over time, then spatial mean; "
        "SSIM/PSNR: per-timestep whole-field, then time mean";
};

// Aggregates each method against the reference. RMSE/MAE/Bias are computed
// per gridbox over the column's timesteps then spatially averaged; SSIM and
// PSNR per timestep then time-averaged. Annual uses all timestamps, not the
// mean of the seasonal cells.
MetricTable seasonal_table(const std::vector<std::pair<std::string, const std::vector<Field>*>>& methods,
                           const std::vector<Field>& ref);

} // namespace gridsr::metrics
