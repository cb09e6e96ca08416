#pragma once

#include <cstdint>

#include "gridsr/grid.hpp"

namespace gridsr {

// Synthetic paired-grid generator for desk-scale verification. The HR field
// is a spatially constant seasonal cycle plus a lapse-rate term proportional
// to a procedural orography plus coherent (spatially smooth) noise; the LR
// field is the exact block mean of the HR field over scale_factor blocks.
// Covariates are emitted at both resolutions, LR as block means of HR.
// Deterministic given seed.
struct SyntheticConfig {
    GridSpec hr_spec{47.0, -6.0, -0.05, 0.05, 80, 80};
    int scale_factor = 4;
    std::int64_t n_timesteps = 100;
    std::uint64_t seed = 0;
    TimeStamp start_time = 473385600; // 1985-01-01T00:00Z
    int step_hours = 3;               // multiple of 3

    double base_mean = 287.0;        // Kelvin
    double seasonal_amplitude = 8.0; // Kelvin, annual cycle
    double lapse_rate = 0.0065;      // Kelvin per meter, subtracted over orography
    double orography_height = 1200.0; // meters; 0 gives constant (flat) orography
    double noise_amplitude = 0.8;    // Kelvin; 0 disables noise
    int noise_modes = 6;             // random sinusoid modes per timestep
};

struct SyntheticDataset {
    std::vector<Field> lr;
    std::vector<Field> hr;
    StaticCovariates covariates;
};

SyntheticDataset generate_synthetic(const SyntheticConfig& config);

// Exact block mean over scale x scale cells; also used for LR covariates.
Field block_mean(const Field& hr, int scale);

// The coarse grid spec induced by block-meaning a fine grid.
GridSpec block_mean_spec(const GridSpec& hr, int scale);

} // namespace gridsr
