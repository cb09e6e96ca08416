#pragma once

#include <cstdint>
#include <vector>

#include "gridsr/grid.hpp"
#include "gridsr/tiling.hpp"

namespace gridsr {

// Per-patch covariate standard deviations and the weights derived from them.
// raw_i = sum_j sigma_ij + (1 - mean_k sum_j sigma_kj); raw weights can be
// zero or negative, so final weights are max(raw, 1e-6) renormalized to a
// probability distribution.
struct SampleWeighting {
    std::vector<std::vector<double>> sigma; // N patches x n covariables
    std::vector<double> raw;                // before floor + renormalization
    std::vector<double> weights;            // nonnegative, sums to 1

    std::size_t patch_count() const { return weights.size(); }
    std::size_t covariable_count() const { return sigma.empty() ? 0 : sigma.front().size(); }
};

inline constexpr double kWeightFloor = 1e-6;

SampleWeighting compute_patch_weights(const std::vector<std::vector<double>>& sigma);

// Standard deviation of each standardized covariate (z-scored over the full
// HR domain) within each tile's HR window; feeds compute_patch_weights.
std::vector<std::vector<double>> covariate_patch_sigmas(const StaticCovariates& covariates,
                                                        const std::vector<TileRegion>& tiles);

// Stream of (timestamp, patch_index): patch indices i.i.d. from the weight
// distribution, timestamps cycled in seeded shuffled order. Deterministic
// given seed.
class WeightedSampleStream {
public:
    WeightedSampleStream(SampleWeighting weighting, std::vector<TimeStamp> timestamps,
                         std::uint64_t seed);

    std::pair<TimeStamp, std::size_t> next();

private:
    void reshuffle();

    SampleWeighting weighting_;
    std::vector<double> cumulative_;
    std::vector<TimeStamp> timestamps_;
    std::size_t cursor_ = 0;
    Rng rng_;
};

} // namespace gridsr
