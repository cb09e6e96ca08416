#include "gridsr/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace gridsr {

SampleWeighting compute_patch_weights(const std::vector<std::vector<double>>& sigma) {
    const std::size_t N = sigma.size();
    if (N == 0) throw DomainError("compute_patch_weights: need at least one patch");
    const std::size_t n = sigma.front().size();
    if (n == 0) throw DomainError("compute_patch_weights: need at least one covariable");
    for (const auto& row : sigma) {
        if (row.size() != n)
            throw DomainError("compute_patch_weights: ragged sigma matrix");
        for (double s : row)
            if (!(s >= 0.0))
                throw DomainError("compute_patch_weights: negative standard deviation");
    }

    SampleWeighting out;
    out.sigma = sigma;
    out.raw.resize(N);
    double total = 0.0;
    std::vector<double> row_sums(N);
    for (std::size_t i = 0; i < N; ++i) {
        double s = 0.0;
        for (double v : sigma[i]) s += v;
        row_sums[i] = s;
        total += s;
    }
    const double mean_total = total / static_cast<double>(N);
    for (std::size_t i = 0; i < N; ++i) out.raw[i] = row_sums[i] + (1.0 - mean_total);

    out.weights.resize(N);
    double wsum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        out.weights[i] = std::max(out.raw[i], kWeightFloor);
        wsum += out.weights[i];
    }
    for (double& w : out.weights) w /= wsum;
    return out;
}

std::vector<std::vector<double>> covariate_patch_sigmas(const StaticCovariates& covariates,
                                                        const std::vector<TileRegion>& tiles) {
    covariates.validate();
    const Field* fields[2] = {&covariates.hr_orography, &covariates.hr_landsea};
    // Standardize each covariate over the full HR domain so meters and
    // fractions are commensurable when summed.
    double mean[2], invstd[2];
    for (int c = 0; c < 2; ++c) {
        const auto& v = fields[c]->values;
        double s = 0.0;
        for (double x : v) s += x;
        mean[c] = s / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean[c]) * (x - mean[c]);
        const double sd = std::sqrt(ss / static_cast<double>(v.size()));
        invstd[c] = sd > 0.0 ? 1.0 / sd : 0.0;
    }

    std::vector<std::vector<double>> sigma(tiles.size(), std::vector<double>(2));
    for (std::size_t k = 0; k < tiles.size(); ++k) {
        const TileRegion& t = tiles[k];
        for (int c = 0; c < 2; ++c) {
            const Field& f = *fields[c];
            double s = 0.0, ss = 0.0;
            const double n = static_cast<double>(t.hr_size) * t.hr_size;
            for (int i = 0; i < t.hr_size; ++i)
                for (int j = 0; j < t.hr_size; ++j) {
                    const double z = (f.at(t.hr_row0 + i, t.hr_col0 + j) - mean[c]) * invstd[c];
                    s += z;
                    ss += z * z;
                }
            const double m = s / n;
            sigma[k][c] = std::sqrt(std::max(0.0, ss / n - m * m));
        }
    }
    return sigma;
}

WeightedSampleStream::WeightedSampleStream(SampleWeighting weighting,
                                           std::vector<TimeStamp> timestamps, std::uint64_t seed)
    : weighting_(std::move(weighting)), timestamps_(std::move(timestamps)), rng_(seed) {
    if (weighting_.weights.empty())
        throw DomainError("WeightedSampleStream: empty weighting");
    if (timestamps_.empty())
        throw DomainError("WeightedSampleStream: empty timestamp set");
    double acc = 0.0;
    for (double w : weighting_.weights) {
        if (w < 0.0) throw DomainError("WeightedSampleStream: negative weight");
        acc += w;
        cumulative_.push_back(acc);
    }
    if (std::abs(acc - 1.0) > 1e-9)
        throw DomainError("WeightedSampleStream: weights must sum to 1");
    cumulative_.back() = 1.0;
    reshuffle();
}

void WeightedSampleStream::reshuffle() {
    for (std::size_t i = timestamps_.size(); i > 1; --i)
        std::swap(timestamps_[i - 1], timestamps_[rng_.next_below(i)]);
    cursor_ = 0;
}

std::pair<TimeStamp, std::size_t> WeightedSampleStream::next() {
    if (cursor_ >= timestamps_.size()) reshuffle();
    const TimeStamp ts = timestamps_[cursor_++];
    const double u = rng_.next_double();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const std::size_t patch = std::min<std::size_t>(
        static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
    return {ts, patch};
}

} // namespace gridsr
