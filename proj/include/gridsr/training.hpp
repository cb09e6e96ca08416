#pragma once

#include <span>
#include <vector>

#include "gridsr/checkpoint.hpp"
#include "gridsr/pipeline.hpp"
#include "gridsr/sampling.hpp"

namespace gridsr::train {

struct CharbonnierParams {
    double epsilon = 1e-3;
};

// mean(sqrt((pred-target)^2 + eps^2)), the scalar form used by tests and
// validation; the autodiff form is nn::charbonnier_loss.
double charbonnier(std::span<const double> pred, std::span<const double> target, double epsilon);

// True iff the best validation loss has not improved by at least min_rel
// (relative to the running best) within the last `patience` epochs.
bool early_stop(const std::vector<double>& val_history, nn::i64 patience, double min_rel);

enum class SamplingMode { Uniform, Weighted };

struct TrainConfig {
    nn::i64 batch_size = 16;
    double learning_rate = 1e-4;
    nn::i64 max_epochs = 100;
    nn::i64 steps_per_epoch = 0; // 0: one pass over the training samples
    nn::i64 patience = 10;
    double min_rel_improvement = 0.01;
    std::uint64_t seed = 0;
    SamplingMode sampling = SamplingMode::Uniform;
    CharbonnierParams charbonnier;
    nn::i64 max_val_samples = 64; // evenly strided validation subset

    void validate() const;
};

struct Adam {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void step(nn::ParamStore& params);

private:
    nn::i64 t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

struct TrainResult {
    Checkpoint checkpoint; // best-validation snapshot
    std::vector<double> train_history;
    std::vector<double> val_history;
    nn::i64 best_epoch = 0;
    bool aborted_nan = false;
    bool stopped_early = false;
};

// Optimizes the model on the normalized residuals with Charbonnier loss,
// records per-epoch history, and returns the best-validation checkpoint.
// Deterministic given seed for any thread count. `resume` continues history
// and best tracking from an earlier run.
TrainResult train_model(models::Model& model, const PairedDataset& data, const TrainConfig& config,
                        pipeline::TilingMode mode, const Checkpoint* resume = nullptr);

} // namespace gridsr::train
