#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gridsr/models.hpp"

namespace gridsr {

struct ParamBlob {
    std::string name;
    nn::Shape shape;
    bool trainable = true;
    std::vector<double> values;
};

// Self-describing training artifact: config JSON + named parameter arrays
// (including non-trainable buffers such as batch-norm running statistics),
// training history, and enough fingerprints to re-run bit-compatibly.
struct Checkpoint {
    int version = 1;
    models::ModelConfig config;
    std::string tiling_mode = "full"; // full | tiles | patches
    GridSpec lr_grid;                 // input grid the model was trained on
    GridSpec hr_grid;                 // target grid predictions are placed on
    TimeSplit split;                  // year ranges used for train/val/test
    std::vector<double> train_history;
    std::vector<double> val_history;
    std::uint64_t seed = 0;
    std::uint64_t data_fingerprint = 0;
    std::vector<ParamBlob> params;

    std::uint64_t param_hash() const;
    nn::i64 parameter_count() const;
};

Checkpoint snapshot_model(const models::Model& model);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Copies parameter arrays into a model built from the same config.
void apply_params(models::Model& model, const Checkpoint& ckpt);
std::unique_ptr<models::Model> model_from_checkpoint(const Checkpoint& ckpt);

} // namespace gridsr
