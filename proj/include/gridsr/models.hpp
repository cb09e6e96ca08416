#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gridsr/layers.hpp"
#include "gridsr/normalization.hpp"

namespace gridsr::models {

using nn::i64;
using nn::Tensor;

enum class Architecture { Bicubic, UNet, DeepESD, SwinFull, SwinTile };

const char* architecture_name(Architecture a);
Architecture architecture_from_name(const std::string& name);

struct SwinParams {
    i64 window = 10;
    i64 embed_dim = 96;
    i64 heads = 6;
    i64 mlp_ratio = 2;
    std::vector<i64> depths = {4, 4};
};

struct ModelConfig {
    Architecture arch = Architecture::SwinFull;
    int scale_factor = 4;
    NormVariant normalization = NormVariant::LrBicubic;

    // Full-domain shapes: LR input dims and HR output dims. The network crops
    // features to hr/4 so the x4 upscaling path lands exactly on the output.
    int lr_n_lat = 57, lr_n_lon = 81;
    int hr_n_lat = 200, hr_n_lon = 320;

    // Tile shapes: fixed LR context window and HR covariate window.
    int tile_size = 40;
    int lr_window = 13;
    int cov_window = 52;

    SwinParams swin;
    i64 unet_base = 64;
    std::vector<i64> deepesd_channels = {32, 16, 1};
    std::vector<i64> deepesd_strides = {2, 2, 1};

    void validate() const;
    std::string to_json() const;
    static ModelConfig from_json(const std::string& text);
};

// Prepared batch (all tensors grad-free constants).
struct BatchInputs {
    Tensor input;         // SwinFull/SwinTile: normalized LR [B,1,h,w];
                          // UNet/DeepESD: normalized bicubic-at-HR [B,1,H,W]
    Tensor stats;         // [B,2] raw (mu, sigma)
    Tensor lr_covariates; // [B,2,lw,lw], SwinTile only
    Tensor hr_covariates; // [B,2,cw,cw], SwinTile only
};

// Named intermediate shapes recorded during a forward pass (tests inspect
// stage contracts through this).
struct ForwardTrace {
    std::vector<std::pair<std::string, nn::Shape>> shapes;

    void record(const std::string& name, const Tensor& t) { shapes.emplace_back(name, t.shape()); }
    const nn::Shape* find(const std::string& name) const {
        for (const auto& [n, s] : shapes)
            if (n == name) return &s;
        return nullptr;
    }
};

// All architectures share the residual-over-bicubic contract: forward yields
// the normalized residual; the pipeline assembles bicubic + sigma * residual.
class Model {
public:
    explicit Model(ModelConfig cfg) : config_(std::move(cfg)) {}
    virtual ~Model() = default;

    virtual Tensor forward(const BatchInputs& in, bool training, ForwardTrace* trace = nullptr) = 0;
    virtual std::string final_layer_name() const = 0;

    const ModelConfig& config() const { return config_; }
    nn::ParamStore& params() { return params_; }
    const nn::ParamStore& params() const { return params_; }
    i64 parameter_count() const { return params_.total_parameters(); }

    // Zeroes the residual head; the pipeline then reproduces the bicubic
    // baseline exactly.
    void zero_final_layer();

protected:
    ModelConfig config_;
    nn::ParamStore params_;
};

std::unique_ptr<Model> build_model(const ModelConfig& config, std::uint64_t seed);

// Reference configuration sized for the 57x81 -> 200x320 domain.
ModelConfig reference_config(Architecture arch);
// Reduced widths/depths for desk-scale runs on an HR domain of the given
// size (embed_dim 32 and small conv widths).
ModelConfig desk_config(Architecture arch, int hr_n_lat, int hr_n_lon, int scale_factor = 4);

} // namespace gridsr::models
