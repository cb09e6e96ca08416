#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridsr/common.hpp"
#include "gridsr/tensor.hpp"

namespace gridsr::nn {

// Parameter initialization is deterministic given the Rng stream; layers pull
// their weights from the shared ParamStore under a dotted name prefix.

std::vector<double> uniform_init(Rng& rng, i64 n, double bound);

struct Linear {
    Tensor W; // [in, out]
    Tensor b; // [out]

    Linear() = default;
    Linear(ParamStore& store, const std::string& name, i64 in, i64 out, Rng& rng,
           bool zero_init = false);
    Tensor forward(const Tensor& x2d) const; // [M,in] -> [M,out]
};

struct Conv2d {
    Tensor W; // [O, C, k, k]
    Tensor b; // [O]
    i64 pad = 0;
    i64 stride = 1;

    Conv2d() = default;
    Conv2d(ParamStore& store, const std::string& name, i64 in, i64 out, i64 k, i64 pad, i64 stride,
           Rng& rng, bool zero_init = false);
    Tensor forward(const Tensor& x) const;
};

struct ConvTranspose2x2 {
    Tensor W; // [C, O, 2, 2]
    Tensor b; // [O]

    ConvTranspose2x2() = default;
    ConvTranspose2x2(ParamStore& store, const std::string& name, i64 in, i64 out, Rng& rng);
    Tensor forward(const Tensor& x) const;
};

struct LayerNorm {
    Tensor gamma, beta;

    LayerNorm() = default;
    LayerNorm(ParamStore& store, const std::string& name, i64 dim);
    Tensor forward(const Tensor& x) const;
};

struct BatchNorm2d {
    Tensor gamma, beta;
    Tensor running_mean, running_var; // non-trainable buffers
    double momentum = 0.1;
    double eps = 1e-5;

    BatchNorm2d() = default;
    BatchNorm2d(ParamStore& store, const std::string& name, i64 channels);
    Tensor forward(const Tensor& x, bool training) const;
};

// Affine map from the per-sample (mu, sigma) pair to one extra input channel.
struct StatsEmbed {
    Linear fc;
    i64 h = 0, w = 0;

    StatsEmbed() = default;
    StatsEmbed(ParamStore& store, const std::string& name, i64 h, i64 w, Rng& rng);
    Tensor forward(const Tensor& stats) const; // [B,2] -> [B,1,h,w]
};

struct Mlp {
    Linear fc1, fc2;

    Mlp() = default;
    Mlp(ParamStore& store, const std::string& name, i64 dim, i64 hidden, Rng& rng);
    Tensor forward(const Tensor& x2d) const;
};

// Swin v2 style windowed multi-head self-attention: scaled-cosine attention
// with a learned per-head logit scale (clamped at ln 100) plus a learned
// relative position bias table.
struct WindowAttention {
    Linear qkv, proj;
    Tensor rel_pos_table; // [(2w-1)^2, heads]
    Tensor logit_scale;   // [heads]
    i64 heads = 1;
    i64 window = 0;
    std::vector<i64> rel_index; // [T*T]

    WindowAttention() = default;
    WindowAttention(ParamStore& store, const std::string& name, i64 dim, i64 heads, i64 window,
                    Rng& rng);
    // tokens [N, T, C]; mask (optional) is [n_windows, T, T] additive.
    Tensor forward(const Tensor& tokens, const std::vector<double>* mask, i64 n_windows) const;
};

// Pre-norm transformer block on non-overlapping (optionally cyclically
// shifted) windows; resolution is fixed at construction so the shift mask is
// precomputed.
struct SwinBlock {
    LayerNorm ln1, ln2;
    WindowAttention attn;
    Mlp mlp;
    i64 window = 0;
    i64 shift = 0;
    i64 height = 0, width = 0;
    std::vector<double> mask; // empty when unshifted

    SwinBlock() = default;
    SwinBlock(ParamStore& store, const std::string& name, i64 dim, i64 heads, i64 window,
              i64 height, i64 width, bool shifted, i64 mlp_ratio, Rng& rng);
    Tensor forward(const Tensor& x) const; // [B,C,H,W] -> same shape
};

// (conv 3x3 + batch-norm + ReLU) x2, the UNet building block.
struct DoubleConv {
    Conv2d c1, c2;
    BatchNorm2d bn1, bn2;

    DoubleConv() = default;
    DoubleConv(ParamStore& store, const std::string& name, i64 in, i64 out, Rng& rng);
    Tensor forward(const Tensor& x, bool training) const;
};

// Shift-window attention mask for an HxW canvas (standard region-id scheme);
// returns [n_windows, T, T] additive values in {0, -1e9}.
std::vector<double> make_shift_mask(i64 H, i64 W, i64 window, i64 shift);

} // namespace gridsr::nn
