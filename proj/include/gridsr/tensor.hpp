#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gridsr/common.hpp"

namespace gridsr::nn {

using i64 = std::int64_t;
using Shape = std::vector<i64>;

i64 numel_of(const Shape& s);
std::string shape_str(const Shape& s);

struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad; // allocated lazily by ensure_grad()
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void()> backward_fn;

    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    }
};

// Reverse-mode autodiff handle. Graphs are rebuilt per forward pass; backward
// walks the tape in reverse topological order. All kernels underneath are
// deterministic for any thread count.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double v, bool requires_grad = false);
    static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);

    bool defined() const { return static_cast<bool>(node_); }
    const Shape& shape() const { return node_->shape; }
    i64 dim(int i) const { return node_->shape[static_cast<std::size_t>(i)]; }
    int ndim() const { return static_cast<int>(node_->shape.size()); }
    i64 numel() const { return static_cast<i64>(node_->value.size()); }

    double* data() { return node_->value.data(); }
    const double* data() const { return node_->value.data(); }
    std::vector<double>& values() { return node_->value; }
    const std::vector<double>& values() const { return node_->value; }
    double* grad_data() { node_->ensure_grad(); return node_->grad.data(); }
    const std::vector<double>& grad() const { return node_->grad; }

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool v) { node_->requires_grad = v; }
    void zero_grad() { node_->grad.assign(node_->value.size(), 0.0); }

    double item() const;

    // Runs reverse-mode accumulation from this scalar.
    void backward();

    std::shared_ptr<Node> node() const { return node_; }

private:
    std::shared_ptr<Node> node_;
};

// RAII guard disabling tape construction (inference / validation).
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool prev_;
};

bool grad_enabled();

//----------------------------------------------------------------------------
// Ops
//----------------------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);

// x[..., C] + bias[C]
Tensor add_bias_last(const Tensor& x, const Tensor& bias);
// x[B,C,H,W] + bias[C]
Tensor add_bias_channels(const Tensor& x, const Tensor& bias);

Tensor relu(const Tensor& x);
Tensor gelu(const Tensor& x);

// a[M,K] @ w[K,N]
Tensor matmul(const Tensor& a, const Tensor& w);
// a[N,M,K] @ b[N,K,P]
Tensor bmm(const Tensor& a, const Tensor& b);
// a[N,M,K] @ b[N,P,K]^T
Tensor bmm_bt(const Tensor& a, const Tensor& b);

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, i64 pad, i64 stride = 1);
Tensor conv_transpose2x2(const Tensor& x, const Tensor& w, const Tensor& bias);
Tensor maxpool2x2(const Tensor& x);

Tensor reshape(const Tensor& x, Shape new_shape);
Tensor concat_channels(const std::vector<Tensor>& xs);
// x[B,C,H,W] -> x[B,C,h,w] starting at (i0, j0)
Tensor crop_hw(const Tensor& x, i64 i0, i64 j0, i64 h, i64 w);
Tensor pad_hw(const Tensor& x, i64 top, i64 bottom, i64 left, i64 right);
Tensor roll_hw(const Tensor& x, i64 sh, i64 sw);

Tensor pixel_shuffle(const Tensor& x, i64 r);
Tensor pixel_unshuffle(const Tensor& x, i64 r);

// [B,C,H,W] -> [B*nWin, ws*ws, C] row-major windows; from_windows inverts.
Tensor to_windows(const Tensor& x, i64 ws);
Tensor from_windows(const Tensor& windows, i64 B, i64 C, i64 H, i64 W, i64 ws);

Tensor softmax_lastdim(const Tensor& x);
Tensor l2normalize_lastdim(const Tensor& x, double eps = 1e-12);

Tensor layernorm_lastdim(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

// Per-head scalar on x[N*h, ...]: row block n scaled by exp(min(s[n%h], ln_max)).
Tensor scale_by_head_exp(const Tensor& x, const Tensor& log_scales, i64 n_heads, double ln_max);

// logits[N*h, T, T] += table[index[i*T+j], n%h]
Tensor add_rel_pos_bias(const Tensor& logits, const Tensor& table, const std::vector<i64>& index,
                        i64 n_heads);

// logits[(B*nW)*h, T, T] += mask[w, T, T] with w = (n / h) % nW (no grad to mask)
Tensor add_window_mask(const Tensor& logits, const std::vector<double>& mask, i64 n_windows,
                       i64 n_heads);

Tensor mean_all(const Tensor& x);

// mean(sqrt((pred-target)^2 + eps^2)); target carries no grad.
Tensor charbonnier_loss(const Tensor& pred, const Tensor& target, double eps);

// Attention head plumbing: qkv rows [N*T, 3C] -> three [N*heads, T, dh]
// tensors; merge_heads inverts the head split back to [N*T, C].
std::array<Tensor, 3> split_qkv(const Tensor& qkv, i64 N, i64 T, i64 heads);
Tensor merge_heads(const Tensor& x, i64 heads);

//----------------------------------------------------------------------------
// Batch normalization (running statistics live in caller-owned buffers so
// checkpoints can serialize them)
//----------------------------------------------------------------------------

// training=true normalizes by batch statistics and updates the running
// buffers with the given momentum; training=false uses the frozen buffers.
Tensor batchnorm2d(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                   std::vector<double>& running_mean, std::vector<double>& running_var,
                   double momentum, double eps, bool training);

//----------------------------------------------------------------------------
// Parameters
//----------------------------------------------------------------------------

class ParamStore {
public:
    struct Entry {
        std::string name;
        Tensor tensor;
        bool trainable = true; // false: buffers (e.g. batch-norm running stats)
    };

    Tensor create(const std::string& name, Shape shape, std::vector<double> init,
                  bool trainable = true);
    Tensor get(const std::string& name) const;
    bool has(const std::string& name) const;

    const std::vector<Entry>& entries() const { return entries_; }
    std::vector<Entry>& entries() { return entries_; }

    i64 total_parameters() const;
    void zero_grads();
    std::uint64_t fingerprint() const;

private:
    std::vector<Entry> entries_;
};

} // namespace gridsr::nn
