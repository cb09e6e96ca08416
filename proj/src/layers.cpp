#include "gridsr/layers.hpp"

#include <array>
#include <cmath>

namespace gridsr::nn {

std::vector<double> uniform_init(Rng& rng, i64 n, double bound) {
    std::vector<double> v(n);
    for (double& x : v) x = bound * (2.0 * rng.next_double() - 1.0);
    return v;
}

Linear::Linear(ParamStore& store, const std::string& name, i64 in, i64 out, Rng& rng,
               bool zero_init) {
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    W = store.create(name + ".weight", {in, out},
                     zero_init ? std::vector<double>(in * out, 0.0) : uniform_init(rng, in * out, bound));
    b = store.create(name + ".bias", {out}, std::vector<double>(out, 0.0));
}

Tensor Linear::forward(const Tensor& x2d) const { return add_bias_last(matmul(x2d, W), b); }

Conv2d::Conv2d(ParamStore& store, const std::string& name, i64 in, i64 out, i64 k, i64 pad_,
               i64 stride_, Rng& rng, bool zero_init)
    : pad(pad_), stride(stride_) {
    const i64 n = out * in * k * k;
    const double bound = std::sqrt(6.0 / static_cast<double>(in * k * k + out * k * k));
    W = store.create(name + ".weight", {out, in, k, k},
                     zero_init ? std::vector<double>(n, 0.0) : uniform_init(rng, n, bound));
    b = store.create(name + ".bias", {out}, std::vector<double>(out, 0.0));
}

Tensor Conv2d::forward(const Tensor& x) const { return conv2d(x, W, b, pad, stride); }

ConvTranspose2x2::ConvTranspose2x2(ParamStore& store, const std::string& name, i64 in, i64 out,
                                   Rng& rng) {
    const i64 n = in * out * 4;
    const double bound = std::sqrt(6.0 / static_cast<double>(in * 4 + out * 4));
    W = store.create(name + ".weight", {in, out, 2, 2}, uniform_init(rng, n, bound));
    b = store.create(name + ".bias", {out}, std::vector<double>(out, 0.0));
}

Tensor ConvTranspose2x2::forward(const Tensor& x) const { return conv_transpose2x2(x, W, b); }

LayerNorm::LayerNorm(ParamStore& store, const std::string& name, i64 dim) {
    gamma = store.create(name + ".gamma", {dim}, std::vector<double>(dim, 1.0));
    beta = store.create(name + ".beta", {dim}, std::vector<double>(dim, 0.0));
}

Tensor LayerNorm::forward(const Tensor& x) const { return layernorm_lastdim(x, gamma, beta); }

BatchNorm2d::BatchNorm2d(ParamStore& store, const std::string& name, i64 channels) {
    gamma = store.create(name + ".gamma", {channels}, std::vector<double>(channels, 1.0));
    beta = store.create(name + ".beta", {channels}, std::vector<double>(channels, 0.0));
    running_mean = store.create(name + ".running_mean", {channels},
                                std::vector<double>(channels, 0.0), /*trainable=*/false);
    running_var = store.create(name + ".running_var", {channels},
                               std::vector<double>(channels, 1.0), /*trainable=*/false);
}

Tensor BatchNorm2d::forward(const Tensor& x, bool training) const {
    return batchnorm2d(x, gamma, beta, const_cast<std::vector<double>&>(running_mean.values()),
                       const_cast<std::vector<double>&>(running_var.values()), momentum, eps,
                       training);
}

StatsEmbed::StatsEmbed(ParamStore& store, const std::string& name, i64 h_, i64 w_, Rng& rng)
    : h(h_), w(w_) {
    fc = Linear(store, name, 2, h_ * w_, rng);
}

Tensor StatsEmbed::forward(const Tensor& stats) const {
    if (stats.ndim() != 2 || stats.dim(1) != 2)
        throw ShapeError("StatsEmbed: expected stats [B,2]");
    const i64 B = stats.dim(0);
    return reshape(fc.forward(stats), {B, 1, h, w});
}

Mlp::Mlp(ParamStore& store, const std::string& name, i64 dim, i64 hidden, Rng& rng) {
    fc1 = Linear(store, name + ".fc1", dim, hidden, rng);
    fc2 = Linear(store, name + ".fc2", hidden, dim, rng);
}

Tensor Mlp::forward(const Tensor& x2d) const { return fc2.forward(relu(fc1.forward(x2d))); }

WindowAttention::WindowAttention(ParamStore& store, const std::string& name, i64 dim, i64 heads_,
                                 i64 window_, Rng& rng)
    : heads(heads_), window(window_) {
    if (dim % heads_ != 0)
        throw ConfigError("WindowAttention: heads must divide embed dim (" + std::to_string(dim) +
                          " / " + std::to_string(heads_) + ")");
    qkv = Linear(store, name + ".qkv", dim, 3 * dim, rng);
    proj = Linear(store, name + ".proj", dim, dim, rng);
    const i64 span = 2 * window_ - 1;
    std::vector<double> table(span * span * heads_);
    for (double& v : table) v = 0.02 * rng.next_normal();
    rel_pos_table = store.create(name + ".rel_pos_table", {span * span, heads_}, std::move(table));
    logit_scale = store.create(name + ".logit_scale", {heads_},
                               std::vector<double>(heads_, std::log(10.0)));
    const i64 T = window_ * window_;
    rel_index.resize(T * T);
    for (i64 a = 0; a < T; ++a) {
        const i64 ra = a / window_, ca = a % window_;
        for (i64 bidx = 0; bidx < T; ++bidx) {
            const i64 rb = bidx / window_, cb = bidx % window_;
            rel_index[a * T + bidx] = (ra - rb + window_ - 1) * span + (ca - cb + window_ - 1);
        }
    }
}

Tensor WindowAttention::forward(const Tensor& tokens, const std::vector<double>* mask,
                                i64 n_windows) const {
    const i64 N = tokens.dim(0), T = tokens.dim(1), C = tokens.dim(2);
    Tensor flat = reshape(tokens, {N * T, C});
    Tensor qkv_out = qkv.forward(flat); // [N*T, 3C]
    auto [q, k, v] = split_qkv(qkv_out, N, T, heads);
    Tensor logits = bmm_bt(l2normalize_lastdim(q), l2normalize_lastdim(k));
    logits = scale_by_head_exp(logits, logit_scale, heads, std::log(100.0));
    logits = add_rel_pos_bias(logits, rel_pos_table, rel_index, heads);
    if (mask && !mask->empty()) logits = add_window_mask(logits, *mask, n_windows, heads);
    Tensor attn = softmax_lastdim(logits);
    Tensor out = merge_heads(bmm(attn, v), heads); // [N*T, C]
    return reshape(proj.forward(out), {N, T, C});
}

std::vector<double> make_shift_mask(i64 H, i64 W, i64 window, i64 shift) {
    const i64 nh = H / window, nw = W / window, T = window * window;
    std::vector<int> canvas(H * W);
    auto bands = [&](i64 n) {
        // region boundaries: [0, n-window), [n-window, n-shift), [n-shift, n)
        return std::array<i64, 4>{0, n - window, n - shift, n};
    };
    const auto hb = bands(H);
    const auto wb = bands(W);
    int id = 0;
    for (int hi = 0; hi < 3; ++hi)
        for (int wi = 0; wi < 3; ++wi) {
            for (i64 i = std::max<i64>(hb[hi], 0); i < hb[hi + 1]; ++i)
                for (i64 j = std::max<i64>(wb[wi], 0); j < wb[wi + 1]; ++j)
                    canvas[i * W + j] = id;
            ++id;
        }
    // Shift the canvas exactly as the feature map is shifted, then compare
    // region ids within each window.
    auto wrap = [](i64 v, i64 n) { return ((v % n) + n) % n; };
    std::vector<int> shifted(H * W);
    for (i64 i = 0; i < H; ++i)
        for (i64 j = 0; j < W; ++j)
            shifted[i * W + j] = canvas[wrap(i + shift, H) * W + wrap(j + shift, W)];
    std::vector<double> mask(nh * nw * T * T, 0.0);
    for (i64 wh = 0; wh < nh; ++wh)
        for (i64 ww = 0; ww < nw; ++ww) {
            const i64 win = wh * nw + ww;
            for (i64 a = 0; a < T; ++a)
                for (i64 b = 0; b < T; ++b) {
                    const int ida = shifted[(wh * window + a / window) * W + ww * window + a % window];
                    const int idb = shifted[(wh * window + b / window) * W + ww * window + b % window];
                    if (ida != idb) mask[(win * T + a) * T + b] = -1e9;
                }
        }
    return mask;
}

SwinBlock::SwinBlock(ParamStore& store, const std::string& name, i64 dim, i64 heads, i64 window_,
                     i64 height_, i64 width_, bool shifted, i64 mlp_ratio, Rng& rng)
    : window(window_), height(height_), width(width_) {
    if (height_ % window_ != 0 || width_ % window_ != 0)
        throw ConfigError("SwinBlock: window " + std::to_string(window_) +
                          " must divide spatial dims " + std::to_string(height_) + "x" +
                          std::to_string(width_));
    shift = shifted ? window_ / 2 : 0;
    ln1 = LayerNorm(store, name + ".ln1", dim);
    attn = WindowAttention(store, name + ".attn", dim, heads, window_, rng);
    ln2 = LayerNorm(store, name + ".ln2", dim);
    mlp = Mlp(store, name + ".mlp", dim, dim * mlp_ratio, rng);
    if (shift > 0 && (height_ > window_ || width_ > window_))
        mask = make_shift_mask(height_, width_, window_, shift);
}

Tensor SwinBlock::forward(const Tensor& x) const {
    const i64 B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    if (H != height || W != width)
        throw ShapeError("SwinBlock: built for " + std::to_string(height) + "x" +
                         std::to_string(width) + ", got " + shape_str(x.shape()));
    Tensor h = shift > 0 ? roll_hw(x, -shift, -shift) : x;
    Tensor win = to_windows(h, window); // [B*nW, T, C]
    const i64 n_windows = (H / window) * (W / window);
    Tensor a = attn.forward(ln1.forward(win), mask.empty() ? nullptr : &mask, n_windows);
    win = add(win, a);
    const i64 NT = win.dim(0) * win.dim(1);
    Tensor m = reshape(mlp.forward(reshape(ln2.forward(win), {NT, C})), win.shape());
    win = add(win, m);
    Tensor y = from_windows(win, B, C, H, W, window);
    return shift > 0 ? roll_hw(y, shift, shift) : y;
}

DoubleConv::DoubleConv(ParamStore& store, const std::string& name, i64 in, i64 out, Rng& rng) {
    c1 = Conv2d(store, name + ".conv1", in, out, 3, 1, 1, rng);
    bn1 = BatchNorm2d(store, name + ".bn1", out);
    c2 = Conv2d(store, name + ".conv2", out, out, 3, 1, 1, rng);
    bn2 = BatchNorm2d(store, name + ".bn2", out);
}

Tensor DoubleConv::forward(const Tensor& x, bool training) const {
    Tensor h = relu(bn1.forward(c1.forward(x), training));
    return relu(bn2.forward(c2.forward(h), training));
}

} // namespace gridsr::nn
