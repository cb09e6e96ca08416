#include "gridsr/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "gridsr/kernels.hpp"

namespace gridsr::nn {

namespace {

thread_local bool g_grad_enabled = true;

std::shared_ptr<Node> make_node(Shape shape) {
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->value.resize(static_cast<std::size_t>(numel_of(n->shape)));
    return n;
}

bool want_grad(std::initializer_list<const Tensor*> parents) {
    if (!g_grad_enabled) return false;
    for (const Tensor* p : parents)
        if (p->requires_grad()) return true;
    return false;
}

void attach(const std::shared_ptr<Node>& out, std::initializer_list<Tensor> parents,
            std::function<void()> fn) {
    out->requires_grad = true;
    out->parents.reserve(parents.size());
    for (const Tensor& p : parents) out->parents.push_back(p.node());
    out->backward_fn = std::move(fn);
}

inline double sq(double v) { return v * v; }

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

} // namespace

i64 numel_of(const Shape& s) {
    i64 n = 1;
    for (i64 d : s) n *= d;
    return n;
}

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << ")";
    return os.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    auto n = make_node(std::move(shape));
    n->requires_grad = requires_grad && g_grad_enabled;
    return Tensor(n);
}

Tensor Tensor::full(Shape shape, double v, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    std::fill(t.values().begin(), t.values().end(), v);
    return t;
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
    if (numel_of(shape) != static_cast<i64>(data.size()))
        throw ShapeError("Tensor::from_data: " + shape_str(shape) + " does not hold " +
                         std::to_string(data.size()) + " values");
    auto n = make_node(std::move(shape));
    n->value = std::move(data);
    n->requires_grad = requires_grad && g_grad_enabled;
    return Tensor(n);
}

double Tensor::item() const {
    if (numel() != 1) throw ShapeError("Tensor::item: tensor is not scalar");
    return node_->value[0];
}

void Tensor::backward() {
    if (numel() != 1) throw ShapeError("Tensor::backward: root must be scalar");
    // Iterative post-order DFS gives the topological order.
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(node_.get(), 0);
    visited.insert(node_.get());
    while (!stack.empty()) {
        auto& [n, idx] = stack.back();
        if (idx < n->parents.size()) {
            Node* p = n->parents[idx++].get();
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }
    node_->ensure_grad();
    node_->grad[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backward_fn) (*it)->backward_fn();
}

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

bool grad_enabled() { return g_grad_enabled; }

//----------------------------------------------------------------------------
// Elementwise
//----------------------------------------------------------------------------

static void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
}

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    auto out = make_node(a.shape());
    const i64 n = a.numel();
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out->value.data();
    for (i64 i = 0; i < n; ++i) po[i] = pa[i] + pb[i];
    if (want_grad({&a, &b})) {
        Node* on = out.get();
        Node* an = a.node().get();
        Node* bn = b.node().get();
        attach(out, {a, b}, [on, an, bn, n]() {
            if (an->requires_grad) {
                an->ensure_grad();
                for (i64 i = 0; i < n; ++i) an->grad[i] += on->grad[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (i64 i = 0; i < n; ++i) bn->grad[i] += on->grad[i];
            }
        });
    }
    return Tensor(out);
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    auto out = make_node(a.shape());
    const i64 n = a.numel();
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out->value.data();
    for (i64 i = 0; i < n; ++i) po[i] = pa[i] - pb[i];
    if (want_grad({&a, &b})) {
        Node* on = out.get();
        Node* an = a.node().get();
        Node* bn = b.node().get();
        attach(out, {a, b}, [on, an, bn, n]() {
            if (an->requires_grad) {
                an->ensure_grad();
                for (i64 i = 0; i < n; ++i) an->grad[i] += on->grad[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (i64 i = 0; i < n; ++i) bn->grad[i] -= on->grad[i];
            }
        });
    }
    return Tensor(out);
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "mul");
    auto out = make_node(a.shape());
    const i64 n = a.numel();
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out->value.data();
    for (i64 i = 0; i < n; ++i) po[i] = pa[i] * pb[i];
    if (want_grad({&a, &b})) {
        Node* on = out.get();
        Node* an = a.node().get();
        Node* bn = b.node().get();
        attach(out, {a, b}, [on, an, bn, n]() {
            if (an->requires_grad) {
                an->ensure_grad();
                for (i64 i = 0; i < n; ++i) an->grad[i] += on->grad[i] * bn->value[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (i64 i = 0; i < n; ++i) bn->grad[i] += on->grad[i] * an->value[i];
            }
        });
    }
    return Tensor(out);
}

Tensor scale(const Tensor& a, double s) {
    auto out = make_node(a.shape());
    const i64 n = a.numel();
    const double* pa = a.data();
    double* po = out->value.data();
    for (i64 i = 0; i < n; ++i) po[i] = pa[i] * s;
    if (want_grad({&a})) {
        Node* on = out.get();
        Node* an = a.node().get();
        attach(out, {a}, [on, an, n, s]() {
            an->ensure_grad();
            for (i64 i = 0; i < n; ++i) an->grad[i] += on->grad[i] * s;
        });
    }
    return Tensor(out);
}

Tensor add_bias_last(const Tensor& x, const Tensor& bias) {
    const i64 d = bias.numel();
    if (x.numel() % d != 0 || x.dim(x.ndim() - 1) != d)
        throw ShapeError("add_bias_last: bias length must match last dim");
    auto out = make_node(x.shape());
    const i64 rows = x.numel() / d;
    const double* px = x.data();
    const double* pb = bias.data();
    double* po = out->value.data();
    for (i64 r = 0; r < rows; ++r)
        for (i64 j = 0; j < d; ++j) po[r * d + j] = px[r * d + j] + pb[j];
    if (want_grad({&x, &bias})) {
        Node* on = out.get();
        Node* xn = x.node().get();
        Node* bn = bias.node().get();
        attach(out, {x, bias}, [on, xn, bn, rows, d]() {
            if (xn->requires_grad) {
                xn->ensure_grad();
                const i64 n = rows * d;
                for (i64 i = 0; i < n; ++i) xn->grad[i] += on->grad[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (i64 r = 0; r < rows; ++r)
                    for (i64 j = 0; j < d; ++j) bn->grad[j] += on->grad[r * d + j];
            }
        });
    }
    return Tensor(out);
}

Tensor add_bias_channels(const Tensor& x, const Tensor& bias) {
    if (x.ndim() != 4 || bias.numel() != x.dim(1))
        throw ShapeError("add_bias_channels: expected x[B,C,H,W] and bias[C]");
    auto out = make_node(x.shape());
    const i64 B = x.dim(0), C = x.dim(1), hw = x.dim(2) * x.dim(3);
    const double* px = x.data();
    const double* pb = bias.data();
    double* po = out->value.data();
    for (i64 b = 0; b < B; ++b)
        for (i64 c = 0; c < C; ++c) {
            const double bv = pb[c];
            const i64 base = (b * C + c) * hw;
            for (i64 t = 0; t < hw; ++t) po[base + t] = px[base + t] + bv;
        }
    if (want_grad({&x, &bias})) {
        Node* on = out.get();
        Node* xn = x.node().get();
        Node* bn = bias.node().get();
        attach(out, {x, bias}, [on, xn, bn, B, C, hw]() {
            if (xn->requires_grad) {
                xn->ensure_grad();
                const i64 n = B * C * hw;
                for (i64 i = 0; i < n; ++i) xn->grad[i] += on->grad[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (i64 b = 0; b < B; ++b)
                    for (i64 c = 0; c < C; ++c) {
                        double acc = 0.0;
                        const i64 base = (b * C + c) * hw;
                        for (i64 t = 0; t < hw; ++t) acc += on->grad[base + t];
                        bn->grad[c] += acc;
                    }
            }
        });
    }
    return Tensor(out);
}

Tensor relu(const Tensor& x) {
    auto out = make_node(x.shape());
    const i64 n = x.numel();
    const double* px = x.data();
    double* po = out->value.data();
    for (i64 i = 0; i < n; ++i) po[i] = px[i] > 0.0 ? px[i] : 0.0;
    if (want_grad({&x})) {
        Node* on = out.get();
        Node* xn = x.node().get();
        attach(out, {x}, [on, xn, n]() {
            xn->ensure_grad();
            for (i64 i = 0; i < n; ++i)
                if (xn->value[i] > 0.0) xn->grad[i] += on->grad[i];
        });
    }
    return Tensor(out);
}

Tensor gelu(const Tensor& x) {
    auto out = make_node(x.shape());
    const i64 n = x.numel();
    const double* px = x.data();
    double* po = out->value.data();
    for (i64 i = 0; i < n; ++i) po[i] = 0.5 * px[i] * (1.0 + std::erf(px[i] * kInvSqrt2));
    if (want_grad({&x})) {
        Node* on = out.get();
        Node* xn = x.node().get();
        attach(out, {x}, [on, xn, n]() {
            xn->ensure_grad();
            for (i64 i = 0; i < n; ++i) {
                const double v = xn->value[i];
                const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
                const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
                xn->grad[i] += on->grad[i] * (cdf + v * pdf);
            }
        });
    }
    return Tensor(out);
}

//----------------------------------------------------------------------------
// Matrix products
//----------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& w) {
    if (a.ndim() != 2 || w.ndim() != 2 || a.dim(1) != w.dim(0))
        throw ShapeError("matmul: need [M,K]@[K,N], got " + shape_str(a.shape()) + " @ " +
                         shape_str(w.shape()));
    const i64 M = a.dim(0), K = a.dim(1), N = w.dim(1);
    auto out = make_node({M, N});
    kernels::bmm(a.data(), w.data(), out->value.data(), 1, M, K, N, false);
    if (want_grad({&a, &w})) {
        Node* on = out.get();
        Node* an = a.node().get();
        Node* wn = w.node().get();
        attach(out, {a, w}, [on, an, wn, M, K, N]() {
            if (an->requires_grad) {
                an->ensure_grad();
                kernels::bmm_bt(on->grad.data(), wn->value.data(), an->grad.data(), 1, M, N, K, true);
            }
            if (wn->requires_grad) {
                wn->ensure_grad();
                kernels::bmm_at(an->value.data(), on->grad.data(), wn->grad.data(), 1, M, K, N, true);
            }
        });
    }
    return Tensor(out);
}

Tensor bmm(const Tensor& a, const Tensor& b) {
    if (a.ndim() != 3 || b.ndim() != 3 || a.dim(0) != b.dim(0) || a.dim(2) != b.dim(1))
        throw ShapeError("bmm: need [N,M,K]@[N,K,P]");
    const i64 N = a.dim(0), M = a.dim(1), K = a.dim(2), P = b.dim(2);
    auto out = make_node({N, M, P});
    kernels::bmm(a.data(), b.data(), out->value.data(), N, M, K, P, false);
    if (want_grad({&a, &b})) {
        Node* on = out.get();
        Node* an = a.node().get();
        Node* bn = b.node().get();
        attach(out, {a, b}, [on, an, bn, N, M, K, P]() {
            if (an->requires_grad) {
                an->ensure_grad();
                kernels::bmm_bt(on->grad.data(), bn->value.data(), an->grad.data(), N, M, P, K, true);
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                kernels::bmm_at(an->value.data(), on->grad.data(), bn->grad.data(), N, M, K, P, true);
            }
        });
    }
    return Tensor(out);
}

Tensor bmm_bt(const Tensor& a, const Tensor& b) {
    if (a.ndim() != 3 || b.ndim() != 3 || a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2))
        throw ShapeError("bmm_bt: need [N,M,K]@[N,P,K]^T");
    const i64 N = a.dim(0), M = a.dim(1), K = a.dim(2), P = b.dim(1);
    auto out = make_node({N, M, P});
    kernels::bmm_bt(a.data(), b.data(), out->value.data(), N, M, K, P, false);
    if (want_grad({&a, &b})) {
        Node* on = out.get();
        Node* an = a.node().get();
        Node* bn = b.node().get();
        attach(out, {a, b}, [on, an, bn, N, M, K, P]() {
            if (an->requires_grad) {
                an->ensure_grad();
                kernels::bmm(on->grad.data(), bn->value.data(), an->grad.data(), N, M, P, K, true);
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                kernels::bmm_at(on->grad.data(), an->value.data(), bn->grad.data(), N, M, P, K, true);
            }
        });
    }
    return Tensor(out);
}

//----------------------------------------------------------------------------
// Convolutions / pooling
//----------------------------------------------------------------------------

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, i64 pad, i64 stride) {
    if (x.ndim() != 4 || w.ndim() != 4 || x.dim(1) != w.dim(1))
        throw ShapeError("conv2d: need x[B,C,H,W], w[O,C,kh,kw]; got " + shape_str(x.shape()) +
                         ", " + shape_str(w.shape()));
    const i64 B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const i64 O = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    if (bias.numel() != O) throw ShapeError("conv2d: bias length must equal out channels");
    const i64 Ho = kernels::conv_out_dim(H, kh, pad, stride);
    const i64 Wo = kernels::conv_out_dim(W, kw, pad, stride);
    auto out = make_node({B, O, Ho, Wo});
    kernels::conv2d_fwd(x.data(), w.data(), bias.data(), out->value.data(), B, C, H, W, O, kh, kw,
                        pad, stride);
    if (want_grad({&x, &w, &bias})) {
        Node* on = out.get();
        Node* xn = x.node().get();
        Node* wn = w.node().get();
        Node* bn = bias.node().get();
        attach(out, {x, w, bias}, [on, xn, wn, bn, B, C, H, W, O, kh, kw, pad, stride]() {
            if (xn->requires_grad) {
                xn->ensure_grad();
                kernels::conv2d_bwd_input(on->grad.data(), wn->value.data(), xn->grad.data(), B, C,
                                          H, W, O, kh, kw, pad, stride);
            }
            if (wn->requires_grad || bn->requires_grad) {
                wn->ensure_grad();
                bn->ensure_grad();
                kernels::conv2d_bwd_weight(xn->value.data(), on->grad.data(), wn->grad.data(),
                                           bn->grad.data(), B, C, H, W, O, kh, kw, pad, stride);
            }
        });
    }
    return Tensor(out);
}

Tensor conv_transpose2x2(const Tensor& x, const Tensor& w, const Tensor& bias) {
    if (x.ndim() != 4 || w.ndim() != 4 || x.dim(1) != w.dim(0) || w.dim(2) != 2 || w.dim(3) != 2)
        throw ShapeError("conv_transpose2x2: need x[B,C,H,W], w[C,O,2,2]");
    const i64 B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3), O = w.dim(1);
    if (bias.numel() != O) throw ShapeError("conv_transpose2x2: bias length must equal out channels");
    auto out = make_node({B, O, 2 * H, 2 * W});
    kernels::convt2x2_fwd(x.data(), w.data(), bias.data(), out->value.data(), B, C, H, W, O);
    if (want_grad({&x, &w, &bias})) {
        Node* on = out.get();
        Node* xn = x.node().get();
        Node* wn = w.node().get();
        Node* bn = bias.node().get();
        attach(out, {x, w, bias}, [on, xn, wn, bn, B, C, H, W, O]() {
            if (xn->requires_grad) {
                xn->ensure_grad();
                kernels::convt2x2_bwd_input(on->grad.data(), wn->value.data(), xn->grad.data(), B, C,
                                            H, W, O);
            }
            if (wn->requires_grad || bn->requires_grad) {
                wn->ensure_grad();
                bn->ensure_grad();
                kernels::convt2x2_bwd_weight(xn->value.data(), on->grad.data(), wn->grad.data(),
                                             bn->grad.data(), B, C, H, W, O);
            }
        });
    }
    return Tensor(out);
}

Tensor maxpool2x2(const Tensor& x) {
    if (x.ndim() != 4 || x.dim(2) % 2 != 0 || x.dim(3) % 2 != 0)
        throw ShapeError("maxpool2x2: spatial dims must be even, got " + shape_str(x.shape()));
    const i64 B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    auto out = make_node({B, C, H / 2, W / 2});
    auto argmax = std::make_shared<std::vector<std::uint8_t>>(out->value.size());
    kernels::maxpool2x2_fwd(x.data(), out->value.data(), argmax->data(), B, C, H, W);
    if (want_grad({&x})) {
        Node* on = out.get();
        Node* xn = x.node().get();
        attach(out, {x}, [on, xn, argmax, B, C, H, W]() {
            xn->ensure_grad();
            kernels::maxpool2x2_bwd(on->grad.data(), argmax->data(), xn->grad.data(), B, C, H, W);
        });
    }
    return Tensor(out);
}

//----------------------------------------------------------------------------
// Shape moves
//----------------------------------------------------------------------------

Tensor reshape(const Tensor& x, Shape new_shape) {
    if (numel_of(new_shape) != x.numel())
        throw ShapeError("reshape: element count mismatch " + shape_str(x.shape()) + " -> " +
                         shape_str(new_shape));
    auto out = make_node(std::move(new_shape));
    out->value = x.values();
    if (want_grad({&x})) {
        Node* on = out.get();
        Node* xn = x.node().get();
        attach(out, {x}, [on, xn]() {
            xn->ensure_grad();
            const i64 n = static_cast<i64>(xn->grad.size());
            for (i64 i = 0; i < n; ++i) xn->grad[i] += on->grad[i];
        });
    }
    return Tensor(out);
}

Tensor concat_channels(const std::vector<Tensor>& xs) {
    if (xs.empty()) throw ShapeError("concat_channels: empty input list");
    const i64 B = xs[0].dim(0), H = xs[0].dim(2), W = xs[0].dim(3);
    i64 C = 0;
    for (const Tensor& t : xs) {
        if (t.ndim() != 4 || t.dim(0) != B || t.dim(2) != H || t.dim(3) != W)
            throw ShapeError("concat_channels: incompatible shapes");
        C += t.dim(1);
    }
    auto out = make_node({B, C, H, W});
    const i64 hw = H * W;
    i64 c0 = 0;
    for (const Tensor& t : xs) {
        const i64 ci = t.dim(1);
        for (i64 b = 0; b < B; ++b)
            std::copy(t.data() + b * ci * hw, t.data() + (b + 1) * ci * hw,
                      out->value.data() + (b * C + c0) * hw);
        c0 += ci;
    }
    bool track = false;
    if (g_grad_enabled)
        for (const Tensor& t : xs)
            if (t.requires_grad()) track = true;
    if (track) {
        out->requires_grad = true;
        for (const Tensor& t : xs) out->parents.push_back(t.node());
        Node* on = out.get();
        std::vector<i64> channels;
        for (const Tensor& t : xs) channels.push_back(t.dim(1));
        out->backward_fn = [on, channels, B, C, hw]() {
            i64 c0b = 0;
            for (std::size_t k = 0; k < channels.size(); ++k) {
                Node* p = on->parents[k].get();
                const i64 ci = channels[k];
                if (p->requires_grad) {
                    p->ensure_grad();
                    for (i64 b = 0; b < B; ++b) {
                        const double* g = on->grad.data() + (b * C + c0b) * hw;
                        double* pg = p->grad.data() + b * ci * hw;
                        for (i64 t = 0; t < ci * hw; ++t) pg[t] += g[t];
                    }
                }
                c0b += ci;
            }
        };
    }
    return Tensor(out);
}

Tensor crop_hw(const Tensor& x, i64 i0, i64 j0, i64 h, i64 w) {
    if (x.ndim() != 4) throw ShapeError("crop_hw: expected x[B,C,H,W]");
    const i64 B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    if (i0 < 0 || j0 < 0 || i0 + h > H || j0 + w > W)
        throw ShapeError("crop_hw: window out of bounds");
    auto out = make_node({B, C, h, w});
    for (i64 bc = 0; bc < B * C; ++bc) {
        const double* src = x.data() + bc * H * W;
        double* dst = out->value.data() + bc * h * w;
        for (i64 i = 0; i < h; ++i)
            std::copy(src + (i0 + i) * W + j0, src + (i0 + i) * W + j0 + w, dst + i * w);
    }
    if (want_grad({&x})) {
        Node* on = out.get();
        Node* xn = x.node().get();
        attach(out, {x}, [on, xn, B, C, H, W, i0, j0, h, w]() {
            xn->ensure_grad();
            for (i64 bc = 0; bc < B * C; ++bc) {
                const double* g = on->grad.data() + bc * h * w;
                double* pg = xn->grad.data() + bc * H * W;
                for (i64 i = 0; i < h; ++i)
                    for (i64 j = 0; j < w; ++j) pg[(i0 + i) * W + j0 + j] += g[i * w + j];
            }
        });
    }
    return Tensor(out);
}

Tensor pad_hw(const Tensor& x, i64 top, i64 bottom, i64 left, i64 right) {
    if (x.ndim() != 4) throw ShapeError("pad_hw: expected x[B,C,H,W]");
    const i64 B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const i64 Ho = H + top + bottom, Wo = W + left + right;
    auto out = make_node({B, C, Ho, Wo});
    for (i64 bc = 0; bc < B * C; ++bc) {
        const double* src = x.data() + bc * H * W;
        double* dst = out->value.data() + bc * Ho * Wo;
        for (i64 i = 0; i < H; ++i)
            std::copy(src + i * W, src + (i + 1) * W, dst + (top + i) * Wo + left);
    }
    if (want_grad({&x})) {
        Node* on = out.get();
        Node* xn = x.node().get();
        attach(out, {x}, [on, xn, B, C, H, W, Ho, Wo, top, left]() {
            xn->ensure_grad();
            for (i64 bc = 0; bc < B * C; ++bc) {
                const double* g = on->grad.data() + bc * Ho * Wo;
                double* pg = xn->grad.data() + bc * H * W;
                for (i64 i = 0; i < H; ++i)
                    for (i64 j = 0; j < W; ++j) pg[i * W + j] += g[(top + i) * Wo + left + j];
            }
        });
    }
    return Tensor(out);
}

Tensor roll_hw(const Tensor& x, i64 sh, i64 sw) {
    if (x.ndim() != 4) throw ShapeError("roll_hw: expected x[B,C,H,W]");
    const i64 B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    auto wrap = [](i64 v, i64 n) { return ((v % n) + n) % n; };
    auto out = make_node(x.shape());
    for (i64 bc = 0; bc < B * C; ++bc) {
        const double* src = x.data() + bc * H * W;
        double* dst = out->value.data() + bc * H * W;
        for (i64 i = 0; i < H; ++i) {
            const i64 si = wrap(i - sh, H);
            for (i64 j = 0; j < W; ++j) dst[i * W + j] = src[si * W + wrap(j - sw, W)];
        }
    }
    if (want_grad({&x})) {
        Node* on = out.get();
        Node* xn = x.node().get();
        attach(out, {x}, [on, xn, B, C, H, W, sh, sw, wrap]() {
            xn->ensure_grad();
            for (i64 bc = 0; bc < B * C; ++bc) {
                const double* g = on->grad.data() + bc * H * W;
                double* pg = xn->grad.data() + bc * H * W;
                for (i64 i = 0; i < H; ++i) {
                    const i64 si = wrap(i - sh, H);
                    for (i64 j = 0; j < W; ++j) pg[si * W + wrap(j - sw, W)] += g[i * W + j];
                }
            }
        });
    }
    return Tensor(out);
}

// out[b, c, h*r+i, w*r+j] = in[b, c*r*r + i*r + j, h, w]
Tensor pixel_shuffle(const Tensor& x, i64 r) {
    if (x.ndim() != 4 || x.dim(1) % (r * r) != 0)
        throw ShapeError("pixel_shuffle: channels must be divisible by r^2, got " +
                         shape_str(x.shape()) + " with r=" + std::to_string(r));
    const i64 B = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3);
    const i64 C = Ci / (r * r);
    auto out = make_node({B, C, H * r, W * r});
    const double* px = x.data();
    double* po = out->value.data();
    for (i64 b = 0; b < B; ++b)
        for (i64 c = 0; c < C; ++c)
            for (i64 i = 0; i < r; ++i)
                for (i64 j = 0; j < r; ++j) {
                    const double* src = px + ((b * Ci + c * r * r + i * r + j) * H) * W;
                    for (i64 h = 0; h < H; ++h) {
                        double* dst = po + ((b * C + c) * H * r + h * r + i) * W * r + j;
                        for (i64 w = 0; w < W; ++w) dst[w * r] = src[h * W + w];
                    }
                }
    if (want_grad({&x})) {
        Node* on = out.get();
        Node* xn = x.node().get();
        attach(out, {x}, [on, xn, B, C, Ci, H, W, r]() {
            xn->ensure_grad();
            for (i64 b = 0; b < B; ++b)
                for (i64 c = 0; c < C; ++c)
                    for (i64 i = 0; i < r; ++i)
                        for (i64 j = 0; j < r; ++j) {
                            double* pg = xn->grad.data() + ((b * Ci + c * r * r + i * r + j) * H) * W;
                            for (i64 h = 0; h < H; ++h) {
                                const double* g =
                                    on->grad.data() + ((b * C + c) * H * r + h * r + i) * W * r + j;
                                for (i64 w = 0; w < W; ++w) pg[h * W + w] += g[w * r];
                            }
                        }
        });
    }
    return Tensor(out);
}

Tensor pixel_unshuffle(const Tensor& x, i64 r) {
    if (x.ndim() != 4 || x.dim(2) % r != 0 || x.dim(3) % r != 0)
        throw ShapeError("pixel_unshuffle: spatial dims must be divisible by r");
    const i64 B = x.dim(0), C = x.dim(1), Hr = x.dim(2), Wr = x.dim(3);
    const i64 H = Hr / r, W = Wr / r, Co = C * r * r;
    auto out = make_node({B, Co, H, W});
    const double* px = x.data();
    double* po = out->value.data();
    for (i64 b = 0; b < B; ++b)
        for (i64 c = 0; c < C; ++c)
            for (i64 i = 0; i < r; ++i)
                for (i64 j = 0; j < r; ++j) {
                    double* dst = po + ((b * Co + c * r * r + i * r + j) * H) * W;
                    for (i64 h = 0; h < H; ++h) {
                        const double* src = px + ((b * C + c) * Hr + h * r + i) * Wr + j;
                        for (i64 w = 0; w < W; ++w) dst[h * W + w] = src[w * r];
                    }
                }
    if (want_grad({&x})) {
        Node* on = out.get();
        Node* xn = x.node().get();
        attach(out, {x}, [on, xn, B, C, Co, H, W, Hr, Wr, r]() {
            xn->ensure_grad();
            for (i64 b = 0; b < B; ++b)
                for (i64 c = 0; c < C; ++c)
                    for (i64 i = 0; i < r; ++i)
                        for (i64 j = 0; j < r; ++j) {
                            const double* g =
                                on->grad.data() + ((b * Co + c * r * r + i * r + j) * H) * W;
                            for (i64 h = 0; h < H; ++h) {
                                double* pg = xn->grad.data() + ((b * C + c) * Hr + h * r + i) * Wr + j;
                                for (i64 w = 0; w < W; ++w) pg[w * r] += g[h * W + w];
                            }
                        }
        });
    }
    return Tensor(out);
}

Tensor to_windows(const Tensor& x, i64 ws) {
    if (x.ndim() != 4 || x.dim(2) % ws != 0 || x.dim(3) % ws != 0)
        throw ShapeError("to_windows: window size must divide spatial dims, got " +
                         shape_str(x.shape()) + " with ws=" + std::to_string(ws));
    const i64 B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const i64 nh = H / ws, nw = W / ws, nwin = nh * nw, T = ws * ws;
    auto out = make_node({B * nwin, T, C});
    const double* px = x.data();
    double* po = out->value.data();
    for (i64 b = 0; b < B; ++b)
        for (i64 wh = 0; wh < nh; ++wh)
            for (i64 ww = 0; ww < nw; ++ww) {
                const i64 win = (b * nwin + wh * nw + ww);
                for (i64 ti = 0; ti < ws; ++ti)
                    for (i64 tj = 0; tj < ws; ++tj) {
                        const i64 t = ti * ws + tj;
                        for (i64 c = 0; c < C; ++c)
                            po[(win * T + t) * C + c] =
                                px[((b * C + c) * H + wh * ws + ti) * W + ww * ws + tj];
                    }
            }
    if (want_grad({&x})) {
        Node* on = out.get();
        Node* xn = x.node().get();
        attach(out, {x}, [on, xn, B, C, H, W, ws, nh, nw, nwin, T]() {
            xn->ensure_grad();
            for (i64 b = 0; b < B; ++b)
                for (i64 wh = 0; wh < nh; ++wh)
                    for (i64 ww = 0; ww < nw; ++ww) {
                        const i64 win = (b * nwin + wh * nw + ww);
                        for (i64 ti = 0; ti < ws; ++ti)
                            for (i64 tj = 0; tj < ws; ++tj) {
                                const i64 t = ti * ws + tj;
                                for (i64 c = 0; c < C; ++c)
                                    xn->grad[((b * C + c) * H + wh * ws + ti) * W + ww * ws + tj] +=
                                        on->grad[(win * T + t) * C + c];
                            }
                    }
        });
    }
    return Tensor(out);
}

Tensor from_windows(const Tensor& windows, i64 B, i64 C, i64 H, i64 W, i64 ws) {
    const i64 nh = H / ws, nw = W / ws, nwin = nh * nw, T = ws * ws;
    if (windows.ndim() != 3 || windows.dim(0) != B * nwin || windows.dim(1) != T ||
        windows.dim(2) != C)
        throw ShapeError("from_windows: layout mismatch, got " + shape_str(windows.shape()));
    auto out = make_node({B, C, H, W});
    const double* pw = windows.data();
    double* po = out->value.data();
    for (i64 b = 0; b < B; ++b)
        for (i64 wh = 0; wh < nh; ++wh)
            for (i64 ww = 0; ww < nw; ++ww) {
                const i64 win = (b * nwin + wh * nw + ww);
                for (i64 ti = 0; ti < ws; ++ti)
                    for (i64 tj = 0; tj < ws; ++tj) {
                        const i64 t = ti * ws + tj;
                        for (i64 c = 0; c < C; ++c)
                            po[((b * C + c) * H + wh * ws + ti) * W + ww * ws + tj] =
                                pw[(win * T + t) * C + c];
                    }
            }
    if (want_grad({&windows})) {
        Node* on = out.get();
        Node* wn = windows.node().get();
        attach(out, {windows}, [on, wn, B, C, H, W, ws, nh, nw, nwin, T]() {
            wn->ensure_grad();
            for (i64 b = 0; b < B; ++b)
                for (i64 wh = 0; wh < nh; ++wh)
                    for (i64 ww = 0; ww < nw; ++ww) {
                        const i64 win = (b * nwin + wh * nw + ww);
                        for (i64 ti = 0; ti < ws; ++ti)
                            for (i64 tj = 0; tj < ws; ++tj) {
                                const i64 t = ti * ws + tj;
                                for (i64 c = 0; c < C; ++c)
                                    wn->grad[(win * T + t) * C + c] +=
                                        on->grad[((b * C + c) * H + wh * ws + ti) * W + ww * ws + tj];
                            }
                    }
        });
    }
    return Tensor(out);
}

//----------------------------------------------------------------------------
// Normalizations / softmax
//----------------------------------------------------------------------------

Tensor softmax_lastdim(const Tensor& x) {
    const i64 d = x.dim(x.ndim() - 1);
    const i64 rows = x.numel() / d;
    auto out = make_node(x.shape());
    const double* px = x.data();
    double* po = out->value.data();
    for (i64 r = 0; r < rows; ++r) {
        const double* xi = px + r * d;
        double* yi = po + r * d;
        double m = xi[0];
        for (i64 j = 1; j < d; ++j) m = std::max(m, xi[j]);
        double s = 0.0;
        for (i64 j = 0; j < d; ++j) {
            yi[j] = std::exp(xi[j] - m);
            s += yi[j];
        }
        const double inv = 1.0 / s;
        for (i64 j = 0; j < d; ++j) yi[j] *= inv;
    }
    if (want_grad({&x})) {
        Node* on = out.get();
        Node* xn = x.node().get();
        attach(out, {x}, [on, xn, rows, d]() {
            xn->ensure_grad();
            for (i64 r = 0; r < rows; ++r) {
                const double* y = on->value.data() + r * d;
                const double* g = on->grad.data() + r * d;
                double dot = 0.0;
                for (i64 j = 0; j < d; ++j) dot += y[j] * g[j];
                double* pg = xn->grad.data() + r * d;
                for (i64 j = 0; j < d; ++j) pg[j] += y[j] * (g[j] - dot);
            }
        });
    }
    return Tensor(out);
}

Tensor l2normalize_lastdim(const Tensor& x, double eps) {
    const i64 d = x.dim(x.ndim() - 1);
    const i64 rows = x.numel() / d;
    auto out = make_node(x.shape());
    auto norms = std::make_shared<std::vector<double>>(rows);
    const double* px = x.data();
    double* po = out->value.data();
    for (i64 r = 0; r < rows; ++r) {
        const double* xi = px + r * d;
        double ss = 0.0;
        for (i64 j = 0; j < d; ++j) ss += xi[j] * xi[j];
        const double nrm = std::max(std::sqrt(ss), eps);
        (*norms)[r] = nrm;
        const double inv = 1.0 / nrm;
        for (i64 j = 0; j < d; ++j) po[r * d + j] = xi[j] * inv;
    }
    if (want_grad({&x})) {
        Node* on = out.get();
        Node* xn = x.node().get();
        attach(out, {x}, [on, xn, norms, rows, d, eps]() {
            xn->ensure_grad();
            for (i64 r = 0; r < rows; ++r) {
                const double nrm = (*norms)[r];
                const double* y = on->value.data() + r * d;
                const double* g = on->grad.data() + r * d;
                double* pg = xn->grad.data() + r * d;
                const double inv = 1.0 / nrm;
                if (nrm > eps) {
                    double dot = 0.0;
                    for (i64 j = 0; j < d; ++j) dot += y[j] * g[j];
                    for (i64 j = 0; j < d; ++j) pg[j] += inv * (g[j] - y[j] * dot);
                } else {
                    for (i64 j = 0; j < d; ++j) pg[j] += inv * g[j];
                }
            }
        });
    }
    return Tensor(out);
}

Tensor layernorm_lastdim(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
    const i64 d = x.dim(x.ndim() - 1);
    if (gamma.numel() != d || beta.numel() != d)
        throw ShapeError("layernorm: gamma/beta must match last dim");
    const i64 rows = x.numel() / d;
    auto out = make_node(x.shape());
    auto stats = std::make_shared<std::vector<double>>(2 * rows); // mean, invstd
    const double* px = x.data();
    const double* pg = gamma.data();
    const double* pb = beta.data();
    double* po = out->value.data();
    for (i64 r = 0; r < rows; ++r) {
        const double* xi = px + r * d;
        double s = 0.0;
        for (i64 j = 0; j < d; ++j) s += xi[j];
        const double mean = s / d;
        double ss = 0.0;
        for (i64 j = 0; j < d; ++j) ss += sq(xi[j] - mean);
        const double invstd = 1.0 / std::sqrt(ss / d + eps);
        (*stats)[2 * r] = mean;
        (*stats)[2 * r + 1] = invstd;
        for (i64 j = 0; j < d; ++j) po[r * d + j] = (xi[j] - mean) * invstd * pg[j] + pb[j];
    }
    if (want_grad({&x, &gamma, &beta})) {
        Node* on = out.get();
        Node* xn = x.node().get();
        Node* gn = gamma.node().get();
        Node* bn = beta.node().get();
        attach(out, {x, gamma, beta}, [on, xn, gn, bn, stats, rows, d]() {
            const bool want_x = xn->requires_grad;
            const bool want_g = gn->requires_grad;
            const bool want_b = bn->requires_grad;
            if (want_x) xn->ensure_grad();
            if (want_g) gn->ensure_grad();
            if (want_b) bn->ensure_grad();
            for (i64 r = 0; r < rows; ++r) {
                const double mean = (*stats)[2 * r];
                const double invstd = (*stats)[2 * r + 1];
                const double* xi = xn->value.data() + r * d;
                const double* g = on->grad.data() + r * d;
                if (want_g || want_b)
                    for (i64 j = 0; j < d; ++j) {
                        const double xhat = (xi[j] - mean) * invstd;
                        if (want_g) gn->grad[j] += g[j] * xhat;
                        if (want_b) bn->grad[j] += g[j];
                    }
                if (want_x) {
                    double s1 = 0.0, s2 = 0.0;
                    for (i64 j = 0; j < d; ++j) {
                        const double xhat = (xi[j] - mean) * invstd;
                        const double gg = g[j] * gn->value[j];
                        s1 += gg;
                        s2 += gg * xhat;
                    }
                    double* pgx = xn->grad.data() + r * d;
                    for (i64 j = 0; j < d; ++j) {
                        const double xhat = (xi[j] - mean) * invstd;
                        const double gg = g[j] * gn->value[j];
                        pgx[j] += invstd * (gg - s1 / d - xhat * s2 / d);
                    }
                }
            }
        });
    }
    return Tensor(out);
}

Tensor scale_by_head_exp(const Tensor& x, const Tensor& log_scales, i64 n_heads, double ln_max) {
    const i64 N = x.dim(0);
    if (log_scales.numel() != n_heads || N % n_heads != 0)
        throw ShapeError("scale_by_head_exp: first dim must be a multiple of n_heads");
    const i64 block = x.numel() / N;
    auto out = make_node(x.shape());
    const double* px = x.data();
    double* po = out->value.data();
    std::vector<double> s(n_heads);
    for (i64 h = 0; h < n_heads; ++h) s[h] = std::exp(std::min(log_scales.data()[h], ln_max));
    for (i64 nidx = 0; nidx < N; ++nidx) {
        const double sv = s[nidx % n_heads];
        for (i64 t = 0; t < block; ++t) po[nidx * block + t] = px[nidx * block + t] * sv;
    }
    if (want_grad({&x, &log_scales})) {
        Node* on = out.get();
        Node* xn = x.node().get();
        Node* ln = log_scales.node().get();
        attach(out, {x, log_scales}, [on, xn, ln, N, block, n_heads, ln_max]() {
            std::vector<double> s(n_heads);
            for (i64 h = 0; h < n_heads; ++h) s[h] = std::exp(std::min(ln->value[h], ln_max));
            if (xn->requires_grad) {
                xn->ensure_grad();
                for (i64 nidx = 0; nidx < N; ++nidx) {
                    const double sv = s[nidx % n_heads];
                    for (i64 t = 0; t < block; ++t)
                        xn->grad[nidx * block + t] += on->grad[nidx * block + t] * sv;
                }
            }
            if (ln->requires_grad) {
                ln->ensure_grad();
                for (i64 nidx = 0; nidx < N; ++nidx) {
                    const i64 h = nidx % n_heads;
                    if (ln->value[h] >= ln_max) continue;
                    double acc = 0.0;
                    for (i64 t = 0; t < block; ++t)
                        acc += on->grad[nidx * block + t] * on->value[nidx * block + t];
                    ln->grad[h] += acc;
                }
            }
        });
    }
    return Tensor(out);
}

Tensor add_rel_pos_bias(const Tensor& logits, const Tensor& table, const std::vector<i64>& index,
                        i64 n_heads) {
    const i64 N = logits.dim(0), T = logits.dim(1);
    if (logits.ndim() != 3 || logits.dim(2) != T || static_cast<i64>(index.size()) != T * T)
        throw ShapeError("add_rel_pos_bias: logits must be [N,T,T] with index T*T");
    if (table.ndim() != 2 || table.dim(1) != n_heads)
        throw ShapeError("add_rel_pos_bias: table must be [n_rel, n_heads]");
    auto out = make_node(logits.shape());
    const double* pl = logits.data();
    const double* pt = table.data();
    double* po = out->value.data();
    for (i64 nidx = 0; nidx < N; ++nidx) {
        const i64 h = nidx % n_heads;
        const double* base = pl + nidx * T * T;
        double* ob = po + nidx * T * T;
        for (i64 t = 0; t < T * T; ++t) ob[t] = base[t] + pt[index[t] * n_heads + h];
    }
    if (want_grad({&logits, &table})) {
        Node* on = out.get();
        Node* lnn = logits.node().get();
        Node* tn = table.node().get();
        auto idx = std::make_shared<std::vector<i64>>(index);
        attach(out, {logits, table}, [on, lnn, tn, idx, N, T, n_heads]() {
            if (lnn->requires_grad) {
                lnn->ensure_grad();
                const i64 n = N * T * T;
                for (i64 i = 0; i < n; ++i) lnn->grad[i] += on->grad[i];
            }
            if (tn->requires_grad) {
                tn->ensure_grad();
                for (i64 nidx = 0; nidx < N; ++nidx) {
                    const i64 h = nidx % n_heads;
                    const double* g = on->grad.data() + nidx * T * T;
                    for (i64 t = 0; t < T * T; ++t) tn->grad[(*idx)[t] * n_heads + h] += g[t];
                }
            }
        });
    }
    return Tensor(out);
}

Tensor add_window_mask(const Tensor& logits, const std::vector<double>& mask, i64 n_windows,
                       i64 n_heads) {
    const i64 N = logits.dim(0), T = logits.dim(1);
    if (static_cast<i64>(mask.size()) != n_windows * T * T)
        throw ShapeError("add_window_mask: mask must be [n_windows,T,T]");
    auto out = make_node(logits.shape());
    const double* pl = logits.data();
    double* po = out->value.data();
    for (i64 nidx = 0; nidx < N; ++nidx) {
        const i64 w = (nidx / n_heads) % n_windows;
        const double* m = mask.data() + w * T * T;
        const double* base = pl + nidx * T * T;
        double* ob = po + nidx * T * T;
        for (i64 t = 0; t < T * T; ++t) ob[t] = base[t] + m[t];
    }
    if (want_grad({&logits})) {
        Node* on = out.get();
        Node* lnn = logits.node().get();
        attach(out, {logits}, [on, lnn]() {
            lnn->ensure_grad();
            const i64 n = static_cast<i64>(lnn->grad.size());
            for (i64 i = 0; i < n; ++i) lnn->grad[i] += on->grad[i];
        });
    }
    return Tensor(out);
}

Tensor mean_all(const Tensor& x) {
    const i64 n = x.numel();
    auto out = make_node({1});
    out->value[0] = kernels::sum(x.data(), n) / static_cast<double>(n);
    if (want_grad({&x})) {
        Node* on = out.get();
        Node* xn = x.node().get();
        attach(out, {x}, [on, xn, n]() {
            xn->ensure_grad();
            const double g = on->grad[0] / static_cast<double>(n);
            for (i64 i = 0; i < n; ++i) xn->grad[i] += g;
        });
    }
    return Tensor(out);
}

Tensor charbonnier_loss(const Tensor& pred, const Tensor& target, double eps) {
    check_same_shape(pred, target, "charbonnier_loss");
    const i64 n = pred.numel();
    auto out = make_node({1});
    const double* pp = pred.data();
    const double* pt = target.data();
    std::vector<double> terms(n);
    const double e2 = eps * eps;
    for (i64 i = 0; i < n; ++i) terms[i] = std::sqrt(sq(pp[i] - pt[i]) + e2);
    out->value[0] = kernels::sum(terms.data(), n) / static_cast<double>(n);
    if (want_grad({&pred})) {
        Node* on = out.get();
        Node* pn = pred.node().get();
        Node* tn = target.node().get();
        attach(out, {pred, target}, [on, pn, tn, n, e2]() {
            if (!pn->requires_grad) return;
            pn->ensure_grad();
            const double g = on->grad[0] / static_cast<double>(n);
            for (i64 i = 0; i < n; ++i) {
                const double d = pn->value[i] - tn->value[i];
                pn->grad[i] += g * d / std::sqrt(d * d + e2);
            }
        });
    }
    return Tensor(out);
}

//----------------------------------------------------------------------------
// Batch normalization
//----------------------------------------------------------------------------

Tensor batchnorm2d(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                   std::vector<double>& running_mean, std::vector<double>& running_var,
                   double momentum, double eps, bool training) {
    if (x.ndim() != 4) throw ShapeError("batchnorm2d: expected x[B,C,H,W]");
    const i64 B = x.dim(0), C = x.dim(1), hw = x.dim(2) * x.dim(3);
    if (gamma.numel() != C || beta.numel() != C)
        throw ShapeError("batchnorm2d: gamma/beta must have C entries");
    if (static_cast<i64>(running_mean.size()) != C || static_cast<i64>(running_var.size()) != C)
        throw ShapeError("batchnorm2d: running statistic buffers must have C entries");
    const double n = static_cast<double>(B * hw);
    auto mean = std::make_shared<std::vector<double>>(C);
    auto invstd = std::make_shared<std::vector<double>>(C);
    if (training) {
        // Per-(b,c) block partial sums combined pairwise over b: deterministic
        // for any thread count.
        std::vector<double> psum(B * C), psq(B * C);
#pragma omp parallel for collapse(2) schedule(static)
        for (i64 b = 0; b < B; ++b)
            for (i64 c = 0; c < C; ++c) {
                const double* p = x.data() + (b * C + c) * hw;
                double s = 0.0, ss = 0.0;
                for (i64 t = 0; t < hw; ++t) {
                    s += p[t];
                    ss += p[t] * p[t];
                }
                psum[b * C + c] = s;
                psq[b * C + c] = ss;
            }
        for (i64 c = 0; c < C; ++c) {
            std::vector<double> tmp(B), tmp2(B);
            for (i64 b = 0; b < B; ++b) {
                tmp[b] = psum[b * C + c];
                tmp2[b] = psq[b * C + c];
            }
            const double m = pairwise_sum(tmp) / n;
            const double var = std::max(0.0, pairwise_sum(tmp2) / n - m * m);
            (*mean)[c] = m;
            (*invstd)[c] = 1.0 / std::sqrt(var + eps);
            running_mean[c] = (1.0 - momentum) * running_mean[c] + momentum * m;
            running_var[c] = (1.0 - momentum) * running_var[c] + momentum * var;
        }
    } else {
        for (i64 c = 0; c < C; ++c) {
            (*mean)[c] = running_mean[c];
            (*invstd)[c] = 1.0 / std::sqrt(running_var[c] + eps);
        }
    }
    auto out = make_node(x.shape());
    const double* px = x.data();
    const double* pg = gamma.data();
    const double* pb = beta.data();
    double* po = out->value.data();
#pragma omp parallel for collapse(2) schedule(static)
    for (i64 b = 0; b < B; ++b)
        for (i64 c = 0; c < C; ++c) {
            const double m = (*mean)[c], is = (*invstd)[c], gv = pg[c], bv = pb[c];
            const i64 base = (b * C + c) * hw;
            for (i64 t = 0; t < hw; ++t) po[base + t] = (px[base + t] - m) * is * gv + bv;
        }
    if (want_grad({&x, &gamma, &beta})) {
        Node* on = out.get();
        Node* xn = x.node().get();
        Node* gn = gamma.node().get();
        Node* bn = beta.node().get();
        attach(out, {x, gamma, beta}, [on, xn, gn, bn, mean, invstd, B, C, hw, n, training]() {
            // S1[c] = sum gy, S2[c] = sum gy*xhat, reduced pairwise over b.
            std::vector<double> p1(B * C), p2(B * C);
#pragma omp parallel for collapse(2) schedule(static)
            for (i64 b = 0; b < B; ++b)
                for (i64 c = 0; c < C; ++c) {
                    const i64 base = (b * C + c) * hw;
                    const double m = (*mean)[c], is = (*invstd)[c];
                    double s1 = 0.0, s2 = 0.0;
                    for (i64 t = 0; t < hw; ++t) {
                        const double g = on->grad[base + t];
                        s1 += g;
                        s2 += g * (xn->value[base + t] - m) * is;
                    }
                    p1[b * C + c] = s1;
                    p2[b * C + c] = s2;
                }
            std::vector<double> S1(C), S2(C);
            for (i64 c = 0; c < C; ++c) {
                std::vector<double> t1(B), t2(B);
                for (i64 b = 0; b < B; ++b) {
                    t1[b] = p1[b * C + c];
                    t2[b] = p2[b * C + c];
                }
                S1[c] = pairwise_sum(t1);
                S2[c] = pairwise_sum(t2);
            }
            if (gn->requires_grad) {
                gn->ensure_grad();
                for (i64 c = 0; c < C; ++c) gn->grad[c] += S2[c];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (i64 c = 0; c < C; ++c) bn->grad[c] += S1[c];
            }
            if (xn->requires_grad) {
                xn->ensure_grad();
#pragma omp parallel for collapse(2) schedule(static)
                for (i64 b = 0; b < B; ++b)
                    for (i64 c = 0; c < C; ++c) {
                        const i64 base = (b * C + c) * hw;
                        const double m = (*mean)[c], is = (*invstd)[c];
                        const double gv = gn->value[c];
                        if (training) {
                            const double c1 = S1[c] / n, c2 = S2[c] / n;
                            for (i64 t = 0; t < hw; ++t) {
                                const double xhat = (xn->value[base + t] - m) * is;
                                xn->grad[base + t] += gv * is * (on->grad[base + t] - c1 - xhat * c2);
                            }
                        } else {
                            for (i64 t = 0; t < hw; ++t)
                                xn->grad[base + t] += gv * is * on->grad[base + t];
                        }
                    }
            }
        });
    }
    return Tensor(out);
}

//----------------------------------------------------------------------------
// Attention head plumbing
//----------------------------------------------------------------------------

std::array<Tensor, 3> split_qkv(const Tensor& qkv, i64 N, i64 T, i64 heads) {
    if (qkv.ndim() != 2 || qkv.dim(0) != N * T || qkv.dim(1) % (3 * heads) != 0)
        throw ShapeError("split_qkv: expected [N*T, 3C] with C divisible by heads");
    const i64 C = qkv.dim(1) / 3;
    const i64 dh = C / heads;
    std::array<Tensor, 3> out;
    for (int part = 0; part < 3; ++part) {
        auto o = make_node({N * heads, T, dh});
        const double* src = qkv.data();
        double* dst = o->value.data();
        for (i64 n = 0; n < N; ++n)
            for (i64 h = 0; h < heads; ++h)
                for (i64 t = 0; t < T; ++t) {
                    const double* row = src + (n * T + t) * 3 * C + part * C + h * dh;
                    double* orow = dst + ((n * heads + h) * T + t) * dh;
                    for (i64 d = 0; d < dh; ++d) orow[d] = row[d];
                }
        if (want_grad({&qkv})) {
            Node* on = o.get();
            Node* qn = qkv.node().get();
            attach(o, {qkv}, [on, qn, N, T, heads, C, dh, part]() {
                qn->ensure_grad();
                for (i64 n = 0; n < N; ++n)
                    for (i64 h = 0; h < heads; ++h)
                        for (i64 t = 0; t < T; ++t) {
                            const double* g = on->grad.data() + ((n * heads + h) * T + t) * dh;
                            double* pg = qn->grad.data() + (n * T + t) * 3 * C + part * C + h * dh;
                            for (i64 d = 0; d < dh; ++d) pg[d] += g[d];
                        }
            });
        }
        out[part] = Tensor(o);
    }
    return out;
}

Tensor merge_heads(const Tensor& x, i64 heads) {
    if (x.ndim() != 3 || x.dim(0) % heads != 0)
        throw ShapeError("merge_heads: expected [N*heads, T, dh]");
    const i64 N = x.dim(0) / heads, T = x.dim(1), dh = x.dim(2);
    const i64 C = heads * dh;
    auto out = make_node({N * T, C});
    const double* src = x.data();
    double* dst = out->value.data();
    for (i64 n = 0; n < N; ++n)
        for (i64 h = 0; h < heads; ++h)
            for (i64 t = 0; t < T; ++t) {
                const double* row = src + ((n * heads + h) * T + t) * dh;
                double* orow = dst + (n * T + t) * C + h * dh;
                for (i64 d = 0; d < dh; ++d) orow[d] = row[d];
            }
    if (want_grad({&x})) {
        Node* on = out.get();
        Node* xn = x.node().get();
        attach(out, {x}, [on, xn, N, T, heads, C, dh]() {
            xn->ensure_grad();
            for (i64 n = 0; n < N; ++n)
                for (i64 h = 0; h < heads; ++h)
                    for (i64 t = 0; t < T; ++t) {
                        const double* g = on->grad.data() + (n * T + t) * C + h * dh;
                        double* pg = xn->grad.data() + ((n * heads + h) * T + t) * dh;
                        for (i64 d = 0; d < dh; ++d) pg[d] += g[d];
                    }
        });
    }
    return Tensor(out);
}

//----------------------------------------------------------------------------
// ParamStore
//----------------------------------------------------------------------------

Tensor ParamStore::create(const std::string& name, Shape shape, std::vector<double> init,
                          bool trainable) {
    for (const auto& e : entries_)
        if (e.name == name) throw ConfigError("ParamStore: duplicate parameter '" + name + "'");
    Tensor t = Tensor::from_data(std::move(shape), std::move(init));
    t.set_requires_grad(trainable);
    entries_.push_back(Entry{name, t, trainable});
    return t;
}

Tensor ParamStore::get(const std::string& name) const {
    for (const auto& e : entries_)
        if (e.name == name) return e.tensor;
    throw ConfigError("ParamStore: unknown parameter '" + name + "'");
}

bool ParamStore::has(const std::string& name) const {
    for (const auto& e : entries_)
        if (e.name == name) return true;
    return false;
}

i64 ParamStore::total_parameters() const {
    i64 n = 0;
    for (const auto& e : entries_) n += e.tensor.numel();
    return n;
}

void ParamStore::zero_grads() {
    for (auto& e : entries_) e.tensor.zero_grad();
}

std::uint64_t ParamStore::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& e : entries_) {
        h = fnv1a(e.name.data(), e.name.size(), h);
        h = fnv1a(e.tensor.data(), e.tensor.numel() * sizeof(double), h);
    }
    return h;
}

} // namespace gridsr::nn
