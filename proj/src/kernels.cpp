#include "gridsr/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gridsr/common.hpp"

namespace gridsr::kernels {

namespace {

inline i64 ceil_div_nonneg(i64 a, i64 b) { return a <= 0 ? 0 : (a + b - 1) / b; }

// Persistent per-thread scratch for the patch matrices; large buffers would
// otherwise be mapped and unmapped on every call.
inline double* scratch(std::size_t slot, std::size_t n) {
    thread_local std::vector<double> buf[2];
    if (buf[slot].size() < n) buf[slot].resize(n);
    return buf[slot].data();
}

// Dot product over independent accumulation lanes; the lane structure lets
// the compiler vectorize what a single-scalar reduction would serialize, and
// two vector-width accumulators hide the FMA latency.
inline double dot_lanes(const double* a, const double* b, i64 n) {
    double lane[8] = {};
    i64 i = 0;
    for (; i + 8 <= n; i += 8)
        for (int u = 0; u < 8; ++u) lane[u] += a[i + u] * b[i + u];
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return (((lane[0] + lane[1]) + (lane[2] + lane[3])) +
            ((lane[4] + lane[5]) + (lane[6] + lane[7]))) +
           tail;
}

inline double dot_lanes_strided(const double* a, i64 stride, const double* b, i64 n) {
    double lane[4] = {};
    i64 i = 0;
    for (; i + 4 <= n; i += 4)
        for (int u = 0; u < 4; ++u) lane[u] += a[(i + u) * stride] * b[i + u];
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i * stride] * b[i];
    return ((lane[0] + lane[1]) + (lane[2] + lane[3])) + tail;
}

// Valid output range [lo, hi) along one axis so that the sampled input index
// wo*stride + k - pad stays inside [0, in_dim).
inline void valid_range(i64 out_dim, i64 in_dim, i64 k, i64 pad, i64 stride, i64& lo, i64& hi) {
    lo = ceil_div_nonneg(pad - k, stride);
    i64 max_idx = (in_dim - 1 - k + pad);
    hi = max_idx < 0 ? 0 : std::min(out_dim, max_idx / stride + 1);
    if (lo > hi) lo = hi;
}

// Convolutions run as im2col + matrix products: the patch matrix P has one
// row per (c, ki, kj) tap and one column per output position, so
// y[b] = w @ P(x[b]) and the backward passes are the transposed products.
// Per-element accumulation order is the tap order (c, ki, kj), identical in
// the serial and parallel variants.

void im2col(const double* xp, double* col, i64 C, i64 H, i64 W, i64 kh, i64 kw, i64 pad,
            i64 stride, i64 Ho, i64 Wo) {
    for (i64 c = 0; c < C; ++c) {
        const double* plane = xp + c * H * W;
        for (i64 ki = 0; ki < kh; ++ki) {
            for (i64 kj = 0; kj < kw; ++kj) {
                double* row = col + ((c * kh + ki) * kw + kj) * Ho * Wo;
                i64 wlo, whi;
                valid_range(Wo, W, kj, pad, stride, wlo, whi);
                for (i64 ho = 0; ho < Ho; ++ho) {
                    double* dst = row + ho * Wo;
                    const i64 ih = ho * stride + ki - pad;
                    if (ih < 0 || ih >= H) {
                        for (i64 wo = 0; wo < Wo; ++wo) dst[wo] = 0.0;
                        continue;
                    }
                    const double* src = plane + ih * W + kj - pad;
                    for (i64 wo = 0; wo < wlo; ++wo) dst[wo] = 0.0;
                    if (stride == 1) {
                        for (i64 wo = wlo; wo < whi; ++wo) dst[wo] = src[wo];
                    } else {
                        for (i64 wo = wlo; wo < whi; ++wo) dst[wo] = src[wo * stride];
                    }
                    for (i64 wo = whi; wo < Wo; ++wo) dst[wo] = 0.0;
                }
            }
        }
    }
}

void col2im_add(const double* col, double* gxp, i64 C, i64 H, i64 W, i64 kh, i64 kw, i64 pad,
                i64 stride, i64 Ho, i64 Wo) {
    for (i64 c = 0; c < C; ++c) {
        double* plane = gxp + c * H * W;
        for (i64 ki = 0; ki < kh; ++ki) {
            for (i64 kj = 0; kj < kw; ++kj) {
                const double* row = col + ((c * kh + ki) * kw + kj) * Ho * Wo;
                i64 wlo, whi;
                valid_range(Wo, W, kj, pad, stride, wlo, whi);
                for (i64 ho = 0; ho < Ho; ++ho) {
                    const i64 ih = ho * stride + ki - pad;
                    if (ih < 0 || ih >= H) continue;
                    double* dst = plane + ih * W + kj - pad;
                    const double* src = row + ho * Wo;
                    if (stride == 1) {
                        for (i64 wo = wlo; wo < whi; ++wo) dst[wo] += src[wo];
                    } else {
                        for (i64 wo = wlo; wo < whi; ++wo) dst[wo * stride] += src[wo];
                    }
                }
            }
        }
    }
}

template <bool kParallel>
void bmm_impl(const double* A, const double* B, double* C, i64 N, i64 M, i64 K, i64 P, bool accumulate) {
#pragma omp parallel for collapse(2) schedule(static) if (kParallel)
    for (i64 n = 0; n < N; ++n) {
        for (i64 m = 0; m < M; ++m) {
            const double* arow = A + (n * M + m) * K;
            const double* bp = B + n * K * P;
            double* crow = C + (n * M + m) * P;
            if (!accumulate)
                for (i64 p = 0; p < P; ++p) crow[p] = 0.0;
            for (i64 k = 0; k < K; ++k) {
                const double a = arow[k];
                const double* brow = bp + k * P;
                for (i64 p = 0; p < P; ++p) crow[p] += a * brow[p];
            }
        }
    }
}

template <bool kParallel>
void bmm_bt_impl(const double* A, const double* B, double* C, i64 N, i64 M, i64 K, i64 P, bool accumulate) {
#pragma omp parallel for collapse(2) schedule(static) if (kParallel)
    for (i64 n = 0; n < N; ++n) {
        for (i64 m = 0; m < M; ++m) {
            const double* arow = A + (n * M + m) * K;
            const double* bp = B + n * P * K;
            double* crow = C + (n * M + m) * P;
            for (i64 p = 0; p < P; ++p) {
                const double acc = dot_lanes(arow, bp + p * K, K);
                if (accumulate)
                    crow[p] += acc;
                else
                    crow[p] = acc;
            }
        }
    }
}

template <bool kParallel>
void bmm_at_impl(const double* A, const double* G, double* C, i64 N, i64 M, i64 K, i64 P, bool accumulate) {
#pragma omp parallel for collapse(2) schedule(static) if (kParallel)
    for (i64 n = 0; n < N; ++n) {
        for (i64 k = 0; k < K; ++k) {
            const double* ap = A + n * M * K;
            const double* gp = G + n * M * P;
            double* crow = C + (n * K + k) * P;
            if (!accumulate)
                for (i64 p = 0; p < P; ++p) crow[p] = 0.0;
            for (i64 m = 0; m < M; ++m) {
                const double a = ap[m * K + k];
                const double* grow = gp + m * P;
                for (i64 p = 0; p < P; ++p) crow[p] += a * grow[p];
            }
        }
    }
}

// Forward dispatches on the output row length: direct saxpy when rows are
// long enough to amortize the per-row setup, im2col + matrix product when
// they are short. Accumulation order per element is the tap order either
// way. Backward always goes through the patch matrix.
template <bool kParallel>
void conv2d_fwd_direct_impl(const double* x, const double* w, const double* bias, double* y,
                            i64 B, i64 C, i64 H, i64 W, i64 O, i64 kh, i64 kw, i64 pad, i64 stride) {
    const i64 Ho = conv_out_dim(H, kh, pad, stride);
    const i64 Wo = conv_out_dim(W, kw, pad, stride);
#pragma omp parallel for collapse(2) schedule(static) if (kParallel)
    for (i64 b = 0; b < B; ++b) {
        for (i64 o = 0; o < O; ++o) {
            double* yp = y + (b * O + o) * Ho * Wo;
            const double bv = bias ? bias[o] : 0.0;
            for (i64 t = 0; t < Ho * Wo; ++t) yp[t] = bv;
            for (i64 c = 0; c < C; ++c) {
                const double* xp = x + (b * C + c) * H * W;
                for (i64 ki = 0; ki < kh; ++ki) {
                    for (i64 kj = 0; kj < kw; ++kj) {
                        const double wk = w[((o * C + c) * kh + ki) * kw + kj];
                        i64 wlo, whi;
                        valid_range(Wo, W, kj, pad, stride, wlo, whi);
                        for (i64 ho = 0; ho < Ho; ++ho) {
                            const i64 ih = ho * stride + ki - pad;
                            if (ih < 0 || ih >= H) continue;
                            const double* xrow = xp + ih * W + kj - pad;
                            double* yrow = yp + ho * Wo;
                            if (stride == 1) {
                                for (i64 wo = wlo; wo < whi; ++wo) yrow[wo] += xrow[wo] * wk;
                            } else {
                                for (i64 wo = wlo; wo < whi; ++wo) yrow[wo] += xrow[wo * stride] * wk;
                            }
                        }
                    }
                }
            }
        }
    }
}

template <bool kParallel>
void conv2d_fwd_im2col_impl(const double* x, const double* w, const double* bias, double* y,
                            i64 B, i64 C, i64 H, i64 W, i64 O, i64 kh, i64 kw, i64 pad, i64 stride) {
    const i64 Ho = conv_out_dim(H, kh, pad, stride);
    const i64 Wo = conv_out_dim(W, kw, pad, stride);
    const i64 K = C * kh * kw;
    const i64 N = Ho * Wo;
    double* col = scratch(0, K * N);
    for (i64 b = 0; b < B; ++b) {
        im2col(x + b * C * H * W, col, C, H, W, kh, kw, pad, stride, Ho, Wo);
        double* yp = y + b * O * N;
        if (bias) {
#pragma omp parallel for schedule(static) if (kParallel)
            for (i64 o = 0; o < O; ++o)
                for (i64 t = 0; t < N; ++t) yp[o * N + t] = bias[o];
        } else {
            for (i64 t = 0; t < O * N; ++t) yp[t] = 0.0;
        }
        bmm_impl<kParallel>(w, col, yp, 1, O, K, N, true);
    }
}

template <bool kParallel>
void conv2d_fwd_impl(const double* x, const double* w, const double* bias, double* y,
                     i64 B, i64 C, i64 H, i64 W, i64 O, i64 kh, i64 kw, i64 pad, i64 stride) {
    const i64 Wo = conv_out_dim(W, kw, pad, stride);
    if (Wo >= 32 || (kh == 1 && kw == 1))
        conv2d_fwd_direct_impl<kParallel>(x, w, bias, y, B, C, H, W, O, kh, kw, pad, stride);
    else
        conv2d_fwd_im2col_impl<kParallel>(x, w, bias, y, B, C, H, W, O, kh, kw, pad, stride);
}

template <bool kParallel>
void conv2d_bwd_input_impl(const double* gy, const double* w, double* gx,
                           i64 B, i64 C, i64 H, i64 W, i64 O, i64 kh, i64 kw, i64 pad, i64 stride) {
    const i64 Ho = conv_out_dim(H, kh, pad, stride);
    const i64 Wo = conv_out_dim(W, kw, pad, stride);
    const i64 K = C * kh * kw;
    const i64 N = Ho * Wo;
    double* gcol = scratch(0, K * N);
    for (i64 b = 0; b < B; ++b) {
        // gcol = w^T @ gy[b]
        bmm_at_impl<kParallel>(w, gy + b * O * N, gcol, 1, O, K, N, false);
        col2im_add(gcol, gx + b * C * H * W, C, H, W, kh, kw, pad, stride, Ho, Wo);
    }
}

template <bool kParallel>
void conv2d_bwd_weight_impl(const double* x, const double* gy, double* gw, double* gb,
                            i64 B, i64 C, i64 H, i64 W, i64 O, i64 kh, i64 kw, i64 pad, i64 stride) {
    const i64 Ho = conv_out_dim(H, kh, pad, stride);
    const i64 Wo = conv_out_dim(W, kw, pad, stride);
    const i64 K = C * kh * kw;
    const i64 N = Ho * Wo;
    const bool identity_patch = kh == 1 && kw == 1 && pad == 0 && stride == 1;
    double* col = identity_patch ? nullptr : scratch(1, K * N);
    for (i64 b = 0; b < B; ++b) {
        const double* patches = x + b * C * H * W;
        if (!identity_patch) {
            im2col(x + b * C * H * W, col, C, H, W, kh, kw, pad, stride, Ho, Wo);
            patches = col;
        }
        // gw += gy[b] @ P^T
        bmm_bt_impl<kParallel>(gy + b * O * N, patches, gw, 1, O, N, K, true);
    }
    if (gb) {
#pragma omp parallel for schedule(static) if (kParallel)
        for (i64 o = 0; o < O; ++o) {
            double acc = 0.0;
            for (i64 b = 0; b < B; ++b) {
                const double* gyp = gy + (b * O + o) * Ho * Wo;
                for (i64 t = 0; t < Ho * Wo; ++t) acc += gyp[t];
            }
            gb[o] += acc;
        }
    }
}




// Keys cubic convolution weights for a = -0.5 at fractional offset f in [0,1);
// taps apply to samples at positions base-1 .. base+2.
inline void keys_weights(double f, double wts[4]) {
    const double a = -0.5;
    const double t0 = 1.0 + f; // distance to sample base-1
    const double t1 = f;
    const double t2 = 1.0 - f;
    const double t3 = 2.0 - f;
    wts[0] = a * t0 * t0 * t0 - 5.0 * a * t0 * t0 + 8.0 * a * t0 - 4.0 * a;
    wts[1] = (a + 2.0) * t1 * t1 * t1 - (a + 3.0) * t1 * t1 + 1.0;
    wts[2] = (a + 2.0) * t2 * t2 * t2 - (a + 3.0) * t2 * t2 + 1.0;
    wts[3] = a * t3 * t3 * t3 - 5.0 * a * t3 * t3 + 8.0 * a * t3 - 4.0 * a;
}

template <bool kParallel>
void bicubic_impl(const double* src, i64 src_h, i64 src_w, double* dst, i64 dst_h, i64 dst_w,
                  double row0, double drow, double col0, double dcol) {
    // Per-column taps are shared by all rows; precompute them.
    std::vector<i64> cbase(dst_w);
    std::vector<double> cw(dst_w * 4);
    for (i64 j = 0; j < dst_w; ++j) {
        const double fc = col0 + j * dcol;
        const double fl = std::floor(fc);
        cbase[j] = static_cast<i64>(fl);
        keys_weights(fc - fl, &cw[j * 4]);
    }
    auto clampi = [](i64 v, i64 n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); };
#pragma omp parallel for schedule(static) if (kParallel)
    for (i64 i = 0; i < dst_h; ++i) {
        const double fr = row0 + i * drow;
        const double rfl = std::floor(fr);
        const i64 rbase = static_cast<i64>(rfl);
        double rw[4];
        keys_weights(fr - rfl, rw);
        const double* rows[4];
        for (int m = 0; m < 4; ++m) rows[m] = src + clampi(rbase - 1 + m, src_h) * src_w;
        double* drow_p = dst + i * dst_w;
        for (i64 j = 0; j < dst_w; ++j) {
            const double* w4 = &cw[j * 4];
            i64 cidx[4];
            for (int n = 0; n < 4; ++n) cidx[n] = clampi(cbase[j] - 1 + n, src_w);
            double acc = 0.0;
            for (int m = 0; m < 4; ++m) {
                const double* r = rows[m];
                const double rowv =
                    w4[0] * r[cidx[0]] + w4[1] * r[cidx[1]] + w4[2] * r[cidx[2]] + w4[3] * r[cidx[3]];
                acc += rw[m] * rowv;
            }
            drow_p[j] = acc;
        }
    }
}

constexpr i64 kSumChunk = 4096;

template <bool kParallel>
double sum_impl(const double* v, i64 n) {
    if (n == 0) return 0.0;
    const i64 nchunks = (n + kSumChunk - 1) / kSumChunk;
    std::vector<double> partial(nchunks);
#pragma omp parallel for schedule(static) if (kParallel)
    for (i64 c = 0; c < nchunks; ++c) {
        const i64 lo = c * kSumChunk;
        const i64 hi = std::min(n, lo + kSumChunk);
        partial[c] = pairwise_sum(std::span<const double>(v + lo, hi - lo));
    }
    return pairwise_sum(partial);
}

} // namespace

void conv2d_fwd(const double* x, const double* w, const double* bias, double* y,
                i64 B, i64 C, i64 H, i64 W, i64 O, i64 kh, i64 kw, i64 pad, i64 stride) {
    conv2d_fwd_impl<true>(x, w, bias, y, B, C, H, W, O, kh, kw, pad, stride);
}
void conv2d_bwd_input(const double* gy, const double* w, double* gx,
                      i64 B, i64 C, i64 H, i64 W, i64 O, i64 kh, i64 kw, i64 pad, i64 stride) {
    conv2d_bwd_input_impl<true>(gy, w, gx, B, C, H, W, O, kh, kw, pad, stride);
}
void conv2d_bwd_weight(const double* x, const double* gy, double* gw, double* gb,
                       i64 B, i64 C, i64 H, i64 W, i64 O, i64 kh, i64 kw, i64 pad, i64 stride) {
    conv2d_bwd_weight_impl<true>(x, gy, gw, gb, B, C, H, W, O, kh, kw, pad, stride);
}
void bmm(const double* A, const double* B, double* C, i64 N, i64 M, i64 K, i64 P, bool accumulate) {
    bmm_impl<true>(A, B, C, N, M, K, P, accumulate);
}
void bmm_bt(const double* A, const double* B, double* C, i64 N, i64 M, i64 K, i64 P, bool accumulate) {
    bmm_bt_impl<true>(A, B, C, N, M, K, P, accumulate);
}
void bmm_at(const double* A, const double* G, double* C, i64 N, i64 M, i64 K, i64 P, bool accumulate) {
    bmm_at_impl<true>(A, G, C, N, M, K, P, accumulate);
}
void bicubic_resample(const double* src, i64 src_h, i64 src_w, double* dst, i64 dst_h, i64 dst_w,
                      double row0, double drow, double col0, double dcol) {
    bicubic_impl<true>(src, src_h, src_w, dst, dst_h, dst_w, row0, drow, col0, dcol);
}
double sum(const double* v, i64 n) { return sum_impl<true>(v, n); }

void maxpool2x2_fwd(const double* x, double* y, std::uint8_t* argmax, i64 B, i64 C, i64 H, i64 W) {
    const i64 Ho = H / 2, Wo = W / 2;
#pragma omp parallel for collapse(2) schedule(static)
    for (i64 b = 0; b < B; ++b) {
        for (i64 c = 0; c < C; ++c) {
            const double* xp = x + (b * C + c) * H * W;
            double* yp = y + (b * C + c) * Ho * Wo;
            std::uint8_t* ap = argmax + (b * C + c) * Ho * Wo;
            for (i64 i = 0; i < Ho; ++i) {
                for (i64 j = 0; j < Wo; ++j) {
                    const double v00 = xp[(2 * i) * W + 2 * j];
                    const double v01 = xp[(2 * i) * W + 2 * j + 1];
                    const double v10 = xp[(2 * i + 1) * W + 2 * j];
                    const double v11 = xp[(2 * i + 1) * W + 2 * j + 1];
                    double best = v00;
                    std::uint8_t arg = 0;
                    if (v01 > best) { best = v01; arg = 1; }
                    if (v10 > best) { best = v10; arg = 2; }
                    if (v11 > best) { best = v11; arg = 3; }
                    yp[i * Wo + j] = best;
                    ap[i * Wo + j] = arg;
                }
            }
        }
    }
}

void maxpool2x2_bwd(const double* gy, const std::uint8_t* argmax, double* gx, i64 B, i64 C, i64 H, i64 W) {
    const i64 Ho = H / 2, Wo = W / 2;
#pragma omp parallel for collapse(2) schedule(static)
    for (i64 b = 0; b < B; ++b) {
        for (i64 c = 0; c < C; ++c) {
            const double* gyp = gy + (b * C + c) * Ho * Wo;
            double* gxp = gx + (b * C + c) * H * W;
            const std::uint8_t* ap = argmax + (b * C + c) * Ho * Wo;
            for (i64 i = 0; i < Ho; ++i) {
                for (i64 j = 0; j < Wo; ++j) {
                    const std::uint8_t arg = ap[i * Wo + j];
                    const i64 ih = 2 * i + (arg >> 1);
                    const i64 iw = 2 * j + (arg & 1);
                    gxp[ih * W + iw] += gyp[i * Wo + j];
                }
            }
        }
    }
}

void convt2x2_fwd(const double* x, const double* w, const double* bias, double* y,
                  i64 B, i64 C, i64 H, i64 W, i64 O) {
    const i64 Hy = 2 * H, Wy = 2 * W;
#pragma omp parallel for collapse(2) schedule(static)
    for (i64 b = 0; b < B; ++b) {
        for (i64 o = 0; o < O; ++o) {
            double* yp = y + (b * O + o) * Hy * Wy;
            const double bv = bias ? bias[o] : 0.0;
            for (i64 t = 0; t < Hy * Wy; ++t) yp[t] = bv;
            for (i64 c = 0; c < C; ++c) {
                const double* xp = x + (b * C + c) * H * W;
                for (i64 di = 0; di < 2; ++di) {
                    for (i64 dj = 0; dj < 2; ++dj) {
                        const double wk = w[((c * O + o) * 2 + di) * 2 + dj];
                        for (i64 h = 0; h < H; ++h) {
                            const double* xrow = xp + h * W;
                            double* yrow = yp + (2 * h + di) * Wy + dj;
                            for (i64 wcol = 0; wcol < W; ++wcol) yrow[2 * wcol] += xrow[wcol] * wk;
                        }
                    }
                }
            }
        }
    }
}

void convt2x2_bwd_input(const double* gy, const double* w, double* gx,
                        i64 B, i64 C, i64 H, i64 W, i64 O) {
    const i64 Hy = 2 * H, Wy = 2 * W;
#pragma omp parallel for collapse(2) schedule(static)
    for (i64 b = 0; b < B; ++b) {
        for (i64 c = 0; c < C; ++c) {
            double* gxp = gx + (b * C + c) * H * W;
            for (i64 o = 0; o < O; ++o) {
                const double* gyp = gy + (b * O + o) * Hy * Wy;
                for (i64 di = 0; di < 2; ++di) {
                    for (i64 dj = 0; dj < 2; ++dj) {
                        const double wk = w[((c * O + o) * 2 + di) * 2 + dj];
                        for (i64 h = 0; h < H; ++h) {
                            double* gxrow = gxp + h * W;
                            const double* gyrow = gyp + (2 * h + di) * Wy + dj;
                            for (i64 wcol = 0; wcol < W; ++wcol) gxrow[wcol] += gyrow[2 * wcol] * wk;
                        }
                    }
                }
            }
        }
    }
}

void convt2x2_bwd_weight(const double* x, const double* gy, double* gw, double* gb,
                         i64 B, i64 C, i64 H, i64 W, i64 O) {
    const i64 Hy = 2 * H, Wy = 2 * W;
#pragma omp parallel for collapse(2) schedule(static)
    for (i64 c = 0; c < C; ++c) {
        for (i64 o = 0; o < O; ++o) {
            for (i64 di = 0; di < 2; ++di) {
                for (i64 dj = 0; dj < 2; ++dj) {
                    double acc = 0.0;
                    for (i64 b = 0; b < B; ++b) {
                        const double* xp = x + (b * C + c) * H * W;
                        const double* gyp = gy + (b * O + o) * Hy * Wy;
                        for (i64 h = 0; h < H; ++h) {
                            const double* gyrow = gyp + (2 * h + di) * Wy + dj;
                            acc += dot_lanes_strided(gyrow, 2, xp + h * W, W);
                        }
                    }
                    gw[((c * O + o) * 2 + di) * 2 + dj] += acc;
                }
            }
        }
    }
    if (gb) {
#pragma omp parallel for schedule(static)
        for (i64 o = 0; o < O; ++o) {
            double acc = 0.0;
            for (i64 b = 0; b < B; ++b) {
                const double* gyp = gy + (b * O + o) * Hy * Wy;
                for (i64 t = 0; t < Hy * Wy; ++t) acc += gyp[t];
            }
            gb[o] += acc;
        }
    }
}

namespace serial {

void conv2d_fwd(const double* x, const double* w, const double* bias, double* y,
                i64 B, i64 C, i64 H, i64 W, i64 O, i64 kh, i64 kw, i64 pad, i64 stride) {
    conv2d_fwd_impl<false>(x, w, bias, y, B, C, H, W, O, kh, kw, pad, stride);
}
void conv2d_bwd_input(const double* gy, const double* w, double* gx,
                      i64 B, i64 C, i64 H, i64 W, i64 O, i64 kh, i64 kw, i64 pad, i64 stride) {
    conv2d_bwd_input_impl<false>(gy, w, gx, B, C, H, W, O, kh, kw, pad, stride);
}
void conv2d_bwd_weight(const double* x, const double* gy, double* gw, double* gb,
                       i64 B, i64 C, i64 H, i64 W, i64 O, i64 kh, i64 kw, i64 pad, i64 stride) {
    conv2d_bwd_weight_impl<false>(x, gy, gw, gb, B, C, H, W, O, kh, kw, pad, stride);
}
void bmm(const double* A, const double* B, double* C, i64 N, i64 M, i64 K, i64 P, bool accumulate) {
    bmm_impl<false>(A, B, C, N, M, K, P, accumulate);
}
void bmm_bt(const double* A, const double* B, double* C, i64 N, i64 M, i64 K, i64 P, bool accumulate) {
    bmm_bt_impl<false>(A, B, C, N, M, K, P, accumulate);
}
void bmm_at(const double* A, const double* G, double* C, i64 N, i64 M, i64 K, i64 P, bool accumulate) {
    bmm_at_impl<false>(A, G, C, N, M, K, P, accumulate);
}
void bicubic_resample(const double* src, i64 src_h, i64 src_w, double* dst, i64 dst_h, i64 dst_w,
                      double row0, double drow, double col0, double dcol) {
    bicubic_impl<false>(src, src_h, src_w, dst, dst_h, dst_w, row0, drow, col0, dcol);
}
double sum(const double* v, i64 n) { return sum_impl<false>(v, n); }

} // namespace serial

} // namespace gridsr::kernels
