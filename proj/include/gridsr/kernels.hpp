#pragma once

#include <cstdint>

namespace gridsr::kernels {

// Data-parallel inner loops used by the tensor engine and the resampler.
//
// Every kernel here parallelizes so that each output element is owned by
// exactly one thread and accumulated in the same order as the serial
// reference in kernels::serial. Results are therefore bitwise identical to
// the reference for any thread count, which the unit tests assert and the
// bench target measures.

using i64 = std::int64_t;

//----------------------------------------------------------------------------
// Convolutions (NCHW, symmetric zero padding)
//----------------------------------------------------------------------------

inline i64 conv_out_dim(i64 in, i64 k, i64 pad, i64 stride) {
    return (in + 2 * pad - k) / stride + 1;
}

// y[B,O,Ho,Wo] = conv(x[B,C,H,W], w[O,C,kh,kw]) + bias[O]  (bias may be null)
void conv2d_fwd(const double* x, const double* w, const double* bias, double* y,
                i64 B, i64 C, i64 H, i64 W, i64 O, i64 kh, i64 kw, i64 pad, i64 stride);

// gx[B,C,H,W] += correlate(gy, w); gx must be pre-zeroed by the caller when
// it wants plain assignment.
void conv2d_bwd_input(const double* gy, const double* w, double* gx,
                      i64 B, i64 C, i64 H, i64 W, i64 O, i64 kh, i64 kw, i64 pad, i64 stride);

// gw[O,C,kh,kw] += x * gy reduction; gb[O] += sums of gy (gb may be null).
void conv2d_bwd_weight(const double* x, const double* gy, double* gw, double* gb,
                       i64 B, i64 C, i64 H, i64 W, i64 O, i64 kh, i64 kw, i64 pad, i64 stride);

// Transposed convolution, kernel 2, stride 2 (the UNet decoder up-step).
// y[B,O,2H,2W] = convT(x[B,C,H,W], w[C,O,2,2]) + bias[O]
void convt2x2_fwd(const double* x, const double* w, const double* bias, double* y,
                  i64 B, i64 C, i64 H, i64 W, i64 O);
void convt2x2_bwd_input(const double* gy, const double* w, double* gx,
                        i64 B, i64 C, i64 H, i64 W, i64 O);
void convt2x2_bwd_weight(const double* x, const double* gy, double* gw, double* gb,
                         i64 B, i64 C, i64 H, i64 W, i64 O);

//----------------------------------------------------------------------------
// Pooling
//----------------------------------------------------------------------------

// 2x2 max pooling, stride 2. argmax[i] in {0,1,2,3} records the winning
// corner for the backward scatter.
void maxpool2x2_fwd(const double* x, double* y, std::uint8_t* argmax,
                    i64 B, i64 C, i64 H, i64 W);
void maxpool2x2_bwd(const double* gy, const std::uint8_t* argmax, double* gx,
                    i64 B, i64 C, i64 H, i64 W);

//----------------------------------------------------------------------------
// Batched matrix products
//----------------------------------------------------------------------------

// C[n,m,p] (+)= A[n,m,k] @ B[n,k,p]
void bmm(const double* A, const double* B, double* C, i64 N, i64 M, i64 K, i64 P, bool accumulate);
// C[n,m,p] (+)= A[n,m,k] @ B[n,p,k]^T
void bmm_bt(const double* A, const double* B, double* C, i64 N, i64 M, i64 K, i64 P, bool accumulate);
// C[n,k,p] (+)= A[n,m,k]^T @ G[n,m,p]
void bmm_at(const double* A, const double* G, double* C, i64 N, i64 M, i64 K, i64 P, bool accumulate);

//----------------------------------------------------------------------------
// Bicubic resampling (Keys cubic convolution, a = -0.5, edge replication)
//----------------------------------------------------------------------------

// dst[i][j] samples src at fractional coordinates
// (row0 + i*drow, col0 + j*dcol), in source index units.
void bicubic_resample(const double* src, i64 src_h, i64 src_w, double* dst, i64 dst_h,
                      i64 dst_w, double row0, double drow, double col0, double dcol);

//----------------------------------------------------------------------------
// Reductions
//----------------------------------------------------------------------------

// Deterministic sum: fixed 4096-element chunks reduced pairwise. Identical
// result for any thread count.
double sum(const double* v, i64 n);

//----------------------------------------------------------------------------
// Serial reference implementations (kept for testing and benchmarking)
//----------------------------------------------------------------------------

namespace serial {

void conv2d_fwd(const double* x, const double* w, const double* bias, double* y,
                i64 B, i64 C, i64 H, i64 W, i64 O, i64 kh, i64 kw, i64 pad, i64 stride);
void conv2d_bwd_input(const double* gy, const double* w, double* gx,
                      i64 B, i64 C, i64 H, i64 W, i64 O, i64 kh, i64 kw, i64 pad, i64 stride);
void conv2d_bwd_weight(const double* x, const double* gy, double* gw, double* gb,
                       i64 B, i64 C, i64 H, i64 W, i64 O, i64 kh, i64 kw, i64 pad, i64 stride);
void bmm(const double* A, const double* B, double* C, i64 N, i64 M, i64 K, i64 P, bool accumulate);
void bmm_bt(const double* A, const double* B, double* C, i64 N, i64 M, i64 K, i64 P, bool accumulate);
void bmm_at(const double* A, const double* G, double* C, i64 N, i64 M, i64 K, i64 P, bool accumulate);
void bicubic_resample(const double* src, i64 src_h, i64 src_w, double* dst, i64 dst_h,
                      i64 dst_w, double row0, double drow, double col0, double dcol);
double sum(const double* v, i64 n);

} // namespace serial

} // namespace gridsr::kernels
