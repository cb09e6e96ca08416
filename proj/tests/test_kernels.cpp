#include <doctest.h>

#include <cmath>
#include <vector>

#include "gridsr/common.hpp"
#include "gridsr/kernels.hpp"

using namespace gridsr;
using kernels::i64;

namespace {

std::vector<double> random_vec(Rng& rng, i64 n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.next_normal();
    return v;
}

} // namespace

TEST_CASE("parallel kernels are bitwise identical to the serial reference") {
    Rng rng(42);
    const i64 B = 3, C = 5, H = 17, W = 19, O = 7, k = 3;

    const auto x = random_vec(rng, B * C * H * W);
    const auto w = random_vec(rng, O * C * k * k);
    const auto b = random_vec(rng, O);

    for (i64 stride : {i64{1}, i64{2}}) {
        const i64 Ho = kernels::conv_out_dim(H, k, 1, stride);
        const i64 Wo = kernels::conv_out_dim(W, k, 1, stride);
        std::vector<double> y1(B * O * Ho * Wo), y2(y1.size());
        kernels::conv2d_fwd(x.data(), w.data(), b.data(), y1.data(), B, C, H, W, O, k, k, 1, stride);
        kernels::serial::conv2d_fwd(x.data(), w.data(), b.data(), y2.data(), B, C, H, W, O, k, k, 1,
                                    stride);
        CHECK(y1 == y2);

        const auto gy = random_vec(rng, y1.size());
        std::vector<double> gx1(x.size(), 0.0), gx2(x.size(), 0.0);
        kernels::conv2d_bwd_input(gy.data(), w.data(), gx1.data(), B, C, H, W, O, k, k, 1, stride);
        kernels::serial::conv2d_bwd_input(gy.data(), w.data(), gx2.data(), B, C, H, W, O, k, k, 1,
                                          stride);
        CHECK(gx1 == gx2);

        std::vector<double> gw1(w.size(), 0.0), gw2(w.size(), 0.0), gb1(O, 0.0), gb2(O, 0.0);
        kernels::conv2d_bwd_weight(x.data(), gy.data(), gw1.data(), gb1.data(), B, C, H, W, O, k, k,
                                   1, stride);
        kernels::serial::conv2d_bwd_weight(x.data(), gy.data(), gw2.data(), gb2.data(), B, C, H, W,
                                           O, k, k, 1, stride);
        CHECK(gw1 == gw2);
        CHECK(gb1 == gb2);
    }
}

TEST_CASE("batched matmul variants match the serial reference bitwise") {
    Rng rng(7);
    const i64 N = 4, M = 9, K = 11, P = 6;
    const auto a = random_vec(rng, N * M * K);
    const auto bt = random_vec(rng, N * P * K);
    const auto bk = random_vec(rng, N * K * P);

    std::vector<double> c1(N * M * P), c2(N * M * P);
    kernels::bmm(a.data(), bk.data(), c1.data(), N, M, K, P, false);
    kernels::serial::bmm(a.data(), bk.data(), c2.data(), N, M, K, P, false);
    CHECK(c1 == c2);

    kernels::bmm_bt(a.data(), bt.data(), c1.data(), N, M, K, P, false);
    kernels::serial::bmm_bt(a.data(), bt.data(), c2.data(), N, M, K, P, false);
    CHECK(c1 == c2);

    std::vector<double> g1(N * K * P, 1.0), g2(N * K * P, 1.0);
    const auto gmat = random_vec(rng, N * M * P);
    kernels::bmm_at(a.data(), gmat.data(), g1.data(), N, M, K, P, true);
    kernels::serial::bmm_at(a.data(), gmat.data(), g2.data(), N, M, K, P, true);
    CHECK(g1 == g2);
}

TEST_CASE("deterministic sum matches the serial reference and is order-stable") {
    Rng rng(3);
    const auto v = random_vec(rng, 100003);
    CHECK(kernels::sum(v.data(), static_cast<i64>(v.size())) ==
          kernels::serial::sum(v.data(), static_cast<i64>(v.size())));
}

TEST_CASE("matmul against a naive triple loop") {
    Rng rng(11);
    const i64 M = 8, K = 13, P = 7;
    const auto a = random_vec(rng, M * K);
    const auto b = random_vec(rng, K * P);
    std::vector<double> c(M * P);
    kernels::bmm(a.data(), b.data(), c.data(), 1, M, K, P, false);
    for (i64 m = 0; m < M; ++m)
        for (i64 p = 0; p < P; ++p) {
            double acc = 0.0;
            for (i64 kk = 0; kk < K; ++kk) acc += a[m * K + kk] * b[kk * P + p];
            CHECK(c[m * P + p] == doctest::Approx(acc).epsilon(1e-12));
        }
}

TEST_CASE("bicubic reproduces constants exactly and ramps at interior points") {
    const i64 sh = 12, sw = 15;
    std::vector<double> constant(sh * sw, 281.5);
    std::vector<double> ramp(sh * sw);
    for (i64 i = 0; i < sh; ++i)
        for (i64 j = 0; j < sw; ++j) ramp[i * sw + j] = static_cast<double>(i) + 2.0 * j;

    const i64 dh = 37, dw = 41;
    // Sample strictly inside the source so no boundary replication is hit.
    const double row0 = 2.0, drow = (sh - 5.0) / dh;
    const double col0 = 2.0, dcol = (sw - 5.0) / dw;

    std::vector<double> out(dh * dw), out_serial(dh * dw);
    kernels::bicubic_resample(constant.data(), sh, sw, out.data(), dh, dw, row0, drow, col0, dcol);
    for (double v : out) CHECK(v == doctest::Approx(281.5).epsilon(1e-14));

    kernels::bicubic_resample(ramp.data(), sh, sw, out.data(), dh, dw, row0, drow, col0, dcol);
    kernels::serial::bicubic_resample(ramp.data(), sh, sw, out_serial.data(), dh, dw, row0, drow,
                                      col0, dcol);
    CHECK(out == out_serial);
    for (i64 i = 0; i < dh; ++i)
        for (i64 j = 0; j < dw; ++j) {
            const double expect = (row0 + i * drow) + 2.0 * (col0 + j * dcol);
            CHECK(std::abs(out[i * dw + j] - expect) < 1e-10);
        }
}

TEST_CASE("bicubic edge replication keeps outputs within data bounds for constants") {
    std::vector<double> src(25, 3.25);
    std::vector<double> out(100);
    // Deliberately sample beyond the source bounds.
    kernels::bicubic_resample(src.data(), 5, 5, out.data(), 10, 10, -2.0, 0.9, -2.0, 0.9);
    for (double v : out) CHECK(v == doctest::Approx(3.25).epsilon(1e-14));
}
