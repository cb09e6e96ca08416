// Benchmark of the OpenMP kernels against their serial reference
// implementations. Each kernel pair computes bitwise-identical results (the
// unit tests assert that); this target reports the throughput ratio.
//
// Usage: bench_kernels [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

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

double time_of(const std::function<void()>& fn, int repeats) {
    fn(); // warm up
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < repeats; ++r) fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count() / repeats;
}

void report(const char* name, double serial_s, double parallel_s, double gflop) {
    std::printf("%-24s serial %8.2f ms (%6.2f GFLOP/s)   parallel %8.2f ms (%6.2f GFLOP/s)   speedup %.2fx\n",
                name, 1e3 * serial_s, gflop / serial_s, 1e3 * parallel_s, gflop / parallel_s,
                serial_s / parallel_s);
}

} // namespace

int main(int argc, char** argv) {
    const int repeats = argc > 1 ? std::atoi(argv[1]) : 5;
#if defined(_OPENMP)
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP: not enabled\n");
#endif

    Rng rng(1);

    {
        const i64 B = 8, C = 32, H = 40, W = 40, O = 32, k = 3;
        const auto x = random_vec(rng, B * C * H * W);
        const auto w = random_vec(rng, O * C * k * k);
        const auto bias = random_vec(rng, O);
        std::vector<double> y(B * O * H * W);
        const double gflop = 2.0 * B * O * C * H * W * k * k * 1e-9;
        const double ts = time_of(
            [&] {
                kernels::serial::conv2d_fwd(x.data(), w.data(), bias.data(), y.data(), B, C, H, W,
                                            O, k, k, 1, 1);
            },
            repeats);
        const double tp = time_of(
            [&] {
                kernels::conv2d_fwd(x.data(), w.data(), bias.data(), y.data(), B, C, H, W, O, k, k,
                                    1, 1);
            },
            repeats);
        report("conv2d 3x3 fwd", ts, tp, gflop);

        const auto gy = random_vec(rng, y.size());
        std::vector<double> gw(w.size()), gb(O);
        const double ts2 = time_of(
            [&] {
                std::fill(gw.begin(), gw.end(), 0.0);
                std::fill(gb.begin(), gb.end(), 0.0);
                kernels::serial::conv2d_bwd_weight(x.data(), gy.data(), gw.data(), gb.data(), B, C,
                                                   H, W, O, k, k, 1, 1);
            },
            repeats);
        const double tp2 = time_of(
            [&] {
                std::fill(gw.begin(), gw.end(), 0.0);
                std::fill(gb.begin(), gb.end(), 0.0);
                kernels::conv2d_bwd_weight(x.data(), gy.data(), gw.data(), gb.data(), B, C, H, W, O,
                                           k, k, 1, 1);
            },
            repeats);
        report("conv2d 3x3 bwd weight", ts2, tp2, gflop);
    }

    {
        const i64 N = 64, M = 100, K = 32, P = 100;
        const auto a = random_vec(rng, N * M * K);
        const auto b = random_vec(rng, N * P * K);
        std::vector<double> c(N * M * P);
        const double gflop = 2.0 * N * M * K * P * 1e-9;
        const double ts = time_of(
            [&] { kernels::serial::bmm_bt(a.data(), b.data(), c.data(), N, M, K, P, false); },
            repeats);
        const double tp = time_of(
            [&] { kernels::bmm_bt(a.data(), b.data(), c.data(), N, M, K, P, false); }, repeats);
        report("bmm_bt (attention)", ts, tp, gflop);
    }

    {
        const i64 sh = 100, sw = 160, dh = 400, dw = 640;
        const auto src = random_vec(rng, sh * sw);
        std::vector<double> dst(dh * dw);
        const double gflop = 2.0 * 20 * dh * dw * 1e-9; // ~20 madds per output
        const double ts = time_of(
            [&] {
                kernels::serial::bicubic_resample(src.data(), sh, sw, dst.data(), dh, dw, 0.0,
                                                  double(sh) / dh, 0.0, double(sw) / dw);
            },
            repeats);
        const double tp = time_of(
            [&] {
                kernels::bicubic_resample(src.data(), sh, sw, dst.data(), dh, dw, 0.0,
                                          double(sh) / dh, 0.0, double(sw) / dw);
            },
            repeats);
        report("bicubic resample", ts, tp, gflop);
    }

    {
        const i64 n = 1 << 22;
        const auto v = random_vec(rng, n);
        const double gflop = n * 1e-9;
        const double ts =
            time_of([&] { (void)kernels::serial::sum(v.data(), n); }, repeats);
        const double tp = time_of([&] { (void)kernels::sum(v.data(), n); }, repeats);
        report("pairwise sum", ts, tp, gflop);
    }

    return 0;
}
