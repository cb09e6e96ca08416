#include <doctest.h>

#include <cmath>

#include "gridsr/metrics.hpp"

using namespace gridsr;
using namespace gridsr::metrics;

//----------------------------------------------------------------------------
// Independent naive oracle: plain accumulation loops, no shared code with the
// metrics implementation.
//----------------------------------------------------------------------------

namespace oracle {

double rmse(const std::vector<double>& p, const std::vector<double>& r) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) acc += (p[i] - r[i]) * (p[i] - r[i]);
    return std::sqrt(acc / p.size());
}

double mae(const std::vector<double>& p, const std::vector<double>& r) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) acc += std::fabs(p[i] - r[i]);
    return acc / p.size();
}

double bias(const std::vector<double>& p, const std::vector<double>& r) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) acc += p[i] - r[i];
    return acc / p.size();
}

double ssim(const std::vector<double>& p, const std::vector<double>& r, double c1, double c2) {
    const double n = static_cast<double>(p.size());
    double mp = 0.0, mr = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        mp += p[i];
        mr += r[i];
    }
    mp /= n;
    mr /= n;
    double vp = 0.0, vr = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        vp += (p[i] - mp) * (p[i] - mp);
        vr += (r[i] - mr) * (r[i] - mr);
        cov += (p[i] - mp) * (r[i] - mr);
    }
    vp /= n;
    vr /= n;
    cov /= n;
    return ((2.0 * mr * mp + c1) * (2.0 * cov + c2)) /
           ((mr * mr + mp * mp + c1) * (vr + vp + c2));
}

double psnr(const std::vector<double>& p, const std::vector<double>& r, double maxv) {
    double mse = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) mse += (p[i] - r[i]) * (p[i] - r[i]);
    mse /= p.size();
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(maxv * maxv / mse);
}

} // namespace oracle

namespace {

Field make_field(const GridSpec& g, const std::vector<double>& v, TimeStamp t = 0) {
    Field f(g, t);
    f.values = v;
    return f;
}

} // namespace

TEST_CASE("metric oracle equivalence over 1000 random 8x8 pairs") {
    Rng rng(12345);
    const SSIMParams sp = SSIMParams::from_range(4.0);
    const PSNRParams pp{4.0};
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> p(64), r(64);
        for (double& v : p) v = 2.0 * rng.next_normal();
        for (double& v : r) v = 2.0 * rng.next_normal();
        auto close = [](double a, double b) {
            return std::abs(a - b) <= 1e-10 * std::max({1.0, std::abs(a), std::abs(b)});
        };
        CHECK(close(rmse(p, r), oracle::rmse(p, r)));
        CHECK(close(mae(p, r), oracle::mae(p, r)));
        CHECK(close(bias(p, r), oracle::bias(p, r)));
        CHECK(close(ssim(p, r, sp), oracle::ssim(p, r, sp.c1, sp.c2)));
        CHECK(close(psnr(p, r, pp), oracle::psnr(p, r, pp.max_value)));
    }
}

TEST_CASE("analytic metric cases") {
    SUBCASE("identical fields") {
        std::vector<double> v{1.0, 2.0, 3.0, 4.0};
        CHECK(rmse(v, v) == 0.0);
        CHECK(mae(v, v) == 0.0);
        CHECK(bias(v, v) == 0.0);
    }
    SUBCASE("ref [0,0], pred [3,4]") {
        std::vector<double> p{3.0, 4.0}, r{0.0, 0.0};
        CHECK(rmse(p, r) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-12));
        CHECK(mae(p, r) == doctest::Approx(3.5).epsilon(1e-12));
        CHECK(bias(p, r) == doctest::Approx(3.5).epsilon(1e-12));
    }
    SUBCASE("constant offset") {
        Rng rng(4);
        std::vector<double> r(32), p(32);
        for (std::size_t i = 0; i < r.size(); ++i) {
            r[i] = rng.next_normal();
            p[i] = r[i] + 0.75;
        }
        CHECK(bias(p, r) == doctest::Approx(0.75).epsilon(1e-12));
        CHECK(mae(p, r) == doctest::Approx(0.75).epsilon(1e-12));
        CHECK(rmse(p, r) == doctest::Approx(0.75).epsilon(1e-12));
    }
    SUBCASE("psnr: MAX 255, uniform error 16") {
        std::vector<double> p(10, 16.0), r(10, 0.0);
        CHECK(psnr(p, r, PSNRParams{255.0}) ==
              doctest::Approx(10.0 * std::log10(65025.0 / 256.0)).epsilon(1e-12));
    }
    SUBCASE("halving the MSE raises PSNR by ~3.0103 dB") {
        std::vector<double> r(10, 0.0), p1(10, 2.0), p2(10, 2.0 / std::sqrt(2.0));
        const double d = psnr(p2, r, PSNRParams{10.0}) - psnr(p1, r, PSNRParams{10.0});
        CHECK(d == doctest::Approx(10.0 * std::log10(2.0)).epsilon(1e-9));
    }
    SUBCASE("psnr of identical fields is the +infinity sentinel") {
        std::vector<double> v{1.0, 2.0};
        CHECK(std::isinf(psnr(v, v, PSNRParams{10.0})));
    }
}

TEST_CASE("ssim analytic cases") {
    SUBCASE("identical non-constant fields score exactly 1") {
        std::vector<double> v{0.0, 1.0, 0.5, 0.25};
        CHECK(ssim(v, v, SSIMParams::from_range(1.0)) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("equal constants score 1 through the stabilizers") {
        std::vector<double> v(8, 3.0);
        CHECK(ssim(v, v, SSIMParams::from_range(2.0)) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("2x2 toy pair against the oracle value") {
        std::vector<double> r{0.0, 1.0, 0.0, 1.0}, p{0.0, 2.0, 0.0, 2.0};
        const SSIMParams sp = SSIMParams::from_range(2.0);
        const double expect = oracle::ssim(p, r, sp.c1, sp.c2);
        CHECK(ssim(p, r, sp) == doctest::Approx(expect).epsilon(1e-12));
        CHECK(expect > 0.5);
        CHECK(expect < 0.8);
    }
    SUBCASE("ssim is symmetric") {
        Rng rng(6);
        std::vector<double> a(16), b(16);
        for (double& v : a) v = rng.next_normal();
        for (double& v : b) v = rng.next_normal();
        const SSIMParams sp = SSIMParams::from_range(5.0);
        CHECK(ssim(a, b, sp) == doctest::Approx(ssim(b, a, sp)).epsilon(1e-14));
    }
}

TEST_CASE("RMSE >= MAE >= |Bias| for random pairs") {
    Rng rng(9);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> p(24), r(24);
        for (double& v : p) v = rng.next_normal();
        for (double& v : r) v = rng.next_normal();
        const double rm = rmse(p, r), ma = mae(p, r), bi = bias(p, r);
        CHECK(rm >= ma - 1e-12);
        CHECK(ma >= std::abs(bi) - 1e-12);
    }
}

TEST_CASE("gridbox maps: trivial and analytic cases") {
    GridSpec g{45.0, -6.0, -0.5, 0.5, 4, 4};
    Rng rng(10);

    SUBCASE("pred == ref gives zero maps") {
        std::vector<Field> ref, pred;
        for (int t = 0; t < 5; ++t) {
            std::vector<double> v(16);
            for (double& x : v) x = rng.next_normal();
            ref.push_back(make_field(g, v, t * kTimeStepSeconds));
            pred.push_back(make_field(g, v, t * kTimeStepSeconds));
        }
        const MetricMaps maps = gridbox_maps(pred, ref);
        for (double v : maps.bias.values) CHECK(v == 0.0);
        for (double v : maps.rmse.values) CHECK(v == 0.0);
        CHECK(maps.undefined_count() == 0);
    }

    SUBCASE("pred = ref + 1 gives a unit bias map") {
        std::vector<Field> ref, pred;
        for (int t = 0; t < 5; ++t) {
            std::vector<double> v(16);
            for (double& x : v) x = rng.next_normal();
            ref.push_back(make_field(g, v, t * kTimeStepSeconds));
            for (double& x : v) x += 1.0;
            pred.push_back(make_field(g, v, t * kTimeStepSeconds));
        }
        const MetricMaps maps = gridbox_maps(pred, ref);
        for (double v : maps.bias.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
        for (double v : maps.rmse.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("white-noise rmse/std matches the analytic ratio within 3%") {
        // ref ~ N(0, sigma_ref^2), pred = ref + N(0, sigma_err^2):
        // per-cell RMSE -> sigma_err, ref std -> sigma_ref.
        const double sigma_ref = 2.0, sigma_err = 0.5;
        std::vector<Field> ref, pred;
        const int nt = 10000;
        for (int t = 0; t < nt; ++t) {
            std::vector<double> rv(16), pv(16);
            for (int c = 0; c < 16; ++c) {
                rv[c] = sigma_ref * rng.next_normal();
                pv[c] = rv[c] + sigma_err * rng.next_normal();
            }
            ref.push_back(make_field(g, rv, t * kTimeStepSeconds));
            pred.push_back(make_field(g, pv, t * kTimeStepSeconds));
        }
        const MetricMaps maps = gridbox_maps(pred, ref);
        const double expect = sigma_err / sigma_ref;
        for (double v : maps.rmse_over_std.values)
            CHECK(std::abs(v - expect) < 0.03 * expect + 0.01);
    }

    SUBCASE("zero reference variance flags the cell undefined") {
        std::vector<Field> ref, pred;
        for (int t = 0; t < 4; ++t) {
            std::vector<double> rv(16, 1.0), pv(16, 1.5); // constant over time
            rv[3] = 1.0 + t; // cell 3 varies
            pv[3] = rv[3];
            ref.push_back(make_field(g, rv, t * kTimeStepSeconds));
            pred.push_back(make_field(g, pv, t * kTimeStepSeconds));
        }
        const MetricMaps maps = gridbox_maps(pred, ref);
        CHECK(maps.undefined_count() == 15);
        CHECK(maps.undefined[3] == 0);
    }
}

namespace {

std::vector<Field> season_series(const GridSpec& g, Rng& rng, int per_season) {
    // Timestamps spread across all four seasons of 2019.
    std::vector<Field> out;
    for (const char* day : {"2019-01-15", "2019-04-15", "2019-07-15", "2019-10-15"}) {
        for (int k = 0; k < per_season; ++k) {
            std::vector<double> v(g.size());
            for (double& x : v) x = 280.0 + rng.next_normal();
            out.push_back(make_field(g, v, parse_time(day) + k * kTimeStepSeconds));
        }
    }
    return out;
}

} // namespace

TEST_CASE("seasonal table: trivial dominance and structure") {
    GridSpec g{45.0, -6.0, -0.5, 0.5, 4, 4};
    Rng rng(20);
    const std::vector<Field> ref = season_series(g, rng, 3);

    std::vector<Field> perfect = ref;
    std::vector<Field> offset = ref;
    for (Field& f : offset)
        for (double& v : f.values) v += 1.0;

    const MetricTable table = seasonal_table({{"exact", &perfect}, {"off", &offset}}, ref);
    REQUIRE(table.methods.size() == 2);

    // Exact method: RMSE/MAE/Bias all 0, SSIM 1 in every defined column.
    for (int col = 0; col < 5; ++col) {
        CHECK(table.cells[0][0][col].value == doctest::Approx(0.0));
        CHECK(table.cells[1][0][col].value == doctest::Approx(0.0));
        CHECK(table.cells[2][0][col].value == doctest::Approx(0.0));
        CHECK(table.cells[3][0][col].value == doctest::Approx(1.0).epsilon(1e-9));
        // Exact wins every cell.
        CHECK(table.cells[0][0][col].best);
        CHECK_FALSE(table.cells[0][1][col].best);
    }

    // Annual is computed over all timestamps, not the mean of seasonal cells:
    // for the offset method every error is exactly 1, so the annual RMSE is 1.
    CHECK(table.cells[0][1][4].value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("season with zero timesteps leaves the cell undefined") {
    GridSpec g{45.0, -6.0, -0.5, 0.5, 2, 2};
    Rng rng(23);
    std::vector<Field> ref;
    for (int k = 0; k < 4; ++k) {
        std::vector<double> v(4);
        for (double& x : v) x = rng.next_normal();
        ref.push_back(make_field(g, v, parse_time("2019-01-10") + k * kTimeStepSeconds));
    }
    std::vector<Field> pred = ref;
    const MetricTable table = seasonal_table({{"m", &pred}}, ref);
    CHECK(table.cells[0][0][0].defined);        // DJF has data
    CHECK_FALSE(table.cells[0][0][1].defined);  // MAM empty
    CHECK_FALSE(table.cells[0][0][2].defined);  // JJA empty
    CHECK(table.cells[0][0][4].defined);        // Annual
}

TEST_CASE("seasonal decomposition identity at the gridbox level") {
    // Sum over seasons of n_s * rmse_s^2 equals n * rmse_annual^2 per gridbox;
    // MAE and Bias decompose linearly. Verified through the public maps by
    // slicing the series per season.
    GridSpec g{45.0, -6.0, -0.5, 0.5, 3, 3};
    Rng rng(29);
    const std::vector<Field> ref = season_series(g, rng, 4);
    std::vector<Field> pred = ref;
    for (Field& f : pred)
        for (double& v : f.values) v += 0.3 * rng.next_normal();

    std::array<std::vector<std::size_t>, 4> by_season;
    for (std::size_t t = 0; t < ref.size(); ++t)
        by_season[static_cast<int>(season_of(ref[t].time))].push_back(t);

    for (std::size_t c = 0; c < g.size(); ++c) {
        double sq_sum = 0.0, mae_sum = 0.0, bias_sum = 0.0;
        for (const auto& idx : by_season) {
            double sq = 0.0, ad = 0.0, d = 0.0;
            for (std::size_t t : idx) {
                const double e = pred[t].values[c] - ref[t].values[c];
                sq += e * e;
                ad += std::abs(e);
                d += e;
            }
            sq_sum += sq;
            mae_sum += ad;
            bias_sum += d;
        }
        double sq_all = 0.0, ad_all = 0.0, d_all = 0.0;
        for (std::size_t t = 0; t < ref.size(); ++t) {
            const double e = pred[t].values[c] - ref[t].values[c];
            sq_all += e * e;
            ad_all += std::abs(e);
            d_all += e;
        }
        CHECK(std::abs(sq_sum - sq_all) < 1e-9);
        CHECK(std::abs(mae_sum - ad_all) < 1e-9);
        CHECK(std::abs(bias_sum - d_all) < 1e-9);
    }
}

TEST_CASE("misaligned series are rejected") {
    GridSpec g{45.0, -6.0, -0.5, 0.5, 2, 2};
    std::vector<Field> ref{make_field(g, {1, 2, 3, 4}, 0)};
    std::vector<Field> pred{make_field(g, {1, 2, 3, 4}, kTimeStepSeconds)};
    CHECK_THROWS_AS(seasonal_table({{"m", &pred}}, ref), AlignmentError);
    CHECK_THROWS_AS(gridbox_maps(pred, ref), AlignmentError);
}
