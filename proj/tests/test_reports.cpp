#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gridsr/reports.hpp"

using namespace gridsr;
using namespace gridsr::reports;

namespace {

std::string temp_dir(const char* tag) {
    const auto dir = std::filesystem::temp_directory_path() / (std::string("gridsr_rep_") + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

metrics::MetricTable sample_table() {
    GridSpec g{45.0, -6.0, -0.5, 0.5, 3, 3};
    Rng rng(5);
    std::vector<Field> ref;
    for (int k = 0; k < 6; ++k) {
        Field f(g, parse_time("2019-02-01") + k * kTimeStepSeconds);
        for (double& v : f.values) v = 280.0 + rng.next_normal();
        ref.push_back(f);
    }
    std::vector<Field> good = ref;
    std::vector<Field> off = ref;
    for (Field& f : off)
        for (double& v : f.values) v += 0.5;
    static std::vector<Field> s_good, s_off, s_ref;
    s_good = good;
    s_off = off;
    s_ref = ref;
    return metrics::seasonal_table({{"good", &s_good}, {"off", &s_off}}, s_ref);
}

} // namespace

TEST_CASE("metric table round-trips through JSON and renders as CSV") {
    const metrics::MetricTable table = sample_table();
    ReportMeta meta;
    meta.code_version = kVersion;
    meta.normalization = "lr_bicubic";
    meta.reproducible = true;
    meta.checkpoint_fingerprints["good"] = "abc123";

    const std::string json = table_to_json(table, meta);
    const metrics::MetricTable back = table_from_json(json);
    CHECK(back.methods == table.methods);
    CHECK(back.range_L == doctest::Approx(table.range_L));
    for (int m = 0; m < 5; ++m)
        for (std::size_t mi = 0; mi < table.methods.size(); ++mi)
            for (int col = 0; col < 5; ++col) {
                const auto& a = table.cells[m][mi][col];
                const auto& b = back.cells[m][mi][col];
                CHECK(a.defined == b.defined);
                CHECK(a.best == b.best);
                if (a.defined && !std::isinf(a.value))
                    CHECK(b.value == doctest::Approx(a.value).epsilon(1e-12));
            }

    const std::string csv = table_to_csv(table, meta);
    CHECK(csv.find("metric,method,DJF,MAM,JJA,SON,Annual") != std::string::npos);
    CHECK(csv.find("RMSE,good") != std::string::npos);
    CHECK(csv.find("# best RMSE") != std::string::npos);
    CHECK(csv.find("# checkpoint good: abc123") != std::string::npos);
    // PSNR of an exact method is the +inf sentinel, rendered as "inf".
    CHECK(csv.find("inf") != std::string::npos);
}

TEST_CASE("reproducible reports omit wall-clock timestamps") {
    const metrics::MetricTable table = sample_table();
    ReportMeta meta;
    meta.code_version = kVersion;
    meta.normalization = "lr_raw";
    meta.reproducible = true;
    meta.created = "2026-01-01T00:00Z"; // must be suppressed
    const std::string csv = table_to_csv(table, meta);
    CHECK(csv.find("created") == std::string::npos);
    const std::string json = table_to_json(table, meta);
    CHECK(json.find("created") == std::string::npos);
}

TEST_CASE("metric maps write NetCDF plus rendered PNGs") {
    const std::string dir = temp_dir("maps");
    GridSpec g{45.0, -6.0, -0.5, 0.5, 4, 5};
    Rng rng(9);
    std::vector<Field> ref, pred;
    for (int t = 0; t < 6; ++t) {
        Field r(g, t * kTimeStepSeconds), p(g, t * kTimeStepSeconds);
        for (std::size_t c = 0; c < g.size(); ++c) {
            r.values[c] = rng.next_normal();
            p.values[c] = r.values[c] + 0.2 * rng.next_normal();
        }
        ref.push_back(r);
        pred.push_back(p);
    }
    const metrics::MetricMaps maps = metrics::gridbox_maps(pred, ref);
    write_metric_maps(dir + "/maps_test", maps);
    CHECK(std::filesystem::exists(dir + "/maps_test.nc"));
    for (const char* s : {"bias", "rmse", "rmse_over_std"})
        CHECK(std::filesystem::exists(dir + "/maps_test_" + std::string(s) + ".png"));

    // PNG header sanity.
    std::ifstream png(dir + "/maps_test_bias.png", std::ios::binary);
    char sig[8];
    png.read(sig, 8);
    CHECK(static_cast<unsigned char>(sig[0]) == 0x89);
    CHECK(sig[1] == 'P');
}

TEST_CASE("case study export writes per-method outputs and skips missing timestamps") {
    const std::string dir = temp_dir("case");
    GridSpec g{45.0, -6.0, -0.5, 0.5, 4, 4};
    std::vector<Field> a, b;
    const TimeStamp t0 = parse_time("2020-01-13T00:00");
    const TimeStamp t1 = parse_time("2020-02-03T00:00");
    for (TimeStamp t : {t0, t1}) {
        Field f(g, t, 280.0);
        a.push_back(f);
        b.push_back(f);
    }
    b.pop_back(); // method b lacks t1

    const auto missing =
        export_case_study({{"bicubic", &a}, {"swin", &b}}, {t0, t1}, dir);
    REQUIRE(missing.size() == 1);
    CHECK(missing[0] == t1);
    CHECK(std::filesystem::exists(dir + "/bicubic_2020-01-13T00-00Z.nc"));
    CHECK(std::filesystem::exists(dir + "/swin_2020-01-13T00-00Z.png"));
    CHECK_FALSE(std::filesystem::exists(dir + "/bicubic_2020-02-03T00-00Z.nc"));

    SUBCASE("empty method list is an error") {
        CHECK_THROWS_AS(export_case_study({}, {t0}, dir), ConfigError);
    }
}
