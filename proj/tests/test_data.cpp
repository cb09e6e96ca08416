#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gridsr/bicubic.hpp"
#include "gridsr/dataset.hpp"
#include "gridsr/netcdf.hpp"
#include "gridsr/sampling.hpp"
#include "gridsr/synthetic.hpp"

using namespace gridsr;

namespace {

SyntheticConfig small_config() {
    SyntheticConfig cfg;
    cfg.hr_spec = GridSpec{45.0, -6.0, -0.05, 0.05, 40, 48};
    cfg.scale_factor = 4;
    cfg.n_timesteps = 12;
    cfg.seed = 99;
    return cfg;
}

std::string temp_dir(const char* tag) {
    const auto dir = std::filesystem::temp_directory_path() / (std::string("gridsr_") + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

} // namespace

TEST_CASE("synthetic LR is the exact block mean of HR") {
    const SyntheticDataset data = generate_synthetic(small_config());
    REQUIRE(data.hr.size() == 12);
    REQUIRE(data.lr.size() == 12);
    const int s = 4;
    for (std::size_t t = 0; t < data.hr.size(); t += 5) {
        const Field& hr = data.hr[t];
        const Field& lr = data.lr[t];
        for (int i = 0; i < lr.spec.n_lat; ++i)
            for (int j = 0; j < lr.spec.n_lon; ++j) {
                double acc = 0.0;
                for (int a = 0; a < s; ++a)
                    for (int b = 0; b < s; ++b) acc += hr.at(i * s + a, j * s + b);
                CHECK(lr.at(i, j) == acc / (s * s)); // bitwise: same summation order
            }
    }
    // Covariates obey the same consistency.
    const Field lr_oro = block_mean(data.covariates.hr_orography, s);
    CHECK(lr_oro.values == data.covariates.lr_orography.values);
}

TEST_CASE("synthetic generation is deterministic given the seed") {
    const SyntheticDataset a = generate_synthetic(small_config());
    const SyntheticDataset b = generate_synthetic(small_config());
    CHECK(a.hr.front().values == b.hr.front().values);
    CHECK(a.hr.back().values == b.hr.back().values);
    CHECK(a.covariates.hr_orography.values == b.covariates.hr_orography.values);

    SyntheticConfig other = small_config();
    other.seed = 100;
    const SyntheticDataset c = generate_synthetic(other);
    CHECK(a.hr.front().values != c.hr.front().values);
}

TEST_CASE("flat orography and zero noise give spatially constant fields") {
    SyntheticConfig cfg = small_config();
    cfg.orography_height = 0.0;
    cfg.noise_amplitude = 0.0;
    const SyntheticDataset data = generate_synthetic(cfg);
    for (const Field& f : {data.hr.front(), data.hr.back()}) {
        const double v0 = f.values.front();
        for (double v : f.values) CHECK(v == doctest::Approx(v0).epsilon(1e-15));
    }
}

TEST_CASE("non-divisible dims are a config error") {
    SyntheticConfig cfg = small_config();
    cfg.hr_spec.n_lat = 41;
    CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
}

TEST_CASE("scale-factor arithmetic: 200x320 at factor 5 gives 40x64") {
    GridSpec hr{47.0, -10.0, -0.05, 0.05, 200, 320};
    const GridSpec lr = block_mean_spec(hr, 5);
    CHECK(lr.n_lat == 40);
    CHECK(lr.n_lon == 64);
}

TEST_CASE("netcdf series round-trips exactly") {
    const std::string dir = temp_dir("nc");
    const SyntheticDataset data = generate_synthetic(small_config());
    write_series(dir + "/hr.nc", "temperature", data.hr);
    const std::vector<Field> back = read_series(dir + "/hr.nc", "temperature");
    REQUIRE(back.size() == data.hr.size());
    for (std::size_t t = 0; t < back.size(); ++t) {
        CHECK(back[t].time == data.hr[t].time);
        CHECK(back[t].values == data.hr[t].values);
        CHECK(back[t].spec.same_layout(data.hr[t].spec));
    }
}

TEST_CASE("synthetic writer twice produces byte-identical files") {
    const std::string d1 = temp_dir("det1");
    const std::string d2 = temp_dir("det2");
    const SyntheticDataset data = generate_synthetic(small_config());
    TimeSplit split;
    write_synthetic_dataset(d1, data, "temperature", split);
    write_synthetic_dataset(d2, data, "temperature", split);
    for (const char* f : {"lr.nc", "hr.nc", "covariates_lr.nc", "covariates_hr.nc"}) {
        std::ifstream a(d1 + "/" + f, std::ios::binary), b(d2 + "/" + f, std::ios::binary);
        std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
        std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
        CHECK(sa == sb);
        CHECK_FALSE(sa.empty());
    }
}

TEST_CASE("load_dataset pairs series and reports one-sided gaps") {
    const std::string dir = temp_dir("pair");
    const SyntheticDataset data = generate_synthetic(small_config());
    TimeSplit split;
    split.train_start = split.train_end = 1985;
    split.validation_start = split.validation_end = 1986;
    split.test_start = split.test_end = 1987;
    DatasetManifest manifest = write_synthetic_dataset(dir, data, "temperature", split);

    SUBCASE("aligned series load in chronological order") {
        const PairedDataset ds = load_dataset(manifest);
        REQUIRE(ds.size() == data.hr.size());
        for (std::size_t t = 1; t < ds.size(); ++t) CHECK(ds.lr[t].time > ds.lr[t - 1].time);
        CHECK(ds.covariates.has_value());
    }

    SUBCASE("an LR-only timestamp inside the overlap is an alignment error") {
        std::vector<Field> hr_gapped = data.hr;
        hr_gapped.erase(hr_gapped.begin() + 5);
        write_series(manifest.hr_path, "temperature", hr_gapped);
        CHECK_THROWS_AS(load_dataset(manifest), AlignmentError);
    }

    SUBCASE("empty intersection of time ranges yields an empty stream") {
        std::vector<Field> hr_late = data.hr;
        for (Field& f : hr_late) f.time += 365LL * 86400;
        write_series(manifest.hr_path, "temperature", hr_late);
        const PairedDataset ds = load_dataset(manifest);
        CHECK(ds.size() == 0);
    }

    SUBCASE("NaN cells name the first offending location") {
        std::vector<Field> hr_nan = data.hr;
        hr_nan[2].values[7] = std::nan("");
        write_series(manifest.hr_path, "temperature", hr_nan);
        CHECK_THROWS_AS(load_dataset(manifest), IngestError);
        try {
            load_dataset(manifest);
        } catch (const IngestError& e) {
            CHECK(std::string(e.what()).find(format_time(data.hr[2].time)) != std::string::npos);
        }
    }
}

TEST_CASE("bicubic upsampling maps the reference grids by coordinates") {
    // The coarse grid covers a wider area than the fine one; sampling the
    // fine cell centers is the interpolate-then-crop path.
    GridSpec lr{47.0, -8.0, -0.25, 0.25, 57, 81};
    GridSpec hr{45.0, -6.0, -0.05, 0.05, 200, 320};

    SUBCASE("constant fields reproduce exactly at the full target shape") {
        Field src(lr, 0, 281.25);
        const Field up = bicubic_upsample(src, hr);
        CHECK(up.spec.n_lat == 200);
        CHECK(up.spec.n_lon == 320);
        for (double v : up.values) CHECK(v == doctest::Approx(281.25).epsilon(1e-14));
    }

    SUBCASE("linear lat/lon ramps reproduce exactly") {
        Field src(lr, 0);
        for (int i = 0; i < lr.n_lat; ++i)
            for (int j = 0; j < lr.n_lon; ++j) src.at(i, j) = 2.0 * lr.lat_of(i) - 3.0 * lr.lon_of(j);
        const Field up = bicubic_upsample(src, hr);
        for (int i = 0; i < hr.n_lat; i += 17)
            for (int j = 0; j < hr.n_lon; j += 23) {
                const double expect = 2.0 * hr.lat_of(i) - 3.0 * hr.lon_of(j);
                CHECK(std::abs(up.at(i, j) - expect) < 1e-9);
            }
    }

    SUBCASE("coarser or out-of-extent targets are config errors") {
        Field src(hr, 0, 1.0);
        CHECK_THROWS_AS(bicubic_upsample(src, lr), ConfigError); // coarser
        GridSpec outside = hr;
        outside.lon_start = 20.0;
        Field small(lr, 0, 1.0);
        CHECK_THROWS_AS(bicubic_upsample(small, outside), ConfigError);
    }
}

TEST_CASE("netcdf reader applies CF packing attributes") {
    const std::string dir = temp_dir("pack");
    netcdf::NcFile f;
    f.add_dim("x", 3);
    netcdf::Variable v;
    v.name = "data";
    v.dims = {"x"};
    v.atts.push_back(netcdf::Attribute::num("scale_factor", {0.5}));
    v.atts.push_back(netcdf::Attribute::num("add_offset", {10.0}));
    v.data = {2.0, 4.0, 6.0};
    f.vars.push_back(v);
    netcdf::write_file(dir + "/p.nc", f);
    const netcdf::NcFile back = netcdf::read_file(dir + "/p.nc");
    CHECK(back.find_var("data")->data == std::vector<double>{11.0, 12.0, 13.0});
}

//----------------------------------------------------------------------------
// Patch weighting
//----------------------------------------------------------------------------

TEST_CASE("equal per-patch variability gives exactly uniform weights") {
    for (double s : {0.0, 0.3, 2.0}) {
        const SampleWeighting w = compute_patch_weights({{s}, {s}, {s}});
        for (double r : w.raw) CHECK(r == doctest::Approx(1.0).epsilon(1e-15));
        for (double wi : w.weights) CHECK(wi == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
    // Two covariables, both 0.5: row sums 1.0, mean 1.0, raw 1.0 each.
    const SampleWeighting w2 = compute_patch_weights({{0.5, 0.5}, {0.5, 0.5}});
    CHECK(w2.raw[0] == doctest::Approx(1.0));
    CHECK(w2.weights[0] == doctest::Approx(0.5));
    CHECK(w2.weights[1] == doctest::Approx(0.5));
}

TEST_CASE("sigma [1,3] drives the first weight to the floor") {
    // Hand evaluation: mean total variability 2, raw_i = sigma_i + (1 - 2).
    const SampleWeighting w = compute_patch_weights({{1.0}, {3.0}});
    CHECK(w.raw[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(w.raw[1] == doctest::Approx(2.0).epsilon(1e-15));
    const double expect0 = kWeightFloor / (2.0 + kWeightFloor);
    CHECK(w.weights[0] == doctest::Approx(expect0).epsilon(1e-9));
    CHECK(w.weights[1] == doctest::Approx(1.0 - expect0).epsilon(1e-9));
}

TEST_CASE("weights always form a probability distribution") {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t N = 1 + rng.next_below(12);
        const std::size_t n = 1 + rng.next_below(4);
        std::vector<std::vector<double>> sigma(N, std::vector<double>(n));
        for (auto& row : sigma)
            for (double& v : row) v = 3.0 * rng.next_double();
        const SampleWeighting w = compute_patch_weights(sigma);
        double total = 0.0;
        for (double wi : w.weights) {
            CHECK(wi >= 0.0);
            total += wi;
        }
        CHECK(std::abs(total - 1.0) < 1e-12);
    }
    CHECK_THROWS_AS(compute_patch_weights({{-0.1}}), DomainError);
}

TEST_CASE("adding a constant to every sigma leaves raw weights unchanged") {
    Rng rng(77);
    std::vector<std::vector<double>> sigma(6, std::vector<double>(2));
    for (auto& row : sigma)
        for (double& v : row) v = rng.next_double();
    const SampleWeighting base = compute_patch_weights(sigma);
    for (auto& row : sigma)
        for (double& v : row) v += 0.37;
    const SampleWeighting shifted = compute_patch_weights(sigma);
    for (std::size_t i = 0; i < base.raw.size(); ++i)
        CHECK(shifted.raw[i] == doctest::Approx(base.raw[i]).epsilon(1e-12));
}

TEST_CASE("weighted sample stream: point mass, determinism, frequencies") {
    std::vector<TimeStamp> times;
    for (int k = 0; k < 10; ++k) times.push_back(k * kTimeStepSeconds);

    SUBCASE("degenerate weights always draw patch zero") {
        SampleWeighting w;
        w.weights = {1.0, 0.0, 0.0};
        w.raw = w.weights;
        w.sigma = {{1.0}, {0.0}, {0.0}};
        WeightedSampleStream stream(w, times, 5);
        for (int k = 0; k < 200; ++k) CHECK(stream.next().second == 0);
    }

    SUBCASE("fixed seed reproduces the draw sequence") {
        const SampleWeighting w = compute_patch_weights({{0.3}, {0.9}, {0.1}, {0.5}});
        WeightedSampleStream s1(w, times, 123), s2(w, times, 123);
        for (int k = 0; k < 500; ++k) {
            const auto a = s1.next();
            const auto b = s2.next();
            CHECK(a.first == b.first);
            CHECK(a.second == b.second);
        }
    }

    SUBCASE("empirical frequencies match the weights within 1% absolute") {
        const SampleWeighting w = compute_patch_weights({{0.2}, {0.2}, {0.2}, {0.2}, {0.2}});
        WeightedSampleStream stream(w, times, 31337);
        std::vector<int> counts(5, 0);
        const int draws = 100000;
        for (int k = 0; k < draws; ++k) ++counts[stream.next().second];
        for (int p = 0; p < 5; ++p)
            CHECK(std::abs(counts[p] / double(draws) - w.weights[p]) < 0.01);
    }

    SUBCASE("timestamps are cycled: each appears once per cycle") {
        const SampleWeighting w = compute_patch_weights({{0.5}, {0.7}});
        WeightedSampleStream stream(w, times, 9);
        std::vector<int> seen(10, 0);
        for (int k = 0; k < 10; ++k) ++seen[stream.next().first / kTimeStepSeconds];
        for (int c : seen) CHECK(c == 1);
    }
}
