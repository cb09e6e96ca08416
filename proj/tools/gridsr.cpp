// gridsr: super-resolution downscaling toolkit for gridded temperature.
//
// Subcommands: synth (synthetic paired dataset), train, downscale, evaluate,
// report. Every run is reproducible from the config file plus --seed; CLI
// flags override config values which override defaults.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#if defined(_OPENMP)
#include <omp.h>
#endif

#include "gridsr/checkpoint.hpp"
#include "gridsr/dataset.hpp"
#include "gridsr/metrics.hpp"
#include "gridsr/pipeline.hpp"
#include "gridsr/png.hpp"
#include "gridsr/reports.hpp"
#include "gridsr/synthetic.hpp"
#include "gridsr/tiling.hpp"
#include "gridsr/training.hpp"

using namespace gridsr;

namespace {

std::string cache_dir() {
    const char* env = std::getenv("GRIDSR_CACHE");
    return env && *env ? std::string(env) : std::string(".gridsr");
}

std::pair<int, int> parse_year_range(const std::string& text) {
    int a = 0, b = 0;
    if (std::sscanf(text.c_str(), "%d:%d", &a, &b) != 2)
        throw ConfigError("expected a year range like 1985:2013, got '" + text + "'");
    return {a, b};
}

std::string now_utc() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return std::string(buf);
}

struct CommonOptions {
    std::uint64_t seed = 0;
    int threads = 0;
    bool reproducible = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--seed", opts.seed, "Random seed");
    cmd->add_option("--threads", opts.threads, "OpenMP thread count (0: library default)");
    cmd->add_flag("--reproducible", opts.reproducible,
                  "Suppress wall-clock timestamps in outputs");
}

void apply_threads(const CommonOptions& opts) {
#if defined(_OPENMP)
    if (opts.threads > 0) omp_set_num_threads(opts.threads);
#else
    (void)opts;
#endif
}

//----------------------------------------------------------------------------
// synth
//----------------------------------------------------------------------------

struct SynthArgs {
    CommonOptions common;
    std::string out;
    std::string variable = "temperature";
    int hr_lat = 80, hr_lon = 80;
    int scale = 4;
    std::int64_t timesteps = 2000;
    int step_hours = 12;
    std::string start = "1985-01-01T00:00";
    double lat0 = 47.0, lon0 = -6.0, dcell = 0.05;
    double base_mean = 287.0, seasonal = 8.0, lapse = 0.0065, oro = 1200.0, noise = 0.8;
};

int run_synth(const SynthArgs& a) {
    apply_threads(a.common);
    SyntheticConfig cfg;
    cfg.hr_spec = GridSpec{a.lat0, a.lon0, -a.dcell, a.dcell, a.hr_lat, a.hr_lon};
    cfg.scale_factor = a.scale;
    cfg.n_timesteps = a.timesteps;
    cfg.seed = a.common.seed;
    cfg.start_time = parse_time(a.start);
    cfg.step_hours = a.step_hours;
    cfg.base_mean = a.base_mean;
    cfg.seasonal_amplitude = a.seasonal;
    cfg.lapse_rate = a.lapse;
    cfg.orography_height = a.oro;
    cfg.noise_amplitude = a.noise;

    const SyntheticDataset data = generate_synthetic(cfg);
    TimeSplit split; // recorded at train time; synth just writes the files
    write_synthetic_dataset(a.out, data, a.variable, split);
    std::cout << "wrote " << data.hr.size() << " timesteps to " << a.out << " (HR " << a.hr_lat
              << "x" << a.hr_lon << ", LR " << a.hr_lat / a.scale << "x" << a.hr_lon / a.scale
              << ")\n";
    return 0;
}

//----------------------------------------------------------------------------
// train
//----------------------------------------------------------------------------

struct TrainArgs {
    CommonOptions common;
    std::string data_dir;
    std::string variable = "temperature";
    std::string arch = "swin_full";
    std::string mode; // empty: derived from arch
    std::string preset = "desk";
    std::string norm = "lr_bicubic";
    std::string sampling = "auto";
    std::string out = "model.ckpt";
    std::string history_out;
    std::string resume;
    nn::i64 epochs = 50;
    nn::i64 batch = 16;
    double lr = 1e-4;
    nn::i64 steps_per_epoch = 0;
    nn::i64 patience = 10;
    double min_rel = 0.01;
    nn::i64 val_samples = 64;
    std::string train_years = "1985:2013", val_years = "2014:2018", test_years = "2019:2020";
};

DatasetManifest manifest_for(const std::string& dir, const std::string& variable,
                             const TrainArgs& a) {
    DatasetManifest m;
    m.lr_path = dir + "/lr.nc";
    m.hr_path = dir + "/hr.nc";
    for (const std::string& p : {m.lr_path, m.hr_path})
        if (!std::filesystem::exists(p))
            throw ConfigError("train: missing dataset file " + p);
    m.variable = variable;
    if (std::filesystem::exists(dir + "/covariates_lr.nc")) {
        m.lr_covariates_path = dir + "/covariates_lr.nc";
        m.hr_covariates_path = dir + "/covariates_hr.nc";
    }
    std::tie(m.split.train_start, m.split.train_end) = parse_year_range(a.train_years);
    std::tie(m.split.validation_start, m.split.validation_end) = parse_year_range(a.val_years);
    std::tie(m.split.test_start, m.split.test_end) = parse_year_range(a.test_years);
    m.split.validate();
    return m;
}

int run_train(const TrainArgs& a) {
    apply_threads(a.common);
    const models::Architecture arch = models::architecture_from_name(a.arch);

    pipeline::TilingMode mode;
    if (!a.mode.empty()) {
        mode = pipeline::tiling_mode_from_name(a.mode);
    } else {
        mode = arch == models::Architecture::SwinTile ? pipeline::TilingMode::Tiles
                                                      : pipeline::TilingMode::Full;
    }

    const DatasetManifest manifest = manifest_for(a.data_dir, a.variable, a);
    const PairedDataset data = load_dataset(manifest);
    if (data.size() == 0) throw ConfigError("train: dataset is empty");
    const GridSpec hr = data.hr.front().spec;
    const GridSpec lr = data.lr.front().spec;

    models::ModelConfig mcfg;
    if (a.preset == "reference") {
        mcfg = models::reference_config(arch);
    } else if (a.preset == "desk") {
        mcfg = models::desk_config(arch, hr.n_lat, hr.n_lon,
                                   static_cast<int>(std::lround(std::abs(lr.dlat / hr.dlat))));
    } else {
        throw ConfigError("unknown preset '" + a.preset + "' (desk|reference)");
    }
    if (arch != models::Architecture::SwinTile) {
        mcfg.lr_n_lat = lr.n_lat;
        mcfg.lr_n_lon = lr.n_lon;
        mcfg.hr_n_lat = hr.n_lat;
        mcfg.hr_n_lon = hr.n_lon;
    }
    mcfg.normalization = norm_variant_from_name(a.norm);

    train::TrainConfig tcfg;
    tcfg.batch_size = a.batch;
    tcfg.learning_rate = a.lr;
    tcfg.max_epochs = a.epochs;
    tcfg.steps_per_epoch = a.steps_per_epoch;
    tcfg.patience = a.patience;
    tcfg.min_rel_improvement = a.min_rel;
    tcfg.seed = a.common.seed;
    tcfg.max_val_samples = a.val_samples;
    if (a.sampling == "auto") {
        tcfg.sampling = mode == pipeline::TilingMode::Tiles ? train::SamplingMode::Weighted
                                                            : train::SamplingMode::Uniform;
    } else if (a.sampling == "uniform") {
        tcfg.sampling = train::SamplingMode::Uniform;
    } else if (a.sampling == "weighted") {
        tcfg.sampling = train::SamplingMode::Weighted;
    } else {
        throw ConfigError("unknown sampling '" + a.sampling + "' (auto|uniform|weighted)");
    }

    auto model = models::build_model(mcfg, a.common.seed);
    std::cout << "architecture " << a.arch << " (" << model->parameter_count()
              << " parameters), mode " << pipeline::tiling_mode_name(mode) << ", sampling "
              << (tcfg.sampling == train::SamplingMode::Weighted ? "weighted" : "uniform") << "\n";

    Checkpoint ckpt;
    if (arch == models::Architecture::Bicubic) {
        // Parameter-free baseline: nothing to optimize.
        ckpt = snapshot_model(*model);
        ckpt.tiling_mode = pipeline::tiling_mode_name(mode);
        ckpt.lr_grid = lr;
        ckpt.hr_grid = hr;
        ckpt.split = data.split;
        ckpt.seed = a.common.seed;
        ckpt.data_fingerprint = data.fingerprint();
    } else {
        std::optional<Checkpoint> resume;
        if (!a.resume.empty()) resume = load_checkpoint(a.resume);
        const train::TrainResult result =
            train::train_model(*model, data, tcfg, mode, resume ? &*resume : nullptr);
        ckpt = result.checkpoint;
        if (result.aborted_nan)
            std::cerr << "warning: training aborted on non-finite loss; "
                         "keeping the last good checkpoint\n";
        std::cout << "epochs run: " << result.val_history.size()
                  << (result.stopped_early ? " (early stop)" : "") << ", best validation loss "
                  << (result.val_history.empty()
                          ? 0.0
                          : *std::min_element(result.val_history.begin(), result.val_history.end()))
                  << "\n";
    }
    save_checkpoint(a.out, ckpt);
    std::cout << "checkpoint " << a.out << " (parameter hash " << hex64(ckpt.param_hash())
              << ")\n";

    nlohmann::json manifest_json;
    manifest_json["command"] = "train";
    manifest_json["arch"] = a.arch;
    manifest_json["mode"] = ckpt.tiling_mode;
    manifest_json["seed"] = a.common.seed;
    manifest_json["data_fingerprint"] = hex64(ckpt.data_fingerprint);
    manifest_json["model_config"] = nlohmann::json::parse(ckpt.config.to_json());
    manifest_json["train"] = {{"batch_size", tcfg.batch_size},
                              {"learning_rate", tcfg.learning_rate},
                              {"max_epochs", tcfg.max_epochs},
                              {"steps_per_epoch", tcfg.steps_per_epoch},
                              {"patience", tcfg.patience},
                              {"min_rel_improvement", tcfg.min_rel_improvement},
                              {"sampling",
                               tcfg.sampling == train::SamplingMode::Weighted ? "weighted"
                                                                              : "uniform"},
                              {"max_val_samples", tcfg.max_val_samples}};
    manifest_json["split"] = {a.train_years, a.val_years, a.test_years};
    if (!a.common.reproducible) manifest_json["created"] = now_utc();
    reports::write_text_file(a.out + ".manifest.json", manifest_json.dump(2));

    {
        nlohmann::json h;
        h["train"] = ckpt.train_history;
        h["validation"] = ckpt.val_history;
        const std::string hist_path =
            a.history_out.empty() ? a.out + ".history.json" : a.history_out;
        reports::write_text_file(hist_path, h.dump(2));
    }

    if (ckpt.tiling_mode != "full") {
        // Tile layout debug export, kept under the cache directory.
        std::filesystem::create_directories(cache_dir());
        const TileLayout layout = pipeline::layout_for(ckpt.config, hr, lr);
        const std::vector<TileRegion> tiles =
            ckpt.tiling_mode == "tiles" ? make_tile_grid(layout) : overlapping_patch_grid(layout);
        reports::write_text_file(
            cache_dir() + "/tile_layout_" + hex64(ckpt.data_fingerprint) + ".json",
            tiles_to_json(tiles));
    }
    return 0;
}

//----------------------------------------------------------------------------
// downscale
//----------------------------------------------------------------------------

struct DownscaleArgs {
    CommonOptions common;
    std::string checkpoint;
    std::string data_dir;
    std::string input;
    std::string variable = "temperature";
    std::string split = "all";
    std::string out = "predictions.nc";
    nn::i64 batch = 8;
};

int run_downscale(const DownscaleArgs& a) {
    apply_threads(a.common);
    const Checkpoint ckpt = load_checkpoint(a.checkpoint);
    auto model = model_from_checkpoint(ckpt);

    const std::string lr_path = a.input.empty() ? a.data_dir + "/lr.nc" : a.input;
    if (!std::filesystem::exists(lr_path))
        throw ConfigError("downscale: missing input file " + lr_path);
    std::vector<Field> lr = read_series(lr_path, a.variable);
    if (lr.empty()) throw ConfigError("downscale: no input timesteps in " + lr_path);
    if (!lr.front().spec.same_layout(ckpt.lr_grid))
        throw ConfigError("downscale: input grid does not match the checkpoint's training grid");

    if (a.split != "all") {
        const TimeSplit split = ckpt.split; // recorded at train time
        SplitLabel want;
        if (a.split == "train") want = SplitLabel::Train;
        else if (a.split == "validation") want = SplitLabel::Validation;
        else if (a.split == "test") want = SplitLabel::Test;
        else throw ConfigError("unknown split '" + a.split + "'");
        std::erase_if(lr, [&](const Field& f) {
            return !split.contains(f.time) || split.assign(f.time) != want;
        });
    }

    std::optional<StaticCovariates> cov;
    const pipeline::TilingMode mode = pipeline::tiling_mode_from_name(ckpt.tiling_mode);
    if (mode != pipeline::TilingMode::Full) {
        const std::string dir = a.data_dir.empty()
                                    ? std::filesystem::path(lr_path).parent_path().string()
                                    : a.data_dir;
        StaticCovariates c;
        auto [lo, ls] = read_covariates(dir + "/covariates_lr.nc");
        auto [ho, hs] = read_covariates(dir + "/covariates_hr.nc");
        c.lr_orography = std::move(lo);
        c.lr_landsea = std::move(ls);
        c.hr_orography = std::move(ho);
        c.hr_landsea = std::move(hs);
        cov = std::move(c);
    }

    const std::vector<Field> preds =
        pipeline::predict(*model, lr, ckpt.hr_grid, mode, cov, a.batch);
    write_series(a.out, a.variable, preds,
                 {{"source", "gridsr downscale"},
                  {"checkpoint_fingerprint", hex64(ckpt.param_hash())},
                  {"normalization", norm_variant_name(ckpt.config.normalization)},
                  {"tiling_mode", ckpt.tiling_mode}});
    std::cout << "downscaled " << preds.size() << " timesteps -> " << a.out << "\n";
    return 0;
}

//----------------------------------------------------------------------------
// evaluate / report
//----------------------------------------------------------------------------

struct EvaluateArgs {
    CommonOptions common;
    std::string reference;
    std::vector<std::string> predictions;
    std::vector<std::string> names;
    std::string variable = "temperature";
    std::string out = "evaluation";
    std::vector<std::string> case_study;
    std::string years; // optional year filter "a:b"
};

int run_evaluate(const EvaluateArgs& a) {
    apply_threads(a.common);
    if (!std::filesystem::exists(a.reference))
        throw ConfigError("evaluate: missing reference file " + a.reference);
    if (a.predictions.empty()) throw ConfigError("evaluate: no prediction files given");
    if (!a.names.empty() && a.names.size() != a.predictions.size())
        throw ConfigError("evaluate: --names must match --predictions");

    std::vector<Field> ref = read_series(a.reference, a.variable);
    if (!a.years.empty()) {
        const auto [y0, y1] = parse_year_range(a.years);
        std::erase_if(ref, [&](const Field& f) {
            const int y = year_of(f.time);
            return y < y0 || y > y1;
        });
    }

    std::vector<std::vector<Field>> series(a.predictions.size());
    std::vector<std::string> names = a.names;
    for (std::size_t k = 0; k < a.predictions.size(); ++k) {
        if (!std::filesystem::exists(a.predictions[k]))
            throw ConfigError("evaluate: missing predictions file " + a.predictions[k]);
        series[k] = read_series(a.predictions[k], a.variable);
        if (names.size() <= k)
            names.push_back(std::filesystem::path(a.predictions[k]).stem().string());
    }

    // Restrict the reference to the timestamps every method provides.
    for (auto& s : series) {
        std::erase_if(ref, [&](const Field& f) {
            for (const Field& p : s)
                if (p.time == f.time) return false;
            return true;
        });
    }
    if (ref.empty()) throw ConfigError("evaluate: no common timestamps with the reference");
    for (auto& s : series) {
        std::erase_if(s, [&](const Field& p) {
            for (const Field& f : ref)
                if (p.time == f.time) return false;
            return true;
        });
    }

    std::filesystem::create_directories(a.out);
    reports::ReportMeta meta;
    meta.code_version = kVersion;
    meta.reproducible = a.common.reproducible;
    if (!a.common.reproducible) meta.created = now_utc();
    std::set<std::string> norms;
    for (std::size_t k = 0; k < a.predictions.size(); ++k) {
        std::string fp, norm, mode;
        for (const auto& [key, val] : read_series_attributes(a.predictions[k])) {
            if (key == "checkpoint_fingerprint") fp = val;
            if (key == "normalization") norm = val;
            if (key == "tiling_mode") mode = val;
        }
        if (!fp.empty())
            meta.checkpoint_fingerprints[names[k]] =
                fp + (norm.empty() ? "" : " norm=" + norm) + (mode.empty() ? "" : " mode=" + mode);
        if (!norm.empty()) norms.insert(norm);
    }
    for (const std::string& n : norms) meta.normalization += (meta.normalization.empty() ? "" : ",") + n;

    std::vector<std::pair<std::string, const std::vector<Field>*>> methods;
    for (std::size_t k = 0; k < series.size(); ++k) methods.emplace_back(names[k], &series[k]);

    const metrics::MetricTable table = metrics::seasonal_table(methods, ref);
    reports::write_text_file(a.out + "/table.csv", reports::table_to_csv(table, meta));
    reports::write_text_file(a.out + "/table.json", reports::table_to_json(table, meta));
    std::cout << reports::table_to_csv(table, meta);

    for (std::size_t k = 0; k < series.size(); ++k) {
        const metrics::MetricMaps maps = metrics::gridbox_maps(series[k], ref);
        reports::write_metric_maps(a.out + "/maps_" + names[k], maps);
        if (maps.undefined_count() > 0)
            std::cout << "note: " << maps.undefined_count() << " gridboxes have zero reference "
                      << "variance; rmse_over_std is reported as undefined there\n";
    }

    if (!a.case_study.empty()) {
        std::vector<TimeStamp> stamps;
        for (const std::string& s : a.case_study) stamps.push_back(parse_time(s));
        auto with_ref = methods;
        with_ref.emplace_back("reference", &ref);
        const std::vector<TimeStamp> missing =
            reports::export_case_study(with_ref, stamps, a.out + "/case_studies");
        if (!missing.empty()) {
            std::cerr << "case study timestamps missing from the series:";
            for (TimeStamp t : missing) std::cerr << " " << format_time(t);
            std::cerr << "\n";
            return 1;
        }
    }
    return 0;
}

struct ReportArgs {
    CommonOptions common;
    std::string table;
    std::string out = "evaluation";
};

int run_report(const ReportArgs& a) {
    std::ifstream in(a.table);
    if (!in) throw ConfigError("report: cannot open " + a.table);
    std::stringstream ss;
    ss << in.rdbuf();
    const metrics::MetricTable table = reports::table_from_json(ss.str());
    reports::ReportMeta meta;
    meta.code_version = kVersion;
    meta.reproducible = a.common.reproducible;
    if (!a.common.reproducible) meta.created = now_utc();
    std::filesystem::create_directories(a.out);
    reports::write_text_file(a.out + "/table.csv", reports::table_to_csv(table, meta));
    std::cout << reports::table_to_csv(table, meta);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridsr: super-resolution downscaling of gridded temperature"};
    app.set_config("--config", "", "TOML config file (CLI flags take precedence)");
    app.require_subcommand(1);

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic paired dataset");
    add_common(synth, synth_args.common);
    synth->add_option("--out", synth_args.out, "Output directory")->required();
    synth->add_option("--variable", synth_args.variable, "Variable name");
    synth->add_option("--hr-lat", synth_args.hr_lat, "HR grid rows");
    synth->add_option("--hr-lon", synth_args.hr_lon, "HR grid columns");
    synth->add_option("--scale", synth_args.scale, "LR block-mean factor");
    synth->add_option("--timesteps", synth_args.timesteps, "Number of timesteps");
    synth->add_option("--step-hours", synth_args.step_hours, "Step in hours (multiple of 3)");
    synth->add_option("--start", synth_args.start, "First timestamp (ISO)");
    synth->add_option("--lat0", synth_args.lat0, "North edge latitude");
    synth->add_option("--lon0", synth_args.lon0, "West edge longitude");
    synth->add_option("--cell", synth_args.dcell, "HR cell size in degrees");
    synth->add_option("--base-mean", synth_args.base_mean, "Mean temperature (K)");
    synth->add_option("--seasonal-amplitude", synth_args.seasonal, "Annual cycle amplitude (K)");
    synth->add_option("--lapse-rate", synth_args.lapse, "Lapse rate (K/m)");
    synth->add_option("--oro-height", synth_args.oro, "Orography height scale (m)");
    synth->add_option("--noise", synth_args.noise, "Coherent noise amplitude (K)");

    TrainArgs train_args;
    CLI::App* train_cmd = app.add_subcommand("train", "Train a downscaling model");
    add_common(train_cmd, train_args.common);
    train_cmd->add_option("--data", train_args.data_dir, "Dataset directory")->required();
    train_cmd->add_option("--variable", train_args.variable, "Variable name");
    train_cmd->add_option("--arch", train_args.arch,
                          "bicubic|unet|deepesd|swin_full|swin_tile");
    train_cmd->add_option("--mode", train_args.mode, "full|tiles|patches (default per arch)");
    train_cmd->add_option("--preset", train_args.preset, "desk|reference");
    train_cmd->add_option("--norm", train_args.norm, "lr_bicubic|lr_raw");
    train_cmd->add_option("--sampling", train_args.sampling, "auto|uniform|weighted");
    train_cmd->add_option("--epochs", train_args.epochs, "Max epochs");
    train_cmd->add_option("--batch", train_args.batch, "Batch size");
    train_cmd->add_option("--lr", train_args.lr, "Learning rate");
    train_cmd->add_option("--steps-per-epoch", train_args.steps_per_epoch,
                          "Optimizer steps per epoch (0: one pass)");
    train_cmd->add_option("--patience", train_args.patience, "Early-stop patience");
    train_cmd->add_option("--min-rel", train_args.min_rel, "Early-stop min relative improvement");
    train_cmd->add_option("--val-samples", train_args.val_samples, "Validation subset cap");
    train_cmd->add_option("--train-years", train_args.train_years, "Training year range a:b");
    train_cmd->add_option("--val-years", train_args.val_years, "Validation year range a:b");
    train_cmd->add_option("--test-years", train_args.test_years, "Test year range a:b");
    train_cmd->add_option("--out", train_args.out, "Checkpoint output path");
    train_cmd->add_option("--history", train_args.history_out,
                          "History JSON output path (default: <out>.history.json)");
    train_cmd->add_option("--resume", train_args.resume, "Resume from checkpoint");

    DownscaleArgs down_args;
    CLI::App* down = app.add_subcommand("downscale", "Downscale an LR series with a checkpoint");
    add_common(down, down_args.common);
    down->add_option("--checkpoint", down_args.checkpoint, "Checkpoint path")->required();
    down->add_option("--data", down_args.data_dir, "Dataset directory (lr.nc + covariates)");
    down->add_option("--input", down_args.input, "Explicit LR series file");
    down->add_option("--variable", down_args.variable, "Variable name");
    down->add_option("--split", down_args.split, "all|train|validation|test");
    down->add_option("--out", down_args.out, "Prediction series output path");
    down->add_option("--batch", down_args.batch, "Inference batch size");

    EvaluateArgs eval_args;
    CLI::App* eval_cmd = app.add_subcommand("evaluate", "Compare predictions to a reference");
    add_common(eval_cmd, eval_args.common);
    eval_cmd->add_option("--reference", eval_args.reference, "Reference HR series")->required();
    eval_cmd->add_option("--predictions", eval_args.predictions, "Prediction series files")
        ->required()
        ->delimiter(',');
    eval_cmd->add_option("--names", eval_args.names, "Method names")->delimiter(',');
    eval_cmd->add_option("--variable", eval_args.variable, "Variable name");
    eval_cmd->add_option("--out", eval_args.out, "Report output directory");
    eval_cmd->add_option("--case-study", eval_args.case_study, "Case-study timestamps")
        ->delimiter(',');
    eval_cmd->add_option("--years", eval_args.years, "Restrict to a year range a:b");

    ReportArgs report_args;
    CLI::App* report_cmd = app.add_subcommand("report", "Re-render a metric table from JSON");
    add_common(report_cmd, report_args.common);
    report_cmd->add_option("--table", report_args.table, "table.json path")->required();
    report_cmd->add_option("--out", report_args.out, "Output directory");

    try {
        app.parse(argc, argv);
        if (synth->parsed()) return run_synth(synth_args);
        if (train_cmd->parsed()) return run_train(train_args);
        if (down->parsed()) return run_downscale(down_args);
        if (eval_cmd->parsed()) return run_evaluate(eval_args);
        if (report_cmd->parsed()) return run_report(report_args);
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
