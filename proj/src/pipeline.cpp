#include "gridsr/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace gridsr::pipeline {

using models::Architecture;
using models::BatchInputs;
using models::ModelConfig;
using nn::i64;
using nn::Tensor;

const char* tiling_mode_name(TilingMode m) {
    switch (m) {
        case TilingMode::Full: return "full";
        case TilingMode::Tiles: return "tiles";
        case TilingMode::Patches: return "patches";
    }
    return "?";
}

TilingMode tiling_mode_from_name(const std::string& name) {
    if (name == "full") return TilingMode::Full;
    if (name == "tiles") return TilingMode::Tiles;
    if (name == "patches") return TilingMode::Patches;
    throw ConfigError("unknown tiling mode '" + name + "'");
}

namespace {

Field standardize_field(const Field& f) {
    Field out = f;
    double s = 0.0;
    for (double v : f.values) s += v;
    const double mu = s / static_cast<double>(f.values.size());
    double ss = 0.0;
    for (double v : f.values) ss += (v - mu) * (v - mu);
    const double sd = std::sqrt(ss / static_cast<double>(f.values.size()));
    const double inv = sd > 0.0 ? 1.0 / sd : 0.0;
    for (double& v : out.values) v = (v - mu) * inv;
    return out;
}

InstanceStats stats_of_values(const std::vector<double>& v, NormVariant variant) {
    double s = 0.0;
    for (double x : v) s += x;
    const double mu = s / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mu) * (x - mu);
    InstanceStats out;
    out.mu = mu;
    out.sigma = std::sqrt(ss / static_cast<double>(v.size()));
    out.variant = variant;
    return out;
}

std::vector<double> window_values(const Field& f, int row0, int col0, int size) {
    std::vector<double> out(static_cast<std::size_t>(size) * size);
    for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j)
            out[static_cast<std::size_t>(i) * size + j] = f.at(row0 + i, col0 + j);
    return out;
}

} // namespace

PreparedCovariates PreparedCovariates::standardize(const StaticCovariates& raw) {
    raw.validate();
    PreparedCovariates out;
    out.lr_orography = standardize_field(raw.lr_orography);
    out.lr_landsea = standardize_field(raw.lr_landsea);
    out.hr_orography = standardize_field(raw.hr_orography);
    out.hr_landsea = standardize_field(raw.hr_landsea);
    return out;
}

FullSample make_full_sample(Architecture arch, const Field& lr, const Field* hr,
                            const GridSpec& hr_spec, NormVariant variant) {
    FullSample s;
    s.time = lr.time;
    const Field up = bicubic_upsample(lr, hr_spec);
    s.baseline = up.values;
    s.stats = variant == NormVariant::LrRaw ? stats_of_values(lr.values, variant)
                                            : stats_of_values(up.values, variant);
    const double inv_sigma = 1.0 / std::max(s.stats.sigma, kSigmaFloor);
    if (arch == Architecture::UNet || arch == Architecture::DeepESD) {
        s.model_input = up.values;
    } else {
        s.model_input = lr.values;
    }
    for (double& v : s.model_input) v = (v - s.stats.mu) * inv_sigma;
    if (hr) {
        if (hr->values.size() != s.baseline.size())
            throw ShapeError("make_full_sample: HR field does not match the target grid");
        s.target_residual.resize(s.baseline.size());
        for (std::size_t i = 0; i < s.baseline.size(); ++i)
            s.target_residual[i] = (hr->values[i] - s.baseline[i]) * inv_sigma;
    }
    return s;
}

TileSample make_tile_sample(const Field& lr, const Field* hr, const Field& bicubic_full,
                            const PreparedCovariates& cov, const TileRegion& tile,
                            NormVariant variant) {
    TileSample s;
    s.tile = tile;
    s.time = lr.time;
    s.baseline = window_values(bicubic_full, tile.hr_row0, tile.hr_col0, tile.hr_size);
    const std::vector<double> lr_win = window_values(lr, tile.lr_row0, tile.lr_col0, tile.lr_size);
    s.stats = variant == NormVariant::LrRaw ? stats_of_values(lr_win, variant)
                                            : stats_of_values(s.baseline, variant);
    const double inv_sigma = 1.0 / std::max(s.stats.sigma, kSigmaFloor);
    s.model_input = lr_win;
    for (double& v : s.model_input) v = (v - s.stats.mu) * inv_sigma;

    const std::vector<double> lo =
        window_values(cov.lr_orography, tile.lr_row0, tile.lr_col0, tile.lr_size);
    const std::vector<double> ls =
        window_values(cov.lr_landsea, tile.lr_row0, tile.lr_col0, tile.lr_size);
    s.lr_cov = lo;
    s.lr_cov.insert(s.lr_cov.end(), ls.begin(), ls.end());
    const std::vector<double> ho =
        window_values(cov.hr_orography, tile.cov_row0, tile.cov_col0, tile.cov_size);
    const std::vector<double> hs =
        window_values(cov.hr_landsea, tile.cov_row0, tile.cov_col0, tile.cov_size);
    s.hr_cov = ho;
    s.hr_cov.insert(s.hr_cov.end(), hs.begin(), hs.end());

    if (hr) {
        const std::vector<double> hr_win =
            window_values(*hr, tile.hr_row0, tile.hr_col0, tile.hr_size);
        s.target_residual.resize(hr_win.size());
        for (std::size_t i = 0; i < hr_win.size(); ++i)
            s.target_residual[i] = (hr_win[i] - s.baseline[i]) * inv_sigma;
    }
    return s;
}

namespace {

Tensor pack_batch(const std::vector<const std::vector<double>*>& rows, nn::Shape per_sample) {
    nn::Shape shape;
    shape.push_back(static_cast<i64>(rows.size()));
    for (i64 d : per_sample) shape.push_back(d);
    std::vector<double> data;
    data.reserve(rows.size() * nn::numel_of(per_sample));
    for (const auto* r : rows) {
        if (static_cast<i64>(r->size()) != nn::numel_of(per_sample))
            throw ShapeError("pack_batch: sample size mismatch");
        data.insert(data.end(), r->begin(), r->end());
    }
    return Tensor::from_data(std::move(shape), std::move(data));
}

Tensor pack_stats(const std::vector<InstanceStats>& stats) {
    std::vector<double> data;
    data.reserve(stats.size() * 2);
    for (const InstanceStats& s : stats) {
        data.push_back(s.mu);
        data.push_back(s.sigma);
    }
    return Tensor::from_data({static_cast<i64>(stats.size()), 2}, std::move(data));
}

} // namespace

BatchInputs batch_full(const std::vector<const FullSample*>& samples, const ModelConfig& config) {
    if (samples.empty()) throw ShapeError("batch_full: empty batch");
    BatchInputs in;
    std::vector<const std::vector<double>*> rows;
    std::vector<InstanceStats> stats;
    for (const FullSample* s : samples) {
        rows.push_back(&s->model_input);
        stats.push_back(s->stats);
    }
    const bool hr_input =
        config.arch == Architecture::UNet || config.arch == Architecture::DeepESD;
    in.input = pack_batch(rows, {1, hr_input ? config.hr_n_lat : config.lr_n_lat,
                                 hr_input ? config.hr_n_lon : config.lr_n_lon});
    in.stats = pack_stats(stats);
    return in;
}

BatchInputs batch_tiles(const std::vector<const TileSample*>& samples, const ModelConfig& config) {
    if (samples.empty()) throw ShapeError("batch_tiles: empty batch");
    BatchInputs in;
    std::vector<const std::vector<double>*> rows, lr_cov, hr_cov;
    std::vector<InstanceStats> stats;
    for (const TileSample* s : samples) {
        rows.push_back(&s->model_input);
        lr_cov.push_back(&s->lr_cov);
        hr_cov.push_back(&s->hr_cov);
        stats.push_back(s->stats);
    }
    in.input = pack_batch(rows, {1, config.lr_window, config.lr_window});
    in.stats = pack_stats(stats);
    in.lr_covariates = pack_batch(lr_cov, {2, config.lr_window, config.lr_window});
    in.hr_covariates = pack_batch(hr_cov, {2, config.cov_window, config.cov_window});
    return in;
}

nn::Tensor batch_targets_full(const std::vector<const FullSample*>& samples, int hr_n_lat,
                              int hr_n_lon) {
    std::vector<const std::vector<double>*> rows;
    for (const FullSample* s : samples) rows.push_back(&s->target_residual);
    return pack_batch(rows, {1, hr_n_lat, hr_n_lon});
}

nn::Tensor batch_targets_tile(const std::vector<const TileSample*>& samples, int tile_size) {
    std::vector<const std::vector<double>*> rows;
    for (const TileSample* s : samples) rows.push_back(&s->target_residual);
    return pack_batch(rows, {1, tile_size, tile_size});
}

TileLayout layout_for(const ModelConfig& config, const GridSpec& hr_spec, const GridSpec& lr_spec) {
    TileLayout layout;
    layout.hr_spec = hr_spec;
    layout.lr_spec = lr_spec;
    layout.tile_size = config.tile_size;
    layout.lr_size = config.lr_window;
    layout.cov_size = config.cov_window;
    layout.validate();
    return layout;
}

std::vector<Field> predict(models::Model& model, const std::vector<Field>& lr_series,
                           const GridSpec& hr_spec, TilingMode mode,
                           const std::optional<StaticCovariates>& covariates, i64 batch_size) {
    tune_allocator();
    nn::NoGradGuard no_grad;
    const ModelConfig& cfg = model.config();
    std::vector<Field> out;
    out.reserve(lr_series.size());

    if (mode == TilingMode::Full) {
        if (cfg.arch == Architecture::SwinTile)
            throw ConfigError("predict: swin_tile requires tiles or patches mode");
        std::vector<FullSample> samples;
        samples.reserve(lr_series.size());
        for (const Field& lr : lr_series)
            samples.push_back(make_full_sample(cfg.arch, lr, nullptr, hr_spec, cfg.normalization));
        for (std::size_t b0 = 0; b0 < samples.size(); b0 += batch_size) {
            const std::size_t b1 = std::min(samples.size(), b0 + batch_size);
            std::vector<const FullSample*> batch;
            for (std::size_t k = b0; k < b1; ++k) batch.push_back(&samples[k]);
            Tensor residual = model.forward(batch_full(batch, cfg), /*training=*/false);
            const i64 per = residual.numel() / static_cast<i64>(batch.size());
            for (std::size_t k = 0; k < batch.size(); ++k) {
                const FullSample& s = *batch[k];
                Field f(hr_spec, s.time);
                const double sigma = std::max(s.stats.sigma, kSigmaFloor);
                const double* r = residual.data() + static_cast<i64>(k) * per;
                for (std::size_t c = 0; c < f.values.size(); ++c)
                    f.values[c] = s.baseline[c] + sigma * r[c];
                out.push_back(std::move(f));
            }
        }
        return out;
    }

    if (cfg.arch != Architecture::SwinTile && cfg.arch != Architecture::Bicubic)
        throw ConfigError("predict: tiles/patches modes require the tile architecture");
    if (!covariates) throw ConfigError("predict: tile modes need static covariates");
    const PreparedCovariates cov = PreparedCovariates::standardize(*covariates);

    std::vector<Field> lr_checked = lr_series;
    if (lr_checked.empty()) return out;
    const TileLayout layout = layout_for(cfg, hr_spec, lr_checked.front().spec);
    const std::vector<TileRegion> tiles =
        mode == TilingMode::Tiles ? make_tile_grid(layout) : overlapping_patch_grid(layout);
    const StitchMode stitch_mode =
        mode == TilingMode::Tiles ? StitchMode::Disjoint : StitchMode::Blend;

    for (const Field& lr : lr_checked) {
        const Field up = bicubic_upsample(lr, hr_spec);
        std::vector<TileSample> samples;
        samples.reserve(tiles.size());
        for (const TileRegion& t : tiles)
            samples.push_back(make_tile_sample(lr, nullptr, up, cov, t, cfg.normalization));
        std::vector<std::pair<TileRegion, std::vector<double>>> preds;
        preds.reserve(tiles.size());
        for (std::size_t b0 = 0; b0 < samples.size(); b0 += batch_size) {
            const std::size_t b1 = std::min(samples.size(), b0 + batch_size);
            std::vector<const TileSample*> batch;
            for (std::size_t k = b0; k < b1; ++k) batch.push_back(&samples[k]);
            Tensor residual;
            if (cfg.arch == Architecture::Bicubic) {
                residual = Tensor::zeros({static_cast<i64>(batch.size()), 1, cfg.tile_size,
                                          cfg.tile_size});
            } else {
                residual = model.forward(batch_tiles(batch, cfg), /*training=*/false);
            }
            const i64 per = residual.numel() / static_cast<i64>(batch.size());
            for (std::size_t k = 0; k < batch.size(); ++k) {
                const TileSample& s = *batch[k];
                const double sigma = std::max(s.stats.sigma, kSigmaFloor);
                std::vector<double> patch(s.baseline.size());
                const double* r = residual.data() + static_cast<i64>(k) * per;
                for (std::size_t c = 0; c < patch.size(); ++c)
                    patch[c] = s.baseline[c] + sigma * r[c];
                preds.emplace_back(s.tile, std::move(patch));
            }
        }
        out.push_back(stitch(preds, hr_spec, stitch_mode, lr.time));
    }
    return out;
}

} // namespace gridsr::pipeline
