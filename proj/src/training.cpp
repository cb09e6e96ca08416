#include "gridsr/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "gridsr/kernels.hpp"

namespace gridsr::train {

using models::Architecture;
using models::Model;
using nn::i64;
using nn::Tensor;
using pipeline::FullSample;
using pipeline::TileSample;
using pipeline::TilingMode;

double charbonnier(std::span<const double> pred, std::span<const double> target, double epsilon) {
    if (pred.size() != target.size())
        throw ShapeError("charbonnier: size mismatch");
    if (pred.empty()) throw ShapeError("charbonnier: empty input");
    std::vector<double> terms(pred.size());
    const double e2 = epsilon * epsilon;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        terms[i] = std::sqrt(d * d + e2);
    }
    return kernels::sum(terms.data(), static_cast<i64>(terms.size())) /
           static_cast<double>(terms.size());
}

bool early_stop(const std::vector<double>& val_history, i64 patience, double min_rel) {
    if (val_history.empty()) throw ConfigError("early_stop: empty history");
    double best = val_history[0];
    i64 last_qualifying = 0;
    for (std::size_t i = 1; i < val_history.size(); ++i) {
        if (val_history[i] <= best * (1.0 - min_rel)) last_qualifying = static_cast<i64>(i);
        best = std::min(best, val_history[i]);
    }
    return static_cast<i64>(val_history.size()) - 1 - last_qualifying >= patience;
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
    if (patience < 1) throw ConfigError("TrainConfig: patience must be >= 1");
    if (!(min_rel_improvement > 0.0 && min_rel_improvement < 1.0))
        throw ConfigError("TrainConfig: min_rel_improvement must lie in (0, 1)");
    if (max_epochs < 1) throw ConfigError("TrainConfig: max_epochs must be >= 1");
    if (charbonnier.epsilon <= 0.0) throw ConfigError("TrainConfig: epsilon must be positive");
}

void Adam::step(nn::ParamStore& params) {
    std::size_t trainable = 0;
    for (const auto& e : params.entries())
        if (e.trainable) ++trainable;
    if (m_.size() != trainable) {
        m_.clear();
        v_.clear();
        for (const auto& e : params.entries())
            if (e.trainable) {
                m_.emplace_back(e.tensor.numel(), 0.0);
                v_.emplace_back(e.tensor.numel(), 0.0);
            }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    std::size_t slot = 0;
    for (auto& e : params.entries()) {
        if (!e.trainable) continue;
        auto& m = m_[slot];
        auto& v = v_[slot];
        ++slot;
        double* w = e.tensor.data();
        const auto& g = e.tensor.grad();
        if (g.empty()) continue; // parameter unused in this graph
        const i64 n = e.tensor.numel();
#pragma omp parallel for schedule(static)
        for (i64 i = 0; i < n; ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            w[i] -= learning_rate * mhat / (std::sqrt(vhat) + epsilon);
        }
    }
}

namespace {

std::vector<std::size_t> strided_subset(const std::vector<std::size_t>& idx, i64 max_count) {
    if (max_count <= 0 || static_cast<i64>(idx.size()) <= max_count) return idx;
    std::vector<std::size_t> out;
    const double step = static_cast<double>(idx.size()) / static_cast<double>(max_count);
    for (i64 k = 0; k < max_count; ++k)
        out.push_back(idx[static_cast<std::size_t>(k * step)]);
    return out;
}

// Shuffled-cycle index stream (uniform sampling over the training set).
class IndexStream {
public:
    IndexStream(std::size_t n, Rng rng) : rng_(rng), order_(n) {
        for (std::size_t i = 0; i < n; ++i) order_[i] = i;
        reshuffle();
    }
    std::size_t next() {
        if (cursor_ >= order_.size()) reshuffle();
        return order_[cursor_++];
    }

private:
    void reshuffle() {
        for (std::size_t i = order_.size(); i > 1; --i)
            std::swap(order_[i - 1], order_[rng_.next_below(i)]);
        cursor_ = 0;
    }
    Rng rng_;
    std::vector<std::size_t> order_;
    std::size_t cursor_ = 0;
};

} // namespace

TrainResult train_model(Model& model, const PairedDataset& data, const TrainConfig& config,
                        TilingMode mode, const Checkpoint* resume) {
    tune_allocator();
    config.validate();
    const models::ModelConfig& mcfg = model.config();
    const bool tiled = mode != TilingMode::Full;
    if (tiled && mcfg.arch != Architecture::SwinTile)
        throw ConfigError("train: tiles/patches modes require the swin_tile architecture");
    if (!tiled && mcfg.arch == Architecture::SwinTile)
        throw ConfigError("train: swin_tile trains in tiles or patches mode");
    if (!tiled && config.sampling == SamplingMode::Weighted)
        throw ConfigError("train: full-domain training uses uniform sampling");
    if (mode == TilingMode::Patches && config.sampling == SamplingMode::Weighted)
        throw ConfigError("train: the patch variant draws positions uniformly");

    const std::vector<std::size_t> train_idx = data.indices_for(SplitLabel::Train);
    const std::vector<std::size_t> val_idx_all = data.indices_for(SplitLabel::Validation);
    if (train_idx.empty()) throw ConfigError("train: empty training split");
    if (val_idx_all.empty()) throw ConfigError("train: empty validation split");
    const std::vector<std::size_t> val_idx = strided_subset(val_idx_all, config.max_val_samples);
    if (data.lr.empty()) throw ConfigError("train: empty dataset");
    const GridSpec hr_spec = data.hr.front().spec;

    if (resume) apply_params(model, *resume);

    Rng order_rng(config.seed * 0x9e3779b97f4a7c15ull + 17);

    Adam adam;
    adam.learning_rate = config.learning_rate;

    TrainResult result;
    if (resume) {
        result.train_history = resume->train_history;
        result.val_history = resume->val_history;
    }

    const double eps = config.charbonnier.epsilon;

    //------------------------------------------------------------------
    // Precompute per-sample assets
    //------------------------------------------------------------------
    std::vector<FullSample> full_samples;        // full-domain path
    std::vector<Field> bicubic_cache;            // tiled path
    pipeline::PreparedCovariates prepared;
    std::vector<TileRegion> grid_tiles;
    TileLayout layout;
    std::unique_ptr<WeightedSampleStream> weighted_stream;
    std::unique_ptr<IndexStream> time_stream;

    if (!tiled) {
        full_samples.resize(data.size());
        for (std::size_t i : train_idx)
            full_samples[i] =
                pipeline::make_full_sample(mcfg.arch, data.lr[i], &data.hr[i], hr_spec,
                                           mcfg.normalization);
        for (std::size_t i : val_idx)
            full_samples[i] =
                pipeline::make_full_sample(mcfg.arch, data.lr[i], &data.hr[i], hr_spec,
                                           mcfg.normalization);
        time_stream = std::make_unique<IndexStream>(train_idx.size(), order_rng.fork(11));
    } else {
        if (!data.covariates)
            throw ConfigError("train: tile modes need static covariates in the dataset");
        prepared = pipeline::PreparedCovariates::standardize(*data.covariates);
        bicubic_cache.resize(data.size());
        for (std::size_t i : train_idx) bicubic_cache[i] = bicubic_upsample(data.lr[i], hr_spec);
        for (std::size_t i : val_idx) bicubic_cache[i] = bicubic_upsample(data.lr[i], hr_spec);
        layout = pipeline::layout_for(mcfg, hr_spec, data.lr.front().spec);
        // Validation enumerates the inference layout of the mode: the
        // disjoint grid for tiles, the 50%-stride overlapping grid for
        // patches (which also covers domains not divisible by the tile).
        grid_tiles =
            mode == TilingMode::Tiles ? make_tile_grid(layout) : overlapping_patch_grid(layout);
        if (mode == TilingMode::Tiles && config.sampling == SamplingMode::Weighted) {
            const auto sigmas = covariate_patch_sigmas(*data.covariates, grid_tiles);
            SampleWeighting weighting = compute_patch_weights(sigmas);
            std::vector<TimeStamp> train_times;
            for (std::size_t i : train_idx) train_times.push_back(data.lr[i].time);
            weighted_stream = std::make_unique<WeightedSampleStream>(
                std::move(weighting), std::move(train_times), config.seed ^ 0x5a11ce5ull);
        } else {
            time_stream = std::make_unique<IndexStream>(train_idx.size(), order_rng.fork(13));
        }
    }

    auto lookup_by_time = [&](TimeStamp t) -> std::size_t {
        for (std::size_t i : train_idx)
            if (data.lr[i].time == t) return i;
        throw ConfigError("train: sampled timestamp not in the training split");
    };

    Rng patch_rng = order_rng.fork(29);

    const i64 default_steps =
        tiled ? static_cast<i64>((train_idx.size() * grid_tiles.size() + config.batch_size - 1) /
                                 config.batch_size)
              : static_cast<i64>((train_idx.size() + config.batch_size - 1) / config.batch_size);
    const i64 steps = config.steps_per_epoch > 0 ? config.steps_per_epoch : default_steps;

    //------------------------------------------------------------------
    // Validation pass (frozen statistics, no tape)
    //------------------------------------------------------------------
    auto validation_loss = [&]() {
        nn::NoGradGuard no_grad;
        double total = 0.0;
        std::size_t count = 0;
        if (!tiled) {
            for (std::size_t b0 = 0; b0 < val_idx.size(); b0 += config.batch_size) {
                const std::size_t b1 =
                    std::min(val_idx.size(), b0 + static_cast<std::size_t>(config.batch_size));
                std::vector<const FullSample*> batch;
                for (std::size_t k = b0; k < b1; ++k) batch.push_back(&full_samples[val_idx[k]]);
                Tensor pred = model.forward(pipeline::batch_full(batch, mcfg), false);
                Tensor target = pipeline::batch_targets_full(batch, mcfg.hr_n_lat, mcfg.hr_n_lon);
                total += charbonnier(std::span(pred.values()), std::span(target.values()), eps) *
                         static_cast<double>(batch.size());
                count += batch.size();
            }
        } else {
            std::vector<TileSample> batch_samples;
            std::vector<const TileSample*> batch;
            for (std::size_t vi : val_idx) {
                for (const TileRegion& tile : grid_tiles) {
                    batch_samples.push_back(pipeline::make_tile_sample(
                        data.lr[vi], &data.hr[vi], bicubic_cache[vi], prepared, tile,
                        mcfg.normalization));
                    if (static_cast<i64>(batch_samples.size()) == config.batch_size) {
                        batch.clear();
                        for (const auto& s : batch_samples) batch.push_back(&s);
                        Tensor pred = model.forward(pipeline::batch_tiles(batch, mcfg), false);
                        Tensor target = pipeline::batch_targets_tile(batch, mcfg.tile_size);
                        total += charbonnier(std::span(pred.values()), std::span(target.values()),
                                             eps) *
                                 static_cast<double>(batch.size());
                        count += batch.size();
                        batch_samples.clear();
                    }
                }
            }
            if (!batch_samples.empty()) {
                batch.clear();
                for (const auto& s : batch_samples) batch.push_back(&s);
                Tensor pred = model.forward(pipeline::batch_tiles(batch, mcfg), false);
                Tensor target = pipeline::batch_targets_tile(batch, mcfg.tile_size);
                total += charbonnier(std::span(pred.values()), std::span(target.values()), eps) *
                         static_cast<double>(batch.size());
                count += batch.size();
            }
        }
        return total / static_cast<double>(count);
    };

    double best_val = std::numeric_limits<double>::infinity();
    Checkpoint best;
    if (resume) {
        for (double v : resume->val_history) best_val = std::min(best_val, v);
        best = *resume;
    }

    const i64 epoch0 = static_cast<i64>(result.val_history.size());
    for (i64 epoch = epoch0; epoch < epoch0 + config.max_epochs; ++epoch) {
        double train_total = 0.0;
        std::size_t train_count = 0;
        bool nan_hit = false;

        for (i64 step = 0; step < steps; ++step) {
            Tensor loss;
            if (!tiled) {
                std::vector<const FullSample*> batch;
                for (i64 k = 0; k < config.batch_size; ++k)
                    batch.push_back(&full_samples[train_idx[time_stream->next()]]);
                Tensor pred = model.forward(pipeline::batch_full(batch, mcfg), true);
                Tensor target = pipeline::batch_targets_full(batch, mcfg.hr_n_lat, mcfg.hr_n_lon);
                loss = nn::charbonnier_loss(pred, target, eps);
            } else {
                std::vector<TileSample> batch_samples;
                for (i64 k = 0; k < config.batch_size; ++k) {
                    std::size_t ti;
                    TileRegion tile;
                    if (weighted_stream) {
                        auto [ts, patch] = weighted_stream->next();
                        ti = lookup_by_time(ts);
                        tile = grid_tiles[patch];
                    } else {
                        ti = train_idx[time_stream->next()];
                        tile = mode == TilingMode::Patches ? random_patch(layout, patch_rng)
                                                           : grid_tiles[patch_rng.next_below(
                                                                 grid_tiles.size())];
                    }
                    batch_samples.push_back(pipeline::make_tile_sample(
                        data.lr[ti], &data.hr[ti], bicubic_cache[ti], prepared, tile,
                        mcfg.normalization));
                }
                std::vector<const TileSample*> batch;
                for (const auto& s : batch_samples) batch.push_back(&s);
                Tensor pred = model.forward(pipeline::batch_tiles(batch, mcfg), true);
                Tensor target = pipeline::batch_targets_tile(batch, mcfg.tile_size);
                loss = nn::charbonnier_loss(pred, target, eps);
            }
            const double lv = loss.item();
            if (!std::isfinite(lv)) {
                nan_hit = true;
                break;
            }
            train_total += lv;
            train_count += 1;
            model.params().zero_grads();
            loss.backward();
            adam.step(model.params());
        }

        if (nan_hit) {
            result.aborted_nan = true;
            break;
        }

        result.train_history.push_back(train_total / static_cast<double>(train_count));
        const double vloss = validation_loss();
        result.val_history.push_back(vloss);

        if (vloss < best_val) {
            best_val = vloss;
            best = snapshot_model(model);
            result.best_epoch = epoch;
        }
        if (early_stop(result.val_history, config.patience, config.min_rel_improvement)) {
            result.stopped_early = true;
            break;
        }
    }

    if (best.params.empty()) best = snapshot_model(model);
    best.tiling_mode = pipeline::tiling_mode_name(mode);
    best.lr_grid = data.lr.front().spec;
    best.hr_grid = hr_spec;
    best.split = data.split;
    best.train_history = result.train_history;
    best.val_history = result.val_history;
    best.seed = config.seed;
    best.data_fingerprint = data.fingerprint();
    apply_params(model, best);
    result.checkpoint = std::move(best);
    return result;
}

} // namespace gridsr::train
