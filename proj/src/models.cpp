#include "gridsr/models.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "gridsr/kernels.hpp"

namespace gridsr::models {

using nn::BatchNorm2d;
using nn::Conv2d;
using nn::ConvTranspose2x2;
using nn::DoubleConv;
using nn::Linear;
using nn::ParamStore;
using nn::StatsEmbed;
using nn::SwinBlock;

const char* architecture_name(Architecture a) {
    switch (a) {
        case Architecture::Bicubic: return "bicubic";
        case Architecture::UNet: return "unet";
        case Architecture::DeepESD: return "deepesd";
        case Architecture::SwinFull: return "swin_full";
        case Architecture::SwinTile: return "swin_tile";
    }
    return "?";
}

Architecture architecture_from_name(const std::string& name) {
    for (Architecture a : {Architecture::Bicubic, Architecture::UNet, Architecture::DeepESD,
                           Architecture::SwinFull, Architecture::SwinTile})
        if (name == architecture_name(a)) return a;
    throw ConfigError("unknown architecture '" + name + "'");
}

void ModelConfig::validate() const {
    if (scale_factor != 4)
        throw ConfigError("ModelConfig: the upscaling path is built for scale factor 4");
    if (hr_n_lat % 4 != 0 || hr_n_lon % 4 != 0)
        throw ConfigError("ModelConfig: HR dims must be divisible by 4");
    if (arch == Architecture::SwinFull) {
        const int crop_lat = hr_n_lat / 4, crop_lon = hr_n_lon / 4;
        if (lr_n_lat < crop_lat || lr_n_lon < crop_lon)
            throw ConfigError("ModelConfig: LR input smaller than the hr/4 feature crop");
        for (int d : {crop_lat, crop_lon})
            if (d % swin.window != 0)
                throw ConfigError("ModelConfig: window size " + std::to_string(swin.window) +
                                  " must divide stage dims (offending dim " + std::to_string(d) + ")");
    }
    if (arch == Architecture::SwinTile) {
        if (tile_size % 4 != 0) throw ConfigError("ModelConfig: tile size must be divisible by 4");
        const int proc = tile_size / 4;
        if (lr_window < proc)
            throw ConfigError("ModelConfig: lr_window smaller than the processor crop");
        if (proc % swin.window != 0)
            throw ConfigError("ModelConfig: tile window size must divide stage dims");
        if (cov_window < tile_size)
            throw ConfigError("ModelConfig: covariate window must contain the tile");
    }
    if (swin.embed_dim % swin.heads != 0)
        throw ConfigError("ModelConfig: heads must divide embed_dim");
    if (arch == Architecture::DeepESD &&
        (deepesd_channels.size() != 3 || deepesd_strides.size() != 3))
        throw ConfigError("ModelConfig: DeepESD uses exactly three convolutional layers");
}

std::string ModelConfig::to_json() const {
    nlohmann::json j;
    j["arch"] = architecture_name(arch);
    j["scale_factor"] = scale_factor;
    j["normalization"] = norm_variant_name(normalization);
    j["lr_n_lat"] = lr_n_lat;
    j["lr_n_lon"] = lr_n_lon;
    j["hr_n_lat"] = hr_n_lat;
    j["hr_n_lon"] = hr_n_lon;
    j["tile_size"] = tile_size;
    j["lr_window"] = lr_window;
    j["cov_window"] = cov_window;
    j["swin"] = {{"window", swin.window},
                 {"embed_dim", swin.embed_dim},
                 {"heads", swin.heads},
                 {"mlp_ratio", swin.mlp_ratio},
                 {"depths", swin.depths}};
    j["unet_base"] = unet_base;
    j["deepesd_channels"] = deepesd_channels;
    j["deepesd_strides"] = deepesd_strides;
    return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    ModelConfig c;
    c.arch = architecture_from_name(j.at("arch").get<std::string>());
    c.scale_factor = j.at("scale_factor").get<int>();
    c.normalization = norm_variant_from_name(j.at("normalization").get<std::string>());
    c.lr_n_lat = j.at("lr_n_lat").get<int>();
    c.lr_n_lon = j.at("lr_n_lon").get<int>();
    c.hr_n_lat = j.at("hr_n_lat").get<int>();
    c.hr_n_lon = j.at("hr_n_lon").get<int>();
    c.tile_size = j.at("tile_size").get<int>();
    c.lr_window = j.at("lr_window").get<int>();
    c.cov_window = j.at("cov_window").get<int>();
    const auto& s = j.at("swin");
    c.swin.window = s.at("window").get<i64>();
    c.swin.embed_dim = s.at("embed_dim").get<i64>();
    c.swin.heads = s.at("heads").get<i64>();
    c.swin.mlp_ratio = s.at("mlp_ratio").get<i64>();
    c.swin.depths = s.at("depths").get<std::vector<i64>>();
    c.unet_base = j.at("unet_base").get<i64>();
    c.deepesd_channels = j.at("deepesd_channels").get<std::vector<i64>>();
    c.deepesd_strides = j.at("deepesd_strides").get<std::vector<i64>>();
    return c;
}

void Model::zero_final_layer() {
    const std::string base = final_layer_name();
    for (const char* suffix : {".weight", ".bias"}) {
        if (!params_.has(base + suffix)) continue;
        Tensor t = params_.get(base + suffix);
        std::fill(t.values().begin(), t.values().end(), 0.0);
    }
}

namespace {

//----------------------------------------------------------------------------
// Shared denoising block: batch norm, a Swin2SR refinement at half
// resolution, and a final pixel shuffle back to full resolution.
//----------------------------------------------------------------------------

struct DenoiseBlock {
    BatchNorm2d bn;
    Conv2d fold; // 16D -> D after the unshuffle
    SwinBlock block;
    Conv2d head; // D -> 16, zero-initialized residual head

    DenoiseBlock() = default;
    DenoiseBlock(ParamStore& store, const std::string& name, i64 dim, i64 heads, i64 window,
                 i64 out_h, i64 out_w, i64 mlp_ratio, Rng& rng) {
        bn = BatchNorm2d(store, name + ".bn", dim);
        fold = Conv2d(store, name + ".fold", 16 * dim, dim, 3, 1, 1, rng);
        block = SwinBlock(store, name + ".swin", dim, heads, window, out_h / 4, out_w / 4, false,
                          mlp_ratio, rng);
        head = Conv2d(store, name + ".head", dim, 16, 3, 1, 1, rng, /*zero_init=*/true);
    }

    // Batch norm, a Swin2SR refinement folded down to quarter resolution, and
    // the final pixel shuffle back to the full output size.
    Tensor forward(const Tensor& x, bool training) const {
        Tensor h = bn.forward(x, training);
        h = fold.forward(nn::pixel_unshuffle(h, 4));
        h = block.forward(h);
        return nn::pixel_shuffle(head.forward(h), 4);
    }
};

//----------------------------------------------------------------------------
// Swin2SR, full-domain variant
//----------------------------------------------------------------------------

class SwinFullModel final : public Model {
public:
    SwinFullModel(ModelConfig cfg, std::uint64_t seed) : Model(std::move(cfg)) {
        config_.validate();
        Rng rng(seed ^ 0x5317f001u);
        const i64 D = config_.swin.embed_dim;
        const i64 heads = config_.swin.heads;
        const i64 ws = config_.swin.window;
        crop_lat_ = config_.hr_n_lat / 4;
        crop_lon_ = config_.hr_n_lon / 4;

        embed_ = StatsEmbed(params_, "stats_embed", config_.lr_n_lat, config_.lr_n_lon, rng);
        shallow_ = Conv2d(params_, "shallow", 2, D, 3, 1, 1, rng);
        int bi = 0;
        for (std::size_t s = 0; s < config_.swin.depths.size(); ++s) {
            Stage stage;
            for (i64 d = 0; d < config_.swin.depths[s]; ++d) {
                stage.blocks.emplace_back(params_, "stage" + std::to_string(s) + ".block" +
                                                       std::to_string(d),
                                          D, heads, ws, crop_lat_, crop_lon_, bi % 2 == 1,
                                          config_.swin.mlp_ratio, rng);
                ++bi;
            }
            stage.conv = Conv2d(params_, "stage" + std::to_string(s) + ".conv", D, D, 3, 1, 1, rng);
            stages_.push_back(std::move(stage));
        }
        up1_ = Conv2d(params_, "upscale.conv1", D, 4 * D, 3, 1, 1, rng);
        up2_ = Conv2d(params_, "upscale.conv2", D, 4 * D, 3, 1, 1, rng);
        denoise_ = DenoiseBlock(params_, "denoise", D, heads, ws, config_.hr_n_lat,
                                config_.hr_n_lon, config_.swin.mlp_ratio, rng);
    }

    Tensor forward(const BatchInputs& in, bool training, ForwardTrace* trace) override {
        if (in.input.ndim() != 4 || in.input.dim(1) != 1 || in.input.dim(2) != config_.lr_n_lat ||
            in.input.dim(3) != config_.lr_n_lon)
            throw ShapeError("swin_full: expected input [B,1," + std::to_string(config_.lr_n_lat) +
                             "," + std::to_string(config_.lr_n_lon) + "], got " +
                             nn::shape_str(in.input.shape()));
        Tensor x = nn::concat_channels({in.input, embed_.forward(in.stats)});
        x = shallow_.forward(x);
        const i64 i0 = (config_.lr_n_lat - crop_lat_) / 2;
        const i64 j0 = (config_.lr_n_lon - crop_lon_) / 2;
        x = nn::crop_hw(x, i0, j0, crop_lat_, crop_lon_);
        for (const Stage& stage : stages_) {
            Tensor h = x;
            for (const SwinBlock& b : stage.blocks) h = b.forward(h);
            x = nn::add(x, stage.conv.forward(h));
        }
        x = nn::pixel_shuffle(up1_.forward(x), 2);
        if (trace) trace->record("upscale.x2", x);
        x = nn::pixel_shuffle(up2_.forward(x), 2);
        if (trace) trace->record("upscale.x4", x);
        return denoise_.forward(x, training);
    }

    std::string final_layer_name() const override { return "denoise.head"; }

private:
    struct Stage {
        std::vector<SwinBlock> blocks;
        Conv2d conv;
    };
    StatsEmbed embed_;
    Conv2d shallow_;
    std::vector<Stage> stages_;
    Conv2d up1_, up2_;
    DenoiseBlock denoise_;
    i64 crop_lat_ = 0, crop_lon_ = 0;
};

//----------------------------------------------------------------------------
// Swin2SR, tile variant with covariate encoder
//----------------------------------------------------------------------------

class SwinTileModel final : public Model {
public:
    SwinTileModel(ModelConfig cfg, std::uint64_t seed) : Model(std::move(cfg)) {
        config_.validate();
        Rng rng(seed ^ 0x5317f11eu);
        const i64 D = config_.swin.embed_dim;
        const i64 heads = config_.swin.heads;
        const i64 ws = config_.swin.window;
        const i64 tile = config_.tile_size;
        proc_dim_ = tile / 4;

        embed_ = StatsEmbed(params_, "stats_embed", config_.lr_window, config_.lr_window, rng);
        // Processor block: 1x1 convolution then centre crop to [3, tile/4, tile/4].
        proc_ = Conv2d(params_, "processor.conv", 4, 3, 1, 0, 1, rng);

        enc40_ = Conv2d(params_, "cov_encoder.stage40", 2, 2, 3, 1, 1, rng);
        enc20_ = Conv2d(params_, "cov_encoder.stage20", 2, 2, 3, 1, 2, rng);
        enc10_ = Conv2d(params_, "cov_encoder.stage10", 2, 2, 3, 1, 2, rng);

        fuse10_ = Conv2d(params_, "fuse10", 3 + 2, D, 3, 1, 1, rng);
        for (i64 d = 0; d < config_.swin.depths.at(0); ++d)
            blocks_.emplace_back(params_, "block" + std::to_string(d), D, heads, ws, proc_dim_,
                                 proc_dim_, d % 2 == 1, config_.swin.mlp_ratio, rng);
        up1_ = Conv2d(params_, "upscale.conv1", D, 4 * D, 3, 1, 1, rng);
        fuse20_ = Conv2d(params_, "fuse20", D + 2, D, 3, 1, 1, rng);
        up2_ = Conv2d(params_, "upscale.conv2", D, 4 * D, 3, 1, 1, rng);
        fuse40_ = Conv2d(params_, "fuse40", D + 2, D, 3, 1, 1, rng);
        denoise_ = DenoiseBlock(params_, "denoise", D, heads, ws, tile, tile,
                                config_.swin.mlp_ratio, rng);
    }

    Tensor forward(const BatchInputs& in, bool training, ForwardTrace* trace) override {
        const i64 lw = config_.lr_window;
        const i64 tile = config_.tile_size;
        if (in.input.ndim() != 4 || in.input.dim(1) != 1 || in.input.dim(2) != lw ||
            in.input.dim(3) != lw)
            throw ShapeError("swin_tile: expected input [B,1," + std::to_string(lw) + "," +
                             std::to_string(lw) + "], got " + nn::shape_str(in.input.shape()));
        if (!in.lr_covariates.defined() || !in.hr_covariates.defined())
            throw ShapeError("swin_tile: missing covariate inputs");
        if (in.hr_covariates.dim(2) != config_.cov_window ||
            in.hr_covariates.dim(3) != config_.cov_window)
            throw ShapeError("swin_tile: covariate window must be " +
                             std::to_string(config_.cov_window) + "^2, got " +
                             nn::shape_str(in.hr_covariates.shape()));

        // Covariate encoder stages: [2,tile], [2,tile/2], [2,tile/4].
        const i64 c0 = (config_.cov_window - tile) / 2;
        Tensor cov = nn::crop_hw(in.hr_covariates, c0, c0, tile, tile);
        Tensor e40 = nn::relu(enc40_.forward(cov));
        Tensor e20 = nn::relu(enc20_.forward(e40));
        Tensor e10 = nn::relu(enc10_.forward(e20));
        if (trace) {
            trace->record("cov_encoder.stage40", e40);
            trace->record("cov_encoder.stage20", e20);
            trace->record("cov_encoder.stage10", e10);
        }

        Tensor x = nn::concat_channels({in.input, embed_.forward(in.stats), in.lr_covariates});
        x = proc_.forward(x); // [B,3,lw,lw]
        const i64 off = (lw - proc_dim_) / 2;
        x = nn::crop_hw(x, off, off, proc_dim_, proc_dim_);
        if (trace) trace->record("processor", x);

        x = fuse10_.forward(nn::concat_channels({x, e10}));
        Tensor h = x;
        for (const SwinBlock& b : blocks_) h = b.forward(h);
        x = nn::add(x, h);
        x = nn::pixel_shuffle(up1_.forward(x), 2);
        x = fuse20_.forward(nn::concat_channels({x, e20}));
        x = nn::pixel_shuffle(up2_.forward(x), 2);
        x = fuse40_.forward(nn::concat_channels({x, e40}));
        return denoise_.forward(x, training);
    }

    std::string final_layer_name() const override { return "denoise.head"; }

private:
    StatsEmbed embed_;
    Conv2d proc_;
    Conv2d enc40_, enc20_, enc10_;
    Conv2d fuse10_, fuse20_, fuse40_;
    std::vector<SwinBlock> blocks_;
    Conv2d up1_, up2_;
    DenoiseBlock denoise_;
    i64 proc_dim_ = 0;
};

//----------------------------------------------------------------------------
// UNet benchmark
//----------------------------------------------------------------------------

class UNetModel final : public Model {
public:
    UNetModel(ModelConfig cfg, std::uint64_t seed) : Model(std::move(cfg)) {
        config_.validate();
        Rng rng(seed ^ 0x00e70001u);
        const i64 F = config_.unet_base;
        embed_ = StatsEmbed(params_, "stats_embed", config_.hr_n_lat, config_.hr_n_lon, rng);
        enc1_ = DoubleConv(params_, "enc1", 2, F, rng);
        enc2_ = DoubleConv(params_, "enc2", F, 2 * F, rng);
        enc3_ = DoubleConv(params_, "enc3", 2 * F, 4 * F, rng);
        enc4_ = DoubleConv(params_, "enc4", 4 * F, 8 * F, rng);
        bottleneck_ = DoubleConv(params_, "bottleneck", 8 * F, 16 * F, rng);
        up4_ = ConvTranspose2x2(params_, "up4", 16 * F, 8 * F, rng);
        dec4_ = DoubleConv(params_, "dec4", 16 * F, 8 * F, rng);
        up3_ = ConvTranspose2x2(params_, "up3", 8 * F, 4 * F, rng);
        dec3_ = DoubleConv(params_, "dec3", 8 * F, 4 * F, rng);
        up2_ = ConvTranspose2x2(params_, "up2", 4 * F, 2 * F, rng);
        dec2_ = DoubleConv(params_, "dec2", 4 * F, 2 * F, rng);
        up1_ = ConvTranspose2x2(params_, "up1", 2 * F, F, rng);
        dec1_ = DoubleConv(params_, "dec1", 2 * F, F, rng);
        final_ = Conv2d(params_, "final", F, 1, 1, 0, 1, rng, /*zero_init=*/true);
    }

    Tensor forward(const BatchInputs& in, bool training, ForwardTrace* trace) override {
        const i64 H = config_.hr_n_lat, W = config_.hr_n_lon;
        if (in.input.ndim() != 4 || in.input.dim(2) != H || in.input.dim(3) != W)
            throw ShapeError("unet: expected interpolated input [B,1," + std::to_string(H) + "," +
                             std::to_string(W) + "], got " + nn::shape_str(in.input.shape()));
        Tensor x = nn::concat_channels({in.input, embed_.forward(in.stats)});
        // Zero-pad to the next multiple of 2^4, extra cell at bottom/right.
        const i64 Hp = (H + 15) / 16 * 16, Wp = (W + 15) / 16 * 16;
        const i64 pt = (Hp - H) / 2, pl = (Wp - W) / 2;
        if (Hp != H || Wp != W) x = nn::pad_hw(x, pt, Hp - H - pt, pl, Wp - W - pl);

        if (trace) trace->record("padded", x);
        Tensor e1 = enc1_.forward(x, training);
        Tensor e2 = enc2_.forward(nn::maxpool2x2(e1), training);
        Tensor e3 = enc3_.forward(nn::maxpool2x2(e2), training);
        Tensor e4 = enc4_.forward(nn::maxpool2x2(e3), training);
        Tensor b = bottleneck_.forward(nn::maxpool2x2(e4), training);
        if (trace) {
            trace->record("enc1", e1);
            trace->record("enc2", e2);
            trace->record("enc3", e3);
            trace->record("enc4", e4);
            trace->record("bottleneck", b);
        }
        Tensor d4 = dec4_.forward(nn::concat_channels({up4_.forward(b), e4}), training);
        Tensor d3 = dec3_.forward(nn::concat_channels({up3_.forward(d4), e3}), training);
        Tensor d2 = dec2_.forward(nn::concat_channels({up2_.forward(d3), e2}), training);
        Tensor d1 = dec1_.forward(nn::concat_channels({up1_.forward(d2), e1}), training);
        Tensor out = final_.forward(d1);
        if (Hp != H || Wp != W) out = nn::crop_hw(out, pt, pl, H, W);
        return out;
    }

    std::string final_layer_name() const override { return "final"; }

private:
    StatsEmbed embed_;
    DoubleConv enc1_, enc2_, enc3_, enc4_, bottleneck_, dec4_, dec3_, dec2_, dec1_;
    ConvTranspose2x2 up4_, up3_, up2_, up1_;
    Conv2d final_;
};

//----------------------------------------------------------------------------
// DeepESD benchmark: three 3x3 convolutions, flatten, one dense map
//----------------------------------------------------------------------------

class DeepESDModel final : public Model {
public:
    DeepESDModel(ModelConfig cfg, std::uint64_t seed) : Model(std::move(cfg)) {
        config_.validate();
        Rng rng(seed ^ 0xdee9e5d0u);
        const i64 H = config_.hr_n_lat, W = config_.hr_n_lon;
        embed_ = StatsEmbed(params_, "stats_embed", H, W, rng);
        const auto& ch = config_.deepesd_channels;
        const auto& st = config_.deepesd_strides;
        c1_ = Conv2d(params_, "conv1", 2, ch[0], 3, 1, st[0], rng);
        c2_ = Conv2d(params_, "conv2", ch[0], ch[1], 3, 1, st[1], rng);
        c3_ = Conv2d(params_, "conv3", ch[1], ch[2], 3, 1, st[2], rng);
        i64 h = H, w = W;
        for (i64 s : st) {
            h = kernels::conv_out_dim(h, 3, 1, s);
            w = kernels::conv_out_dim(w, 3, 1, s);
        }
        flat_ = ch[2] * h * w;
        dense_ = Linear(params_, "dense", flat_, H * W, rng, /*zero_init=*/true);
    }

    Tensor forward(const BatchInputs& in, bool training, ForwardTrace* trace) override {
        (void)training;
        (void)trace;
        const i64 H = config_.hr_n_lat, W = config_.hr_n_lon;
        if (in.input.ndim() != 4 || in.input.dim(2) != H || in.input.dim(3) != W)
            throw ShapeError("deepesd: expected interpolated input [B,1," + std::to_string(H) +
                             "," + std::to_string(W) + "], got " + nn::shape_str(in.input.shape()));
        const i64 B = in.input.dim(0);
        Tensor x = nn::concat_channels({in.input, embed_.forward(in.stats)});
        x = nn::relu(c1_.forward(x));
        x = nn::relu(c2_.forward(x));
        x = c3_.forward(x);
        Tensor y = dense_.forward(nn::reshape(x, {B, flat_}));
        return nn::reshape(y, {B, 1, H, W});
    }

    std::string final_layer_name() const override { return "dense"; }

private:
    StatsEmbed embed_;
    Conv2d c1_, c2_, c3_;
    Linear dense_;
    i64 flat_ = 0;
};

//----------------------------------------------------------------------------
// Bicubic baseline: parameter-free zero residual
//----------------------------------------------------------------------------

class BicubicModel final : public Model {
public:
    BicubicModel(ModelConfig cfg, std::uint64_t) : Model(std::move(cfg)) {}

    Tensor forward(const BatchInputs& in, bool, ForwardTrace*) override {
        const i64 B = in.input.defined() ? in.input.dim(0) : 1;
        return Tensor::zeros({B, 1, config_.hr_n_lat, config_.hr_n_lon});
    }

    std::string final_layer_name() const override { return "none"; }

private:
};

} // namespace

std::unique_ptr<Model> build_model(const ModelConfig& config, std::uint64_t seed) {
    switch (config.arch) {
        case Architecture::Bicubic: return std::make_unique<BicubicModel>(config, seed);
        case Architecture::UNet: return std::make_unique<UNetModel>(config, seed);
        case Architecture::DeepESD: return std::make_unique<DeepESDModel>(config, seed);
        case Architecture::SwinFull: return std::make_unique<SwinFullModel>(config, seed);
        case Architecture::SwinTile: return std::make_unique<SwinTileModel>(config, seed);
    }
    throw ConfigError("build_model: unknown architecture");
}

ModelConfig reference_config(Architecture arch) {
    ModelConfig c;
    c.arch = arch;
    c.lr_n_lat = 57;
    c.lr_n_lon = 81;
    c.hr_n_lat = 200;
    c.hr_n_lon = 320;
    switch (arch) {
        case Architecture::SwinFull:
            c.swin = SwinParams{10, 96, 6, 2, {4, 4}};
            break;
        case Architecture::SwinTile:
            c.swin = SwinParams{5, 64, 4, 2, {4}};
            break;
        case Architecture::UNet:
            c.unet_base = 64;
            break;
        case Architecture::DeepESD:
            c.deepesd_channels = {32, 16, 1};
            c.deepesd_strides = {2, 2, 1};
            break;
        case Architecture::Bicubic:
            break;
    }
    return c;
}

ModelConfig desk_config(Architecture arch, int hr_n_lat, int hr_n_lon, int scale_factor) {
    ModelConfig c;
    c.arch = arch;
    c.scale_factor = 4;
    c.hr_n_lat = hr_n_lat;
    c.hr_n_lon = hr_n_lon;
    c.lr_n_lat = hr_n_lat / scale_factor;
    c.lr_n_lon = hr_n_lon / scale_factor;
    switch (arch) {
        case Architecture::SwinFull:
            c.swin = SwinParams{10, 32, 4, 2, {2, 2}};
            break;
        case Architecture::SwinTile:
            c.swin = SwinParams{5, 32, 4, 2, {2}};
            break;
        case Architecture::UNet:
            c.unet_base = 8;
            break;
        case Architecture::DeepESD:
            c.deepesd_channels = {8, 4, 1};
            c.deepesd_strides = {2, 2, 1};
            break;
        case Architecture::Bicubic:
            break;
    }
    return c;
}

} // namespace gridsr::models
