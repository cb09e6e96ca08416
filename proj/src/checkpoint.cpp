#include "gridsr/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace gridsr {

namespace {
constexpr char kMagic[8] = {'G', 'S', 'R', 'C', 'K', 'P', 'T', '1'};
}

std::uint64_t Checkpoint::param_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const ParamBlob& p : params) {
        h = fnv1a(p.name.data(), p.name.size(), h);
        h = fnv1a(p.values.data(), p.values.size() * sizeof(double), h);
    }
    return h;
}

nn::i64 Checkpoint::parameter_count() const {
    nn::i64 n = 0;
    for (const ParamBlob& p : params) n += static_cast<nn::i64>(p.values.size());
    return n;
}

Checkpoint snapshot_model(const models::Model& model) {
    Checkpoint c;
    c.config = model.config();
    for (const auto& e : model.params().entries()) {
        ParamBlob b;
        b.name = e.name;
        b.shape = e.tensor.shape();
        b.trainable = e.trainable;
        b.values = e.tensor.values();
        c.params.push_back(std::move(b));
    }
    return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    auto grid_json = [](const GridSpec& g) {
        return nlohmann::json{{"lat_start", g.lat_start}, {"lon_start", g.lon_start},
                              {"dlat", g.dlat},           {"dlon", g.dlon},
                              {"n_lat", g.n_lat},         {"n_lon", g.n_lon}};
    };
    nlohmann::json j;
    j["version"] = ckpt.version;
    j["config"] = nlohmann::json::parse(ckpt.config.to_json());
    j["tiling_mode"] = ckpt.tiling_mode;
    j["lr_grid"] = grid_json(ckpt.lr_grid);
    j["hr_grid"] = grid_json(ckpt.hr_grid);
    j["split"] = {ckpt.split.train_start,      ckpt.split.train_end,
                  ckpt.split.validation_start, ckpt.split.validation_end,
                  ckpt.split.test_start,       ckpt.split.test_end};
    j["train_history"] = ckpt.train_history;
    j["val_history"] = ckpt.val_history;
    j["seed"] = ckpt.seed;
    j["data_fingerprint"] = hex64(ckpt.data_fingerprint);
    j["param_hash"] = hex64(ckpt.param_hash());
    j["parameter_count"] = ckpt.parameter_count();
    nlohmann::json plist = nlohmann::json::array();
    for (const ParamBlob& p : ckpt.params)
        plist.push_back({{"name", p.name}, {"shape", p.shape}, {"trainable", p.trainable}});
    j["params"] = plist;
    const std::string header = j.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("save_checkpoint: cannot write '" + path + "'");
    out.write(kMagic, 8);
    const std::uint64_t len = header.size();
    out.write(reinterpret_cast<const char*>(&len), 8);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (const ParamBlob& p : ckpt.params)
        out.write(reinterpret_cast<const char*>(p.values.data()),
                  static_cast<std::streamsize>(p.values.size() * sizeof(double)));
    if (!out) throw ConfigError("save_checkpoint: short write to '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("load_checkpoint: cannot open '" + path + "'");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw ConfigError("load_checkpoint: '" + path + "' is not a gridsr checkpoint");
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), 8);
    std::string header(len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(len));
    if (!in) throw ConfigError("load_checkpoint: truncated header in '" + path + "'");

    const nlohmann::json j = nlohmann::json::parse(header);
    auto grid_from = [](const nlohmann::json& gj) {
        GridSpec g;
        g.lat_start = gj.at("lat_start").get<double>();
        g.lon_start = gj.at("lon_start").get<double>();
        g.dlat = gj.at("dlat").get<double>();
        g.dlon = gj.at("dlon").get<double>();
        g.n_lat = gj.at("n_lat").get<int>();
        g.n_lon = gj.at("n_lon").get<int>();
        return g;
    };
    Checkpoint c;
    c.version = j.at("version").get<int>();
    c.config = models::ModelConfig::from_json(j.at("config").dump());
    c.tiling_mode = j.at("tiling_mode").get<std::string>();
    c.lr_grid = grid_from(j.at("lr_grid"));
    c.hr_grid = grid_from(j.at("hr_grid"));
    const auto sp = j.at("split").get<std::vector<int>>();
    c.split.train_start = sp.at(0);
    c.split.train_end = sp.at(1);
    c.split.validation_start = sp.at(2);
    c.split.validation_end = sp.at(3);
    c.split.test_start = sp.at(4);
    c.split.test_end = sp.at(5);
    c.train_history = j.at("train_history").get<std::vector<double>>();
    c.val_history = j.at("val_history").get<std::vector<double>>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.data_fingerprint = std::stoull(j.at("data_fingerprint").get<std::string>(), nullptr, 16);
    for (const auto& pj : j.at("params")) {
        ParamBlob p;
        p.name = pj.at("name").get<std::string>();
        p.shape = pj.at("shape").get<nn::Shape>();
        p.trainable = pj.at("trainable").get<bool>();
        p.values.resize(static_cast<std::size_t>(nn::numel_of(p.shape)));
        in.read(reinterpret_cast<char*>(p.values.data()),
                static_cast<std::streamsize>(p.values.size() * sizeof(double)));
        c.params.push_back(std::move(p));
    }
    if (!in) throw ConfigError("load_checkpoint: truncated parameter data in '" + path + "'");
    const std::string expect = j.at("param_hash").get<std::string>();
    if (hex64(c.param_hash()) != expect)
        throw ConfigError("load_checkpoint: parameter hash mismatch in '" + path + "'");
    return c;
}

void apply_params(models::Model& model, const Checkpoint& ckpt) {
    auto& entries = model.params().entries();
    if (entries.size() != ckpt.params.size())
        throw ConfigError("apply_params: checkpoint has " + std::to_string(ckpt.params.size()) +
                          " arrays but the model has " + std::to_string(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const ParamBlob& p = ckpt.params[i];
        if (entries[i].name != p.name)
            throw ConfigError("apply_params: parameter order mismatch at '" + p.name + "'");
        if (entries[i].tensor.numel() != static_cast<nn::i64>(p.values.size()))
            throw ConfigError("apply_params: size mismatch for '" + p.name + "'");
        entries[i].tensor.values() = p.values;
    }
}

std::unique_ptr<models::Model> model_from_checkpoint(const Checkpoint& ckpt) {
    auto model = models::build_model(ckpt.config, ckpt.seed);
    apply_params(*model, ckpt);
    return model;
}

} // namespace gridsr
