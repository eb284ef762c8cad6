// Copyright 2026 WSDT Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace wsdt {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError(cat(where, " must be a JSON object"));
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(cat("unknown config key ", where, ".", it.key()));
}

const json& require(const json& obj, const std::string& where, const std::string& key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(cat("missing config field ", where, ".", key));
    return *it;
}

int req_int(const json& obj, const std::string& where, const std::string& key) {
    const json& v = require(obj, where, key);
    if (!v.is_number_integer())
        throw ConfigError(cat("config field ", where, ".", key, " must be an integer"));
    return v.get<int>();
}

uint64_t req_u64(const json& obj, const std::string& where, const std::string& key) {
    const json& v = require(obj, where, key);
    if (!v.is_number_unsigned() && !v.is_number_integer())
        throw ConfigError(cat("config field ", where, ".", key, " must be a non-negative integer"));
    if (v.is_number_integer() && v.get<int64_t>() < 0)
        throw ConfigError(cat("config field ", where, ".", key, " must be a non-negative integer"));
    return v.get<uint64_t>();
}

double req_num(const json& obj, const std::string& where, const std::string& key) {
    const json& v = require(obj, where, key);
    if (!v.is_number())
        throw ConfigError(cat("config field ", where, ".", key, " must be a number"));
    return v.get<double>();
}

}  // namespace

RunConfig RunConfig::parse(const std::string& json_text) {
    json root = json::parse(json_text, nullptr, false);
    if (root.is_discarded()) throw ConfigError("config is not valid JSON");
    check_keys(root, "config", {"model", "schedule", "train", "data"});

    RunConfig cfg;

    const json& m = require(root, "config", "model");
    check_keys(m, "model",
               {"embed_dim", "n_heads", "depth_le", "depth_hd", "mlp_ratio", "p_min", "lr_patch"});
    cfg.model.embed_dim = req_int(m, "model", "embed_dim");
    cfg.model.n_heads = req_int(m, "model", "n_heads");
    cfg.model.depth_le = req_int(m, "model", "depth_le");
    cfg.model.depth_hd = req_int(m, "model", "depth_hd");
    cfg.model.mlp_ratio = req_int(m, "model", "mlp_ratio");
    cfg.model.p_min = req_int(m, "model", "p_min");
    cfg.model.lr_patch = req_int(m, "model", "lr_patch");

    const json& s = require(root, "config", "schedule");
    check_keys(s, "schedule", {"steps", "alpha_bar"});
    cfg.schedule.steps = req_int(s, "schedule", "steps");
    const json& ab = require(s, "schedule", "alpha_bar");
    if (!ab.is_array()) throw ConfigError("config field schedule.alpha_bar must be an array");
    for (const auto& v : ab) {
        if (!v.is_number()) throw ConfigError("schedule.alpha_bar entries must be numbers");
        cfg.schedule.alpha_bar.push_back(v.get<double>());
    }

    const json& t = require(root, "config", "train");
    check_keys(t, "train",
               {"alpha", "beta", "gamma", "lr_g", "lr_d", "batch_size", "iterations", "seed",
                "upscale", "image_size", "checkpoint_every"});
    cfg.train.alpha = req_num(t, "train", "alpha");
    cfg.train.beta = req_num(t, "train", "beta");
    cfg.train.gamma = req_num(t, "train", "gamma");
    cfg.train.lr_g = req_num(t, "train", "lr_g");
    cfg.train.lr_d = req_num(t, "train", "lr_d");
    cfg.train.batch_size = req_int(t, "train", "batch_size");
    cfg.train.iterations = req_int(t, "train", "iterations");
    cfg.train.seed = req_u64(t, "train", "seed");
    cfg.train.upscale = req_int(t, "train", "upscale");
    cfg.train.image_size = req_int(t, "train", "image_size");
    cfg.train.checkpoint_every = req_int(t, "train", "checkpoint_every");

    const json& d = require(root, "config", "data");
    check_keys(d, "data", {"seed", "count", "hr_size", "mix", "degradation"});
    cfg.data.seed = req_u64(d, "data", "seed");
    cfg.data.count = req_int(d, "data", "count");
    cfg.data.hr_size = req_int(d, "data", "hr_size");
    cfg.data.upscale = cfg.train.upscale;
    if (d.contains("mix")) {
        const json& mix = d["mix"];
        check_keys(mix, "data.mix", {"gradients", "shapes", "sinusoids", "noise"});
        cfg.data.mix_gradients = req_num(mix, "data.mix", "gradients");
        cfg.data.mix_shapes = req_num(mix, "data.mix", "shapes");
        cfg.data.mix_sinusoids = req_num(mix, "data.mix", "sinusoids");
        cfg.data.mix_noise = req_num(mix, "data.mix", "noise");
    }
    if (d.contains("degradation")) {
        const json& deg = d["degradation"];
        if (!deg.is_string() || deg.get<std::string>() != "box")
            throw ConfigError("data.degradation: only \"box\" is supported");
    }

    // resolve model geometry from the training section
    cfg.model.hr_size = cfg.train.image_size;
    cfg.model.upscale = cfg.train.upscale;
    cfg.model.channels = 3;
    cfg.model.t_steps = cfg.schedule.steps;

    cfg.model.validate();
    cfg.schedule.validate();
    cfg.train.validate();
    cfg.data.validate();
    if (cfg.data.hr_size != cfg.train.image_size)
        throw ConfigError(cat("data.hr_size ", cfg.data.hr_size, " does not match train.image_size ",
                              cfg.train.image_size));
    // dry-run the plan so geometry errors surface before any compute
    plan_patches(cfg.model.hr_size, cfg.model.hr_size, cfg.model.levels(), cfg.model.p_min,
                 cfg.model.lr_size(), cfg.model.embed_dim, cfg.model.channels, cfg.model.lr_patch);
    return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(cat(path, ": cannot open config file"));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string RunConfig::to_metadata_json(int64_t iteration) const {
    json meta;
    meta["model"] = {{"embed_dim", model.embed_dim}, {"n_heads", model.n_heads},
                     {"depth_le", model.depth_le},   {"depth_hd", model.depth_hd},
                     {"mlp_ratio", model.mlp_ratio}, {"p_min", model.p_min},
                     {"lr_patch", model.lr_patch},   {"t_steps", model.t_steps},
                     {"hr_size", model.hr_size},     {"upscale", model.upscale},
                     {"channels", model.channels}};
    meta["schedule"] = {{"steps", schedule.steps}, {"alpha_bar", schedule.alpha_bar}};
    meta["iteration"] = iteration;
    meta["seed"] = train.seed;
    return meta.dump();
}

CheckpointMeta parse_checkpoint_metadata(const std::string& json_text) {
    json meta = json::parse(json_text, nullptr, false);
    if (meta.is_discarded()) throw IoError("checkpoint metadata is not valid JSON");
    CheckpointMeta out;
    const json& m = require(meta, "metadata", "model");
    out.model.embed_dim = req_int(m, "metadata.model", "embed_dim");
    out.model.n_heads = req_int(m, "metadata.model", "n_heads");
    out.model.depth_le = req_int(m, "metadata.model", "depth_le");
    out.model.depth_hd = req_int(m, "metadata.model", "depth_hd");
    out.model.mlp_ratio = req_int(m, "metadata.model", "mlp_ratio");
    out.model.p_min = req_int(m, "metadata.model", "p_min");
    out.model.lr_patch = req_int(m, "metadata.model", "lr_patch");
    out.model.t_steps = req_int(m, "metadata.model", "t_steps");
    out.model.hr_size = req_int(m, "metadata.model", "hr_size");
    out.model.upscale = req_int(m, "metadata.model", "upscale");
    out.model.channels = req_int(m, "metadata.model", "channels");
    const json& s = require(meta, "metadata", "schedule");
    out.schedule.steps = req_int(s, "metadata.schedule", "steps");
    for (const auto& v : require(s, "metadata.schedule", "alpha_bar"))
        out.schedule.alpha_bar.push_back(v.get<double>());
    out.iteration = require(meta, "metadata", "iteration").get<int64_t>();
    out.seed = req_u64(meta, "metadata", "seed");
    out.model.validate();
    out.schedule.validate();
    return out;
}

}  // namespace wsdt
