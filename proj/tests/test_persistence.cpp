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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "core/checkpoint.hpp"
#include "core/config.hpp"
#include "core/runner.hpp"

using namespace wsdt;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("wsdt_persist_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

const char* kValidConfig = R"({
  "model": {"embed_dim": 32, "n_heads": 2, "depth_le": 1, "depth_hd": 1,
            "mlp_ratio": 2, "p_min": 2, "lr_patch": 2},
  "schedule": {"steps": 4, "alpha_bar": [0.9801, 0.64, 0.16, 0.01]},
  "train": {"alpha": 1.0, "beta": 1.0, "gamma": 1.0, "lr_g": 2e-4, "lr_d": 2e-4,
            "batch_size": 2, "iterations": 4, "seed": 5, "upscale": 4,
            "image_size": 16, "checkpoint_every": 2},
  "data": {"seed": 9, "count": 4, "hr_size": 16}
})";

}  // namespace

TEST_CASE("checkpoint round trip is bit-exact") {
    TempDir tmp;
    CheckpointData data;
    data.metadata_json = R"({"k":"v"})";
    Rng rng(2);
    NamedArray a{"gen.w", {3, 4}, {}};
    for (int i = 0; i < 12; ++i) a.data.push_back(static_cast<float>(rng.normal()));
    NamedArray b{"adam_m.w", {2, 2, 3}, {}};
    for (int i = 0; i < 12; ++i) b.data.push_back(static_cast<float>(rng.normal()));
    data.arrays = {a, b};
    save_checkpoint(tmp.file("x.wsdt"), data);

    CheckpointData back = load_checkpoint(tmp.file("x.wsdt"));
    CHECK(back.metadata_json == data.metadata_json);
    REQUIRE(back.arrays.size() == 2);
    CHECK(back.arrays[0].name == "gen.w");
    CHECK(back.arrays[0].shape == a.shape);
    CHECK(back.arrays[0].data == a.data);
    CHECK(back.arrays[1].data == b.data);
    CHECK(back.find("adam_m.w") != nullptr);
    CHECK(back.find("nope") == nullptr);
}

TEST_CASE("checkpoint rejects foreign files") {
    TempDir tmp;
    std::ofstream out(tmp.file("junk.wsdt"), std::ios::binary);
    out << "JUNKJUNKJUNK";
    out.close();
    CHECK_THROWS_AS(load_checkpoint(tmp.file("junk.wsdt")), IoError);
    CHECK_THROWS_AS(load_checkpoint(tmp.file("missing.wsdt")), IoError);
}

TEST_CASE("run config parses and validates") {
    RunConfig cfg = RunConfig::parse(kValidConfig);
    CHECK(cfg.model.embed_dim == 32);
    CHECK(cfg.model.hr_size == 16);
    CHECK(cfg.model.upscale == 4);
    CHECK(cfg.model.t_steps == 4);
    CHECK(cfg.model.levels() == 2);
    CHECK(cfg.data.upscale == 4);
    CHECK(cfg.train.iterations == 4);
}

TEST_CASE("run config rejects malformed documents") {
    CHECK_THROWS_AS(RunConfig::parse("not json"), ConfigError);

    SUBCASE("unknown keys anywhere") {
        std::string s = kValidConfig;
        s.replace(s.find("\"embed_dim\""), 11, "\"embedd_dim\"");
        CHECK_THROWS_WITH_AS(RunConfig::parse(s), doctest::Contains("unknown config key"),
                             ConfigError);
    }
    SUBCASE("missing fields are named") {
        std::string s = kValidConfig;
        s.replace(s.find("\"lr_g\": 2e-4,"), 13, "");
        CHECK_THROWS_WITH_AS(RunConfig::parse(s), doctest::Contains("train.lr_g"), ConfigError);
    }
    SUBCASE("cross-field validation") {
        std::string s = kValidConfig;
        s.replace(s.find("\"hr_size\": 16"), 13, "\"hr_size\": 32");
        CHECK_THROWS_AS(RunConfig::parse(s), ConfigError);
    }
    SUBCASE("schedule endpoints") {
        std::string s = kValidConfig;
        s.replace(s.find("0.9801"), 6, "0.9000");
        CHECK_THROWS_AS(RunConfig::parse(s), ConfigError);
    }
}

TEST_CASE("checkpoint metadata round trip") {
    RunConfig cfg = RunConfig::parse(kValidConfig);
    std::string meta = cfg.to_metadata_json(123);
    CheckpointMeta back = parse_checkpoint_metadata(meta);
    CHECK(back.model.embed_dim == cfg.model.embed_dim);
    CHECK(back.model.hr_size == cfg.model.hr_size);
    CHECK(back.schedule.alpha_bar == cfg.schedule.alpha_bar);
    CHECK(back.iteration == 123);
    CHECK(back.seed == cfg.train.seed);
}

TEST_CASE("model checkpoints restore parameters bit-exactly") {
    TempDir tmp;
    RunConfig cfg = RunConfig::parse(kValidConfig);
    WsdtModel<float> model(cfg.model, cfg.train.seed + kSeedStreamModel);
    Rng rng(8);
    model.params().randomize_all(rng, 0.1);
    save_training_checkpoint(tmp.file("m.wsdt"), cfg, model, nullptr, nullptr, nullptr, 7);

    LoadedModel loaded = load_model_checkpoint(tmp.file("m.wsdt"));
    CHECK(loaded.iteration == 7);
    CHECK(loaded.cfg.embed_dim == cfg.model.embed_dim);
    const auto& src = model.params().entries();
    const auto& dst = loaded.model->params().entries();
    REQUIRE(src.size() == dst.size());
    for (size_t i = 0; i < src.size(); ++i) {
        CHECK(src[i].first == dst[i].first);
        CHECK(src[i].second.values() == dst[i].second.values());
    }
}

TEST_CASE("training checkpoint resume restores optimizer state") {
    TempDir tmp;
    RunConfig cfg = RunConfig::parse(kValidConfig);
    WsdtModel<float> model(cfg.model, 1);
    Discriminator<float> disc(cfg.model.hr_size, 3, cfg.model.t_steps, 8, 2);
    Adam<float> opt_g = Adam<float>::for_store(model.params(), 1e-3);
    Adam<float> opt_d = Adam<float>::for_store(disc.params(), 1e-3);
    opt_g.set_step_count(17);
    Rng rng(3);
    for (auto& m : opt_g.moments_m())
        for (auto& v : m) v = static_cast<float>(rng.normal());
    save_training_checkpoint(tmp.file("t.wsdt"), cfg, model, &disc, &opt_g, &opt_d, 42);

    WsdtModel<float> model2(cfg.model, 99);  // different init, will be overwritten
    Discriminator<float> disc2(cfg.model.hr_size, 3, cfg.model.t_steps, 8, 98);
    Adam<float> og2 = Adam<float>::for_store(model2.params(), 1e-3);
    Adam<float> od2 = Adam<float>::for_store(disc2.params(), 1e-3);
    int64_t it = restore_training_checkpoint(tmp.file("t.wsdt"), cfg, model2, disc2, og2, od2);
    CHECK(it == 42);
    CHECK(og2.step_count() == 17);
    CHECK(og2.moments_m() == opt_g.moments_m());
    CHECK(model2.params().entries()[3].second.values() ==
          model.params().entries()[3].second.values());

    // geometry mismatch is rejected
    RunConfig other = cfg;
    other.model.embed_dim = 64;
    WsdtModel<float> model3(other.model, 1);
    Discriminator<float> disc3(other.model.hr_size, 3, other.model.t_steps, 8, 2);
    Adam<float> og3 = Adam<float>::for_store(model3.params(), 1e-3);
    Adam<float> od3 = Adam<float>::for_store(disc3.params(), 1e-3);
    CHECK_THROWS_AS(restore_training_checkpoint(tmp.file("t.wsdt"), other, model3, disc3, og3, od3),
                    ConfigError);
}
