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

#include "runner.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "checkpoint.hpp"
#include "metrics.hpp"

namespace wsdt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void append_store_arrays(CheckpointData& data, const ParamStore<float>& store,
                         const std::string& prefix) {
    for (const auto& [name, t] : store.entries())
        data.arrays.push_back({prefix + name, t.shape(), t.values()});
}

void append_adam_arrays(CheckpointData& data, Adam<float>& opt, const ParamStore<float>& store,
                        const std::string& prefix) {
    const auto& entries = store.entries();
    for (size_t i = 0; i < entries.size(); ++i) {
        data.arrays.push_back({prefix + "m." + entries[i].first, entries[i].second.shape(),
                               opt.moments_m()[i]});
        data.arrays.push_back({prefix + "v." + entries[i].first, entries[i].second.shape(),
                               opt.moments_v()[i]});
    }
    data.arrays.push_back(
        {prefix + "steps", {1}, {static_cast<float>(opt.step_count())}});
}

void load_store_arrays(const CheckpointData& data, ParamStore<float>& store,
                       const std::string& prefix) {
    for (const auto& [name, handle] : store.entries()) {
        const NamedArray* arr = data.find(prefix + name);
        if (!arr) throw IoError(cat("checkpoint is missing array ", prefix, name));
        if (arr->shape != handle.shape())
            throw ConfigError(cat("checkpoint array ", prefix, name, " has shape ",
                                  shape_str(arr->shape), ", expected ",
                                  shape_str(handle.shape())));
        Tensor<float> t = handle;  // shared node
        t.mutable_values() = arr->data;
    }
}

void load_adam_arrays(const CheckpointData& data, Adam<float>& opt,
                      const ParamStore<float>& store, const std::string& prefix) {
    const auto& entries = store.entries();
    for (size_t i = 0; i < entries.size(); ++i) {
        const NamedArray* m = data.find(prefix + "m." + entries[i].first);
        const NamedArray* v = data.find(prefix + "v." + entries[i].first);
        if (!m || !v)
            throw IoError(cat("checkpoint is missing optimizer state for ", entries[i].first));
        opt.moments_m()[i] = m->data;
        opt.moments_v()[i] = v->data;
    }
    const NamedArray* steps = data.find(prefix + "steps");
    if (!steps || steps->data.size() != 1)
        throw IoError("checkpoint is missing optimizer step counter");
    opt.set_step_count(static_cast<int64_t>(steps->data[0]));
}

std::vector<fs::path> list_images(const std::string& dir) {
    if (!fs::is_directory(dir)) throw IoError(cat(dir, ": not a directory"));
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension().string();
        if (ext == ".ppm" || ext == ".pgm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::string format_double(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

}  // namespace

void save_training_checkpoint(const std::string& path, const RunConfig& cfg,
                              WsdtModel<float>& model, Discriminator<float>* disc,
                              Adam<float>* opt_g, Adam<float>* opt_d, int64_t iteration) {
    CheckpointData data;
    data.metadata_json = cfg.to_metadata_json(iteration);
    append_store_arrays(data, model.params(), "gen.");
    if (disc) append_store_arrays(data, disc->params(), "disc.");
    if (opt_g) append_adam_arrays(data, *opt_g, model.params(), "adam_g.");
    if (opt_d && disc) append_adam_arrays(data, *opt_d, disc->params(), "adam_d.");
    save_checkpoint(path, data);
}

LoadedModel load_model_checkpoint(const std::string& path) {
    CheckpointData data = load_checkpoint(path);
    CheckpointMeta meta = parse_checkpoint_metadata(data.metadata_json);
    LoadedModel out;
    out.cfg = meta.model;
    out.schedule = meta.schedule;
    out.iteration = meta.iteration;
    out.seed = meta.seed;
    out.model = std::make_unique<WsdtModel<float>>(meta.model, meta.seed + kSeedStreamModel);
    load_store_arrays(data, out.model->params(), "gen.");
    return out;
}

int64_t restore_training_checkpoint(const std::string& path, const RunConfig& cfg,
                                    WsdtModel<float>& model, Discriminator<float>& disc,
                                    Adam<float>& opt_g, Adam<float>& opt_d) {
    CheckpointData data = load_checkpoint(path);
    CheckpointMeta meta = parse_checkpoint_metadata(data.metadata_json);
    if (meta.model.embed_dim != cfg.model.embed_dim || meta.model.n_heads != cfg.model.n_heads ||
        meta.model.depth_le != cfg.model.depth_le || meta.model.depth_hd != cfg.model.depth_hd ||
        meta.model.mlp_ratio != cfg.model.mlp_ratio || meta.model.p_min != cfg.model.p_min ||
        meta.model.lr_patch != cfg.model.lr_patch || meta.model.t_steps != cfg.model.t_steps ||
        meta.model.hr_size != cfg.model.hr_size || meta.model.upscale != cfg.model.upscale ||
        meta.model.channels != cfg.model.channels)
        throw ConfigError("checkpoint model geometry does not match the run configuration");
    load_store_arrays(data, model.params(), "gen.");
    load_store_arrays(data, disc.params(), "disc.");
    load_adam_arrays(data, opt_g, model.params(), "adam_g.");
    load_adam_arrays(data, opt_d, disc.params(), "adam_d.");
    return meta.iteration;
}

void train_run(const RunConfig& cfg, const std::string& out_dir,
               const std::string& resume_checkpoint) {
    fs::create_directories(out_dir);
    std::vector<SynthPair> dataset = generate_synth(cfg.data);

    WsdtModel<float> model(cfg.model, cfg.train.seed + kSeedStreamModel);
    Discriminator<float> disc(cfg.model.hr_size, cfg.model.channels, cfg.model.t_steps,
                              kDiscBaseChannels, cfg.train.seed + kSeedStreamDisc);
    Trainer trainer(model, disc, cfg.schedule, cfg.train, dataset);

    if (!resume_checkpoint.empty()) {
        int64_t it = restore_training_checkpoint(resume_checkpoint, cfg, model, disc,
                                                 trainer.opt_g(), trainer.opt_d());
        trainer.set_iteration(it);
    }

    std::ofstream log(fs::path(out_dir) / "train_log.jsonl", std::ios::app);
    if (!log) throw IoError(cat(out_dir, ": cannot open train_log.jsonl"));

    auto checkpoint_path = [&](int64_t it) {
        char name[32];
        std::snprintf(name, sizeof(name), "ckpt_%06lld.wsdt", static_cast<long long>(it));
        return (fs::path(out_dir) / name).string();
    };

    while (trainer.iteration() < cfg.train.iterations) {
        StepStats stats = trainer.step();
        json line = {{"iteration", stats.iteration},
                     {"l_d", stats.l_d},
                     {"l_adv_g", stats.l_adv_g},
                     {"l_pixel", stats.l_pixel},
                     {"l_fre", stats.l_fre}};
        log << line.dump() << "\n";
        log.flush();
        if (stats.iteration % cfg.train.checkpoint_every == 0)
            save_training_checkpoint(checkpoint_path(stats.iteration), cfg, model, &disc,
                                     &trainer.opt_g(), &trainer.opt_d(), stats.iteration);
    }
    save_training_checkpoint((fs::path(out_dir) / "model_final.wsdt").string(), cfg, model, &disc,
                             &trainer.opt_g(), &trainer.opt_d(), trainer.iteration());
}

void gen_data_run(const RunConfig& cfg, const std::string& out_dir) {
    fs::create_directories(fs::path(out_dir) / "hr");
    fs::create_directories(fs::path(out_dir) / "lr");
    for (int i = 0; i < cfg.data.count; ++i) {
        SynthPair pair = generate_synth_one(cfg.data, i);
        char name[32];
        std::snprintf(name, sizeof(name), "%04d.ppm", i);
        write_pnm(to_unit_range(pair.hr), (fs::path(out_dir) / "hr" / name).string());
        write_pnm(to_unit_range(pair.lr), (fs::path(out_dir) / "lr" / name).string());
    }
}

Image sample_run(const LoadedModel& loaded, const Image& lr_unit, uint64_t seed) {
    const ModelConfig& mc = loaded.cfg;
    if (lr_unit.h != mc.lr_size() || lr_unit.w != mc.lr_size() || lr_unit.c != mc.channels)
        throw ConfigError(cat("sample: LR image ", lr_unit.h, "x", lr_unit.w, "x", lr_unit.c,
                              " does not match checkpoint geometry ", mc.lr_size(), "x",
                              mc.lr_size(), "x", mc.channels));
    Image lr_signed = to_signed_range(lr_unit);
    Tensor<float> lr =
        Tensor<float>::from({lr_signed.h, lr_signed.w, lr_signed.c}, lr_signed.data);
    Rng rng = Rng(seed).fork(kSeedStreamSample);
    std::vector<float> sr = sr_sample(*loaded.model, lr, loaded.schedule, rng);
    Image out(mc.hr_size, mc.hr_size, mc.channels);
    out.data = std::move(sr);
    return to_unit_range(out);
}

EvalResult eval_run(const std::string& sr_dir, const std::string& hr_dir,
                    const std::string& lr_dir, int threads) {
    std::vector<fs::path> sr_files = list_images(sr_dir);
    std::vector<fs::path> hr_files = list_images(hr_dir);
    std::vector<fs::path> lr_files = list_images(lr_dir);
    if (sr_files.empty()) throw ConfigError(cat(sr_dir, ": no .ppm/.pgm images found"));
    if (sr_files.size() != hr_files.size() || sr_files.size() != lr_files.size())
        throw ConfigError(cat("eval: image counts differ (sr=", sr_files.size(),
                              ", hr=", hr_files.size(), ", lr=", lr_files.size(), ")"));

    const size_t n = sr_files.size();
    std::vector<MetricReport> reports(n);
    std::vector<std::string> errors(n);
    threads = std::max(1, std::min<int>(threads, static_cast<int>(n)));

    auto worker = [&](size_t begin, size_t step) {
        for (size_t i = begin; i < n; i += step) {
            try {
                Image sr = read_pnm(sr_files[i].string());
                Image hr = read_pnm(hr_files[i].string());
                Image lr = read_pnm(lr_files[i].string());
                reports[i].psnr = psnr(sr, hr);
                reports[i].ssim = ssim(sr, hr);
                reports[i].cons = consistency(sr, lr);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    if (threads == 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < threads; ++k) pool.emplace_back(worker, static_cast<size_t>(k), threads);
        for (auto& th : pool) th.join();
    }
    for (size_t i = 0; i < n; ++i)
        if (!errors[i].empty())
            throw ConfigError(cat("eval: ", sr_files[i].filename().string(), ": ", errors[i]));

    EvalResult res;
    res.count = static_cast<int>(n);
    std::string kv;
    json per_image = json::array();
    for (size_t i = 0; i < n; ++i) {
        std::string name = sr_files[i].filename().string();
        kv += cat("image=", name, " psnr=", format_double("%.4f", reports[i].psnr),
                  " ssim=", format_double("%.6f", reports[i].ssim),
                  " cons=", format_double("%.4f", reports[i].cons), "\n");
        per_image.push_back({{"name", name},
                             {"psnr", reports[i].psnr},
                             {"ssim", reports[i].ssim},
                             {"cons", reports[i].cons}});
        res.mean_psnr += reports[i].psnr;
        res.mean_ssim += reports[i].ssim;
        res.mean_cons += reports[i].cons;
    }
    res.mean_psnr /= static_cast<double>(n);
    res.mean_ssim /= static_cast<double>(n);
    res.mean_cons /= static_cast<double>(n);
    kv += cat("count=", n, "\n");
    kv += cat("mean_psnr=", format_double("%.4f", res.mean_psnr), "\n");
    kv += cat("mean_ssim=", format_double("%.6f", res.mean_ssim), "\n");
    kv += cat("mean_cons=", format_double("%.4f", res.mean_cons), "\n");
    res.kv_text = std::move(kv);
    json doc = {{"count", res.count},
                {"images", per_image},
                {"mean", {{"psnr", res.mean_psnr}, {"ssim", res.mean_ssim}, {"cons", res.mean_cons}}}};
    res.json_text = doc.dump(2);
    return res;
}

}  // namespace wsdt
