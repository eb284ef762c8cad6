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

#pragma once

// Command-level orchestration shared by the C API and the test suites.

#include <memory>
#include <string>

#include "config.hpp"
#include "diffusion.hpp"
#include "discriminator.hpp"
#include "image.hpp"
#include "model.hpp"
#include "optimizer.hpp"
#include "trainer.hpp"

namespace wsdt {

/// Deterministic seed offsets for the independent random streams of a run.
enum : uint64_t { kSeedStreamModel = 1, kSeedStreamDisc = 2, kSeedStreamSample = 3 };

/// Discriminator feature width used by the training pipeline.
constexpr int kDiscBaseChannels = 64;

struct LoadedModel {
    ModelConfig cfg;
    NoiseSchedule schedule;
    std::unique_ptr<WsdtModel<float>> model;
    int64_t iteration = 0;
    uint64_t seed = 0;
};

/// Serializes model (+ optional discriminator and optimizer state) into the
/// checkpoint container.
void save_training_checkpoint(const std::string& path, const RunConfig& cfg,
                              WsdtModel<float>& model, Discriminator<float>* disc,
                              Adam<float>* opt_g, Adam<float>* opt_d, int64_t iteration);

/// Loads the generator (discriminator/optimizer arrays are ignored).
LoadedModel load_model_checkpoint(const std::string& path);

/// Restores parameters and optimizer state in place for a resumed run.
/// Throws ConfigError if the checkpoint geometry does not match cfg.
int64_t restore_training_checkpoint(const std::string& path, const RunConfig& cfg,
                                    WsdtModel<float>& model, Discriminator<float>& disc,
                                    Adam<float>& opt_g, Adam<float>& opt_d);

/// Full training command: synthesizes the dataset, runs cfg.train.iterations
/// steps, writes ckpt_NNNNNN.wsdt every checkpoint_every iterations plus
/// model_final.wsdt, and appends one JSON line per iteration to
/// train_log.jsonl in out_dir.
void train_run(const RunConfig& cfg, const std::string& out_dir,
               const std::string& resume_checkpoint = "");

/// Writes the synthetic dataset as hr/NNNN.ppm + lr/NNNN.ppm under out_dir.
void gen_data_run(const RunConfig& cfg, const std::string& out_dir);

/// SR sampling from a checkpoint; lr and the result are [0,1] images.
Image sample_run(const LoadedModel& loaded, const Image& lr_unit, uint64_t seed);

struct EvalResult {
    std::string kv_text;    // key=value lines, one per image plus the means
    std::string json_text;  // the same content as a JSON document
    double mean_psnr = 0, mean_ssim = 0, mean_cons = 0;
    int count = 0;
};

/// Evaluates matching file lists (sorted by name) from three directories.
/// threads > 1 parallelizes per image; results are order-stable.
EvalResult eval_run(const std::string& sr_dir, const std::string& hr_dir,
                    const std::string& lr_dir, int threads);

}  // namespace wsdt
