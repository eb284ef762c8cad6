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

#include <string>

#include "diffusion.hpp"
#include "model.hpp"
#include "synth.hpp"
#include "trainer.hpp"

namespace wsdt {

/// A fully validated run configuration. The JSON schema is strict: every
/// field is required (except data.mix and data.degradation), unknown keys
/// are rejected, and geometry consistency is checked before any compute.
struct RunConfig {
    ModelConfig model;  // resolved: includes geometry and t_steps
    NoiseSchedule schedule;
    TrainConfig train;
    SynthSpec data;

    static RunConfig parse(const std::string& json_text);
    static RunConfig parse_file(const std::string& path);

    /// Metadata block embedded in checkpoints.
    std::string to_metadata_json(int64_t iteration) const;
};

/// Rebuilds ModelConfig + schedule (+ iteration, seed) from checkpoint
/// metadata.
struct CheckpointMeta {
    ModelConfig model;
    NoiseSchedule schedule;
    int64_t iteration = 0;
    uint64_t seed = 0;
};
CheckpointMeta parse_checkpoint_metadata(const std::string& json_text);

}  // namespace wsdt
