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

#include <array>
#include <cstdint>
#include <vector>

#include "image.hpp"

namespace wsdt {

/// Deterministic synthetic dataset: HR images drawn from a mix of smooth
/// generator families, LR derived by an exact box-filter downsample.
struct SynthSpec {
    uint64_t seed = 0;
    int count = 0;
    int hr_size = 0;
    int upscale = 0;
    // relative weights of the generator families
    double mix_gradients = 1.0;
    double mix_shapes = 1.0;
    double mix_sinusoids = 1.0;
    double mix_noise = 1.0;

    void validate() const;
};

struct SynthPair {
    Image hr;  // hr_size x hr_size x 3, values in [-1,1]
    Image lr;  // (hr_size/upscale)^2 x 3, exact box mean of hr
};

/// Pair for one dataset index; independent of count, so index ranges can be
/// split into train/holdout sets.
SynthPair generate_synth_one(const SynthSpec& spec, int64_t index);

std::vector<SynthPair> generate_synth(const SynthSpec& spec);

}  // namespace wsdt
