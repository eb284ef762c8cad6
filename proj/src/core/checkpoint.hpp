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

// Checkpoint container, all integers little-endian:
//
//   "WSDT" | u32 version | u64 json_len | json bytes |
//   repeated arrays: u32 name_len | name | u32 rank | u64 extents... | f32 data
//
// The JSON carries the model/schedule metadata; the array section carries
// parameters and optimizer moments bit-exactly.

#include <cstdint>
#include <string>
#include <vector>

#include "common.hpp"

namespace wsdt {

struct NamedArray {
    std::string name;
    std::vector<int64_t> shape;
    std::vector<float> data;
};

struct CheckpointData {
    std::string metadata_json;
    std::vector<NamedArray> arrays;

    const NamedArray* find(const std::string& name) const {
        for (const auto& a : arrays)
            if (a.name == name) return &a;
        return nullptr;
    }
};

void save_checkpoint(const std::string& path, const CheckpointData& data);
CheckpointData load_checkpoint(const std::string& path);

}  // namespace wsdt
