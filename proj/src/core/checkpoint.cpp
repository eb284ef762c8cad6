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

#include "checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace wsdt {

namespace {

constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& out, uint32_t v) {
    uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                    static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, uint64_t v) {
    uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<uint8_t>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

bool get_u32(std::istream& in, uint32_t* v) {
    uint8_t b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) return false;
    *v = static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
    return true;
}

bool get_u64(std::istream& in, uint64_t* v) {
    uint8_t b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) return false;
    *v = 0;
    for (int i = 0; i < 8; ++i) *v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return true;
}

}  // namespace

void save_checkpoint(const std::string& path, const CheckpointData& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(cat(path, ": cannot open for writing"));
    out.write("WSDT", 4);
    put_u32(out, kVersion);
    put_u64(out, data.metadata_json.size());
    out.write(data.metadata_json.data(), static_cast<std::streamsize>(data.metadata_json.size()));
    static_assert(sizeof(float) == 4);
    for (const auto& arr : data.arrays) {
        put_u32(out, static_cast<uint32_t>(arr.name.size()));
        out.write(arr.name.data(), static_cast<std::streamsize>(arr.name.size()));
        put_u32(out, static_cast<uint32_t>(arr.shape.size()));
        int64_t numel = 1;
        for (int64_t e : arr.shape) {
            put_u64(out, static_cast<uint64_t>(e));
            numel *= e;
        }
        if (numel != static_cast<int64_t>(arr.data.size()))
            throw ContractError(cat("checkpoint array ", arr.name, " has ", arr.data.size(),
                                    " values for shape product ", numel));
        out.write(reinterpret_cast<const char*>(arr.data.data()),
                  static_cast<std::streamsize>(arr.data.size() * 4));
    }
    if (!out) throw IoError(cat(path, ": write failed"));
}

CheckpointData load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(cat(path, ": cannot open for reading"));
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "WSDT", 4) != 0)
        throw IoError(cat(path, ": not a checkpoint (bad magic)"));
    uint32_t version = 0;
    if (!get_u32(in, &version)) throw IoError(cat(path, ": truncated header"));
    if (version != kVersion)
        throw IoError(cat(path, ": unsupported checkpoint version ", version));
    uint64_t json_len = 0;
    if (!get_u64(in, &json_len)) throw IoError(cat(path, ": truncated header"));
    CheckpointData data;
    data.metadata_json.resize(json_len);
    in.read(data.metadata_json.data(), static_cast<std::streamsize>(json_len));
    if (!in) throw IoError(cat(path, ": truncated metadata"));

    for (;;) {
        uint32_t name_len = 0;
        if (!get_u32(in, &name_len)) break;  // clean EOF
        NamedArray arr;
        arr.name.resize(name_len);
        in.read(arr.name.data(), name_len);
        uint32_t rank = 0;
        if (!in || !get_u32(in, &rank)) throw IoError(cat(path, ": truncated array header"));
        int64_t numel = 1;
        for (uint32_t i = 0; i < rank; ++i) {
            uint64_t e = 0;
            if (!get_u64(in, &e)) throw IoError(cat(path, ": truncated array shape"));
            arr.shape.push_back(static_cast<int64_t>(e));
            numel *= static_cast<int64_t>(e);
        }
        if (numel < 0 || numel > (int64_t(1) << 34))
            throw IoError(cat(path, ": implausible array size for ", arr.name));
        arr.data.resize(static_cast<size_t>(numel));
        in.read(reinterpret_cast<char*>(arr.data.data()),
                static_cast<std::streamsize>(arr.data.size() * 4));
        if (!in) throw IoError(cat(path, ": truncated array payload for ", arr.name));
        data.arrays.push_back(std::move(arr));
    }
    return data;
}

}  // namespace wsdt
