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

#include "image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace wsdt {

namespace {

// Skips whitespace and '#' comment lines between PNM header tokens.
int next_header_int(std::istream& in, const std::string& path) {
    for (;;) {
        int ch = in.peek();
        if (ch == EOF) throw IoError(cat(path, ": truncated PNM header"));
        if (ch == '#') {
            std::string line;
            std::getline(in, line);
            continue;
        }
        if (std::isspace(ch)) {
            in.get();
            continue;
        }
        break;
    }
    int value = 0;
    in >> value;
    if (!in) throw IoError(cat(path, ": malformed PNM header"));
    return value;
}

uint8_t to_byte(float v) {
    float clamped = std::min(1.0f, std::max(0.0f, v));
    return static_cast<uint8_t>(std::lround(clamped * 255.0f));
}

void write_u32(std::ostream& out, uint32_t v) {
    uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                    static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::istream& in, const std::string& path) {
    uint8_t b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw IoError(cat(path, ": truncated sidecar"));
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

}  // namespace

Image read_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(cat(path, ": cannot open for reading"));
    char magic[2];
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6'))
        throw IoError(cat(path, ": unsupported format, expected binary PPM (P6) or PGM (P5)"));
    int channels = magic[1] == '6' ? 3 : 1;
    int w = next_header_int(in, path);
    int h = next_header_int(in, path);
    int maxval = next_header_int(in, path);
    if (w <= 0 || h <= 0) throw IoError(cat(path, ": invalid dimensions ", w, "x", h));
    if (maxval != 255) throw IoError(cat(path, ": only maxval 255 is supported, got ", maxval));
    in.get();  // single whitespace after maxval

    Image img(h, w, channels);
    std::vector<uint8_t> raw(img.size());
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!in) throw IoError(cat(path, ": truncated pixel data"));
    for (size_t i = 0; i < raw.size(); ++i) img.data[i] = static_cast<float>(raw[i]) / 255.0f;
    return img;
}

void write_pnm(const Image& img, const std::string& path) {
    if (img.c != 1 && img.c != 3)
        throw DimensionError(cat("write_pnm: unsupported channel count ", img.c));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(cat(path, ": cannot open for writing"));
    out << (img.c == 3 ? "P6" : "P5") << "\n" << img.w << " " << img.h << "\n255\n";
    std::vector<uint8_t> raw(img.size());
    for (size_t i = 0; i < raw.size(); ++i) raw[i] = to_byte(img.data[i]);
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw IoError(cat(path, ": write failed"));
}

void write_spectrum_sidecar(const Image& spectrum, int levels, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(cat(path, ": cannot open for writing"));
    out.write("WSPC", 4);
    write_u32(out, 1);  // format version
    write_u32(out, static_cast<uint32_t>(spectrum.h));
    write_u32(out, static_cast<uint32_t>(spectrum.w));
    write_u32(out, static_cast<uint32_t>(spectrum.c));
    write_u32(out, static_cast<uint32_t>(levels));
    static_assert(sizeof(float) == 4);
    out.write(reinterpret_cast<const char*>(spectrum.data.data()),
              static_cast<std::streamsize>(spectrum.size() * 4));
    if (!out) throw IoError(cat(path, ": write failed"));
}

Image read_spectrum_sidecar(const std::string& path, int* levels_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(cat(path, ": cannot open for reading"));
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "WSPC", 4) != 0)
        throw IoError(cat(path, ": not a spectrum sidecar (bad magic)"));
    uint32_t version = read_u32(in, path);
    if (version != 1) throw IoError(cat(path, ": unsupported sidecar version ", version));
    int h = static_cast<int>(read_u32(in, path));
    int w = static_cast<int>(read_u32(in, path));
    int c = static_cast<int>(read_u32(in, path));
    int levels = static_cast<int>(read_u32(in, path));
    if (h <= 0 || w <= 0 || c <= 0 || levels <= 0)
        throw IoError(cat(path, ": invalid sidecar header ", h, "x", w, "x", c, " J=", levels));
    Image img(h, w, c);
    in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.size() * 4));
    if (!in) throw IoError(cat(path, ": truncated sidecar payload"));
    if (levels_out) *levels_out = levels;
    return img;
}

Image box_downsample(const Image& img, int factor) {
    if (factor < 1 || img.h % factor != 0 || img.w % factor != 0)
        throw DimensionError(cat("box_downsample: ", img.h, "x", img.w,
                                 " not divisible by factor ", factor));
    Image out(img.h / factor, img.w / factor, img.c);
    float inv = 1.0f / static_cast<float>(factor * factor);
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x)
            for (int ch = 0; ch < img.c; ++ch) {
                float acc = 0.f;
                for (int dy = 0; dy < factor; ++dy)
                    for (int dx = 0; dx < factor; ++dx)
                        acc += img.at(y * factor + dy, x * factor + dx, ch);
                out.at(y, x, ch) = acc * inv;
            }
    return out;
}

Image box_upsample(const Image& img, int factor) {
    if (factor < 1) throw DimensionError(cat("box_upsample: invalid factor ", factor));
    Image out(img.h * factor, img.w * factor, img.c);
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x)
            for (int ch = 0; ch < img.c; ++ch)
                out.at(y, x, ch) = img.at(y / factor, x / factor, ch);
    return out;
}

Image to_signed_range(const Image& img) {
    Image out = img;
    for (auto& v : out.data) v = v * 2.0f - 1.0f;
    return out;
}

Image to_unit_range(const Image& img) {
    Image out = img;
    for (auto& v : out.data) v = std::min(1.0f, std::max(0.0f, (v + 1.0f) * 0.5f));
    return out;
}

}  // namespace wsdt
