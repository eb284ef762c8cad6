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

#include <cstdint>
#include <string>
#include <vector>

#include "common.hpp"

namespace wsdt {

/// Dense H x W x C float image, row-major with interleaved channels.
/// Pixel range conventions are contextual: file I/O and metrics use [0,1],
/// the model pipeline uses [-1,1].
struct Image {
    int h = 0;
    int w = 0;
    int c = 0;
    std::vector<float> data;

    Image() = default;
    Image(int h_, int w_, int c_) : h(h_), w(w_), c(c_), data(static_cast<size_t>(h_) * w_ * c_, 0.f) {}

    float& at(int y, int x, int ch) { return data[(static_cast<size_t>(y) * w + x) * c + ch]; }
    float at(int y, int x, int ch) const { return data[(static_cast<size_t>(y) * w + x) * c + ch]; }
    size_t size() const { return data.size(); }
};

/// Reads a binary PPM (P6) or PGM (P5) with maxval 255. Pixels map to [0,1].
Image read_pnm(const std::string& path);

/// Writes PPM for 3-channel images, PGM for 1-channel. Values are clamped to
/// [0,1] and rounded to 8 bits.
void write_pnm(const Image& img, const std::string& path);

/// Raw f32 spectrum sidecar: dims + levels header followed by the exact
/// float payload, for lossless inversion of a decomposed image.
void write_spectrum_sidecar(const Image& spectrum, int levels, const std::string& path);
Image read_spectrum_sidecar(const std::string& path, int* levels_out);

/// Box-filter downsample by an integer factor (mean over n x n blocks).
Image box_downsample(const Image& img, int factor);

/// Nearest/replication upsample by an integer factor (adjoint layout of the
/// box filter; used as the reference baseline).
Image box_upsample(const Image& img, int factor);

/// Range conversions between the file/metric domain and the model domain.
Image to_signed_range(const Image& img);    // [0,1] -> [-1,1]
Image to_unit_range(const Image& img);      // [-1,1] -> [0,1], clamped

}  // namespace wsdt
