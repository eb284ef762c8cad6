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

#include "image.hpp"

namespace wsdt {

struct MetricReport {
    double psnr = 0;
    double ssim = 0;
    double cons = 0;
};

/// Peak signal-to-noise ratio in dB for images in [0,1]. Identical images
/// (and anything past it) report the 100 dB cap.
double psnr(const Image& a, const Image& b);

/// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, L = 1, valid-window positions only. Multi-channel images score
/// the mean over per-channel SSIM.
double ssim(const Image& a, const Image& b);

/// Consistency score: MSE between the box-downsampled SR image and the LR
/// input, reported in units of 1e-5 (images in [0,1]). The downsampling
/// factor is derived from the image geometry.
double consistency(const Image& sr, const Image& lr);

}  // namespace wsdt
