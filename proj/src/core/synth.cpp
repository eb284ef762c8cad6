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

#include "synth.hpp"

#include <algorithm>
#include <cmath>

#include "rng.hpp"

namespace wsdt {

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

void clamp_signed(Image& img) {
    for (auto& v : img.data) v = std::min(1.0f, std::max(-1.0f, v));
}

/// Smooth linear ramp shared by every family as background.
void paint_gradient(Image& img, Rng& rng, double slope_lo, double slope_hi) {
    double base = rng.uniform(-0.4, 0.4);
    double theta = rng.uniform(0.0, kTau);
    double s = rng.uniform(slope_lo, slope_hi);
    double sx = s * std::cos(theta), sy = s * std::sin(theta);
    double tint[3], jitter[3];
    for (int ch = 0; ch < 3; ++ch) {
        tint[ch] = rng.uniform(-0.15, 0.15);
        jitter[ch] = rng.uniform(0.85, 1.15);
    }
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x) {
            double u = static_cast<double>(x) / (img.w - 1) - 0.5;
            double v = static_cast<double>(y) / (img.h - 1) - 0.5;
            double g = sx * u + sy * v;
            for (int ch = 0; ch < 3; ++ch)
                img.at(y, x, ch) = static_cast<float>(base + tint[ch] + jitter[ch] * g);
        }
}

/// Anti-aliased shapes via 4x4 coverage supersampling.
void paint_shapes(Image& img, Rng& rng) {
    int n_shapes = 1 + static_cast<int>(rng.below(3));
    for (int k = 0; k < n_shapes; ++k) {
        bool ellipse = rng.uniform() < 0.5;
        double cx = rng.uniform(0.15, 0.85) * img.w;
        double cy = rng.uniform(0.15, 0.85) * img.h;
        double rx = rng.uniform(0.08, 0.32) * img.w;
        double ry = rng.uniform(0.08, 0.32) * img.h;
        double theta = rng.uniform(0.0, kTau);
        double ct = std::cos(theta), st = std::sin(theta);
        double color[3];
        for (int ch = 0; ch < 3; ++ch) color[ch] = rng.uniform(-0.85, 0.85);
        auto inside = [&](double px, double py) {
            double dx = px - cx, dy = py - cy;
            double u = (ct * dx + st * dy) / rx;
            double v = (-st * dx + ct * dy) / ry;
            return ellipse ? (u * u + v * v <= 1.0)
                           : (std::abs(u) <= 1.0 && std::abs(v) <= 1.0);
        };
        for (int y = 0; y < img.h; ++y)
            for (int x = 0; x < img.w; ++x) {
                int hits = 0;
                for (int sy = 0; sy < 4; ++sy)
                    for (int sx = 0; sx < 4; ++sx)
                        if (inside(x + (sx + 0.5) / 4.0, y + (sy + 0.5) / 4.0)) ++hits;
                if (hits == 0) continue;
                float a = static_cast<float>(hits) / 16.0f;
                for (int ch = 0; ch < 3; ++ch)
                    img.at(y, x, ch) =
                        img.at(y, x, ch) * (1.0f - a) + static_cast<float>(color[ch]) * a;
            }
    }
}

void paint_sinusoid(Image& img, Rng& rng) {
    double amp = rng.uniform(0.25, 0.55);
    // periods stay above the LR Nyquist limit so textures survive the
    // box-filter degradation
    double period = rng.uniform(18.0, 48.0);
    double theta = rng.uniform(0.0, kTau);
    double phase = rng.uniform(0.0, kTau);
    double kx = std::cos(theta) / period, ky = std::sin(theta) / period;
    double gain[3];
    for (int ch = 0; ch < 3; ++ch) gain[ch] = rng.uniform(0.7, 1.0);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x) {
            double s = amp * std::sin(kTau * (kx * x + ky * y) + phase);
            for (int ch = 0; ch < 3; ++ch)
                img.at(y, x, ch) += static_cast<float>(gain[ch] * s);
        }
}

/// Smooth random field: coarse white noise, bilinearly upsampled.
void paint_bandlimited_noise(Image& img, Rng& rng) {
    int grid = std::max(4, img.h / 8);
    double amp = rng.uniform(0.10, 0.25);
    std::vector<double> field(static_cast<size_t>(grid + 1) * (grid + 1));
    for (auto& v : field) v = rng.normal();
    double gain[3];
    for (int ch = 0; ch < 3; ++ch) gain[ch] = rng.uniform(0.6, 1.0);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x) {
            double fy = static_cast<double>(y) / img.h * grid;
            double fx = static_cast<double>(x) / img.w * grid;
            int iy = static_cast<int>(fy), ix = static_cast<int>(fx);
            double ty = fy - iy, tx = fx - ix;
            double v00 = field[iy * (grid + 1) + ix];
            double v01 = field[iy * (grid + 1) + ix + 1];
            double v10 = field[(iy + 1) * (grid + 1) + ix];
            double v11 = field[(iy + 1) * (grid + 1) + ix + 1];
            double v = (1 - ty) * ((1 - tx) * v00 + tx * v01) + ty * ((1 - tx) * v10 + tx * v11);
            for (int ch = 0; ch < 3; ++ch)
                img.at(y, x, ch) += static_cast<float>(amp * gain[ch] * v);
        }
}

}  // namespace

void SynthSpec::validate() const {
    if (count < 0) throw ConfigError(cat("synth count must be >= 0, got ", count));
    if (hr_size < 4) throw ConfigError(cat("synth hr_size must be >= 4, got ", hr_size));
    if (upscale < 2) throw ConfigError(cat("synth upscale must be >= 2, got ", upscale));
    if (hr_size % upscale != 0)
        throw ConfigError(cat("synth hr_size ", hr_size, " not divisible by upscale ", upscale));
    if (mix_gradients < 0 || mix_shapes < 0 || mix_sinusoids < 0 || mix_noise < 0)
        throw ConfigError("synth mix weights must be >= 0");
    if (mix_gradients + mix_shapes + mix_sinusoids + mix_noise <= 0)
        throw ConfigError("synth mix weights sum to zero");
}

SynthPair generate_synth_one(const SynthSpec& spec, int64_t index) {
    spec.validate();
    Rng rng = Rng(spec.seed).fork(static_cast<uint64_t>(index));
    Image hr(spec.hr_size, spec.hr_size, 3);

    double w[4] = {spec.mix_gradients, spec.mix_shapes, spec.mix_sinusoids, spec.mix_noise};
    double total = w[0] + w[1] + w[2] + w[3];
    double pick = rng.uniform() * total;
    int family = 0;
    for (; family < 3; ++family) {
        if (pick < w[family]) break;
        pick -= w[family];
    }

    switch (family) {
        case 0:
            paint_gradient(hr, rng, 0.5, 1.2);
            break;
        case 1:
            paint_gradient(hr, rng, 0.2, 0.6);
            paint_shapes(hr, rng);
            break;
        case 2:
            paint_gradient(hr, rng, 0.2, 0.6);
            paint_sinusoid(hr, rng);
            break;
        default:
            paint_gradient(hr, rng, 0.3, 0.8);
            paint_bandlimited_noise(hr, rng);
            break;
    }
    clamp_signed(hr);

    SynthPair pair;
    pair.lr = box_downsample(hr, spec.upscale);
    pair.hr = std::move(hr);
    return pair;
}

std::vector<SynthPair> generate_synth(const SynthSpec& spec) {
    spec.validate();
    std::vector<SynthPair> out;
    out.reserve(static_cast<size_t>(spec.count));
    for (int64_t i = 0; i < spec.count; ++i) out.push_back(generate_synth_one(spec, i));
    return out;
}

}  // namespace wsdt
