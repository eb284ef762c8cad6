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

#include "tokenizer.hpp"

#include <cmath>

namespace wsdt {

namespace {

// Gather map for patch extraction: token-major, patch values in (py, px, ch)
// order, source treated as [src_h, src_w, c] row-major.
std::shared_ptr<std::vector<int64_t>> build_index_map(const BandRect& rect, int patch, int grid_h,
                                                      int grid_w, int src_w, int c) {
    auto map = std::make_shared<std::vector<int64_t>>();
    map->reserve(static_cast<size_t>(grid_h) * grid_w * patch * patch * c);
    for (int gy = 0; gy < grid_h; ++gy)
        for (int gx = 0; gx < grid_w; ++gx)
            for (int py = 0; py < patch; ++py)
                for (int px = 0; px < patch; ++px)
                    for (int ch = 0; ch < c; ++ch) {
                        int64_t y = rect.y + static_cast<int64_t>(gy) * patch + py;
                        int64_t x = rect.x + static_cast<int64_t>(gx) * patch + px;
                        map->push_back((y * src_w + x) * c + ch);
                    }
    return map;
}

std::shared_ptr<std::vector<double>> build_pos_encodings(const TokenStream& s, int embed_dim) {
    auto enc = std::make_shared<std::vector<double>>();
    enc->reserve(static_cast<size_t>(s.tokens()) * embed_dim);
    for (int gy = 0; gy < s.grid_h; ++gy)
        for (int gx = 0; gx < s.grid_w; ++gx) {
            std::vector<double> e = encode_position(s.level, s.band, gy, gx, embed_dim);
            enc->insert(enc->end(), e.begin(), e.end());
        }
    return enc;
}

}  // namespace

std::vector<double> encode_position(int level, int band, int pos_h, int pos_w, int embed_dim) {
    if (embed_dim % 8 != 0)
        throw ConfigError(cat("encode_position: embed_dim ", embed_dim, " must be divisible by 8"));
    int quarter = embed_dim / 4;
    int half = quarter / 2;
    std::vector<double> out(static_cast<size_t>(embed_dim));
    const double components[4] = {static_cast<double>(level), static_cast<double>(band),
                                  static_cast<double>(pos_h), static_cast<double>(pos_w)};
    for (int comp = 0; comp < 4; ++comp) {
        double p = components[comp];
        for (int i = 0; i < half; ++i) {
            double freq = std::pow(10000.0, -static_cast<double>(i) / half);
            out[comp * quarter + i] = std::sin(p * freq);
            out[comp * quarter + half + i] = std::cos(p * freq);
        }
    }
    return out;
}

SegmentLayout PatchPlan::segments() const {
    SegmentLayout layout;
    layout.n_lr = streams[0].tokens();
    layout.n_lf = streams[1].tokens();
    layout.hf_level_counts.assign(static_cast<size_t>(levels), 0);
    for (size_t i = 2; i < streams.size(); ++i) {
        // streams are ordered j = J..1; index by distance from J
        layout.hf_level_counts[static_cast<size_t>(levels - streams[i].level)] +=
            streams[i].tokens();
    }
    return layout;
}

SegmentLayout PatchPlan::segments_low() const {
    SegmentLayout layout;
    layout.n_lr = streams[0].tokens();
    layout.n_lf = streams[1].tokens();
    return layout;
}

BandRect PatchPlan::pixel_footprint(const TokenStream& s, int gy, int gx) const {
    if (s.is_lr) {
        // LR pixels map to upscale-sized pixel blocks; footprint reported in
        // HR pixel coordinates for comparability.
        int scale_num = h / lr_size;
        int side = s.patch * scale_num;
        return {gy * side, gx * side, side, side};
    }
    int scale = 1 << s.level;
    int side = s.patch * scale;
    return {gy * side, gx * side, side, side};
}

PatchPlan plan_patches(int h, int w, int levels, int p_min, int lr_size, int embed_dim,
                       int channels, int lr_patch) {
    if (levels < 1) throw ConfigError(cat("plan_patches: levels must be >= 1, got ", levels));
    if (p_min < 1) throw ConfigError(cat("plan_patches: p_min must be >= 1, got ", p_min));
    if (lr_patch < 1) throw ConfigError(cat("plan_patches: lr_patch must be >= 1, got ", lr_patch));
    if (embed_dim % 8 != 0)
        throw ConfigError(cat("plan_patches: embed_dim ", embed_dim, " must be divisible by 8"));
    int div = 1 << levels;
    if (h % div != 0)
        throw ConfigError(cat("plan_patches: height ", h, " not divisible by 2^J = ", div));
    if (w % div != 0)
        throw ConfigError(cat("plan_patches: width ", w, " not divisible by 2^J = ", div));
    int lf_h = h / div, lf_w = w / div;
    if (lf_h % p_min != 0)
        throw ConfigError(
            cat("plan_patches: LF height ", lf_h, " not divisible by p_min = ", p_min));
    if (lf_w % p_min != 0)
        throw ConfigError(cat("plan_patches: LF width ", lf_w, " not divisible by p_min = ", p_min));
    if (lr_size % lr_patch != 0)
        throw ConfigError(
            cat("plan_patches: LR size ", lr_size, " not divisible by lr_patch = ", lr_patch));

    PatchPlan plan;
    plan.h = h;
    plan.w = w;
    plan.c = channels;
    plan.levels = levels;
    plan.p_min = p_min;
    plan.lr_size = lr_size;
    plan.lr_patch = lr_patch;
    plan.embed_dim = embed_dim;
    plan.grid_h = lf_h / p_min;
    plan.grid_w = lf_w / p_min;

    int64_t offset = 0;
    auto push = [&](TokenStream s) {
        s.token_begin = offset;
        s.patch_values = static_cast<int64_t>(s.patch) * s.patch * channels;
        int src_w = s.is_lr ? lr_size : w;
        s.index_map = build_index_map(s.rect, s.patch, s.grid_h, s.grid_w, src_w, channels);
        s.pos_encoding = build_pos_encodings(s, embed_dim);
        offset += s.tokens();
        plan.streams.push_back(std::move(s));
    };

    {
        TokenStream lr;
        lr.name = "lr";
        lr.is_lr = true;
        lr.level = 0;
        lr.band = kBandLF;
        lr.patch = lr_patch;
        lr.grid_h = lr_size / lr_patch;
        lr.grid_w = lr_size / lr_patch;
        lr.rect = {0, 0, lr_size, lr_size};
        push(std::move(lr));
    }
    {
        TokenStream lf;
        lf.name = "lf";
        lf.level = levels;
        lf.band = kBandLF;
        lf.patch = p_min;
        lf.grid_h = plan.grid_h;
        lf.grid_w = plan.grid_w;
        lf.rect = subband_rect(h, w, levels, levels, Subband::LL);
        push(std::move(lf));
    }
    const struct {
        Subband sub;
        int band;
        const char* tag;
    } kBands[3] = {{Subband::V, kBandV, "v"}, {Subband::H, kBandH, "h"}, {Subband::D, kBandD, "d"}};
    for (int j = levels; j >= 1; --j) {
        for (const auto& b : kBands) {
            TokenStream hf;
            hf.name = cat("hf.l", j, ".", b.tag);
            hf.level = j;
            hf.band = b.band;
            hf.patch = plan.patch_for_level(j);
            hf.grid_h = plan.grid_h;
            hf.grid_w = plan.grid_w;
            hf.rect = subband_rect(h, w, levels, j, b.sub);
            push(std::move(hf));
        }
    }
    plan.token_count = offset;
    return plan;
}

int64_t equal_patch_token_count(int h, int w, int levels, int patch, int lr_size, int lr_patch) {
    if (lr_size % lr_patch != 0)
        throw ConfigError(
            cat("equal_patch_token_count: LR size ", lr_size, " not divisible by ", lr_patch));
    auto band_tokens = [&](int bh, int bw) -> int64_t {
        if (bh % patch != 0 || bw % patch != 0)
            throw ConfigError(cat("equal_patch_token_count: band ", bh, "x", bw,
                                  " not divisible by patch ", patch));
        return static_cast<int64_t>(bh / patch) * (bw / patch);
    };
    int64_t count = static_cast<int64_t>(lr_size / lr_patch) * (lr_size / lr_patch);
    count += band_tokens(h >> levels, w >> levels);  // LF
    for (int j = 1; j <= levels; ++j) count += 3 * band_tokens(h >> j, w >> j);
    return count;
}

}  // namespace wsdt
