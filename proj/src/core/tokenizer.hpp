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

// Pyramid tokenization of a packed wavelet spectrum plus the LR conditioning
// image. Patch sizes scale with the decomposition level, p^j = p_min *
// 2^(J-j), so a token at any level covers the same pixel footprint as the
// corresponding LF token. Every token carries a 4D position
// [level, sub-band, row, col]; level 0 is reserved for LR tokens so their
// encodings never collide with spectrum tokens.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "masks.hpp"
#include "tensor.hpp"
#include "wavelet.hpp"

namespace wsdt {

/// Sub-band index d of the 4D position. V/D/H follow the convention that V
/// comes first and H last; block ordering within a level is V, H, D.
enum : int { kBandLF = 0, kBandV = 1, kBandD = 2, kBandH = 3 };

/// One embedding stream: LR, LF, or a single (level, sub-band) HF band.
struct TokenStream {
    std::string name;       // "lr", "lf", "hf.l<j>.<v|h|d>"
    bool is_lr = false;
    int level = 0;          // 0 for LR, J for LF, j for HF
    int band = kBandLF;     // d component of the position
    int patch = 0;          // patch side length
    int grid_h = 0, grid_w = 0;
    BandRect rect;          // source rectangle (spectrum coords; LR image coords for LR)
    int64_t token_begin = 0;   // offset of this stream in the full sequence
    int64_t patch_values = 0;  // patch * patch * channels

    // flat gather map: token-major [tokens x patch_values] <- source [h,w,c]
    std::shared_ptr<std::vector<int64_t>> index_map;
    // deterministic sin/cos positional encodings, [tokens x embed_dim]
    std::shared_ptr<std::vector<double>> pos_encoding;

    int64_t tokens() const { return static_cast<int64_t>(grid_h) * grid_w; }
};

/// Fully resolved tokenization geometry.
struct PatchPlan {
    int h = 0, w = 0, c = 0;
    int levels = 0;
    int p_min = 0;
    int lr_size = 0;   // LR image is lr_size x lr_size
    int lr_patch = 0;
    int embed_dim = 0;
    int grid_h = 0, grid_w = 0;  // shared grid of every spectrum stream
    int64_t token_count = 0;
    std::vector<TokenStream> streams;  // order: LR, LF, HF (j = J..1; V,H,D)

    int patch_for_level(int level) const { return p_min << (levels - level); }
    const TokenStream& lr_stream() const { return streams[0]; }
    const TokenStream& lf_stream() const { return streams[1]; }

    /// Segment boundaries for mask construction.
    SegmentLayout segments() const;
    SegmentLayout segments_low() const;  // LR + LF only

    /// Pixel-domain footprint of one token; identical across spectrum
    /// streams for a fixed grid cell.
    BandRect pixel_footprint(const TokenStream& s, int gy, int gx) const;
};

/// Resolves the pyramid plan, validating every divisibility constraint. The
/// error message names the offending dimension.
PatchPlan plan_patches(int h, int w, int levels, int p_min, int lr_size, int embed_dim,
                       int channels, int lr_patch = 2);

/// Token count for the uniform-patch ablation (same patch size on every
/// sub-band, the grids then differ per level). Counting only; such a plan
/// has no meaning for the pyramid model.
int64_t equal_patch_token_count(int h, int w, int levels, int patch, int lr_size, int lr_patch);

/// Sin/cos encoding of one 4D position. Each of the four components owns a
/// quarter of the dimensions, split into sine and cosine halves with
/// geometrically spaced frequencies (base 10000).
std::vector<double> encode_position(int level, int band, int pos_h, int pos_w, int embed_dim);

// ---------------------------------------------------------------------------
// tensor-side tokenize / detokenize

template <typename T>
struct StreamWeights {
    Tensor<T> w;  // [patch_values, embed_dim]
    Tensor<T> b;  // [1, embed_dim]
};

namespace detail {
template <typename T>
Tensor<T> stream_pos_tensor(const TokenStream& s, int embed_dim) {
    std::vector<T> v(s.pos_encoding->begin(), s.pos_encoding->end());
    return Tensor<T>::from({s.tokens(), embed_dim}, std::move(v));
}
}  // namespace detail

/// Embeds one stream: gather patches, project, add the positional encoding.
template <typename T>
Tensor<T> tokenize_stream(const Tensor<T>& source, const TokenStream& s,
                          const StreamWeights<T>& wt, int embed_dim) {
    Tensor<T> patches = gather(source, s.index_map, {s.tokens(), s.patch_values});
    Tensor<T> emb = add_rowvec(matmul(patches, wt.w), wt.b);
    return add(emb, detail::stream_pos_tensor<T>(s, embed_dim));
}

/// Tokenizes the spectrum and LR image into per-stream [n, D] blocks in plan
/// order. weights must be in the same order as plan.streams.
template <typename T>
std::vector<Tensor<T>> tokenize(const Tensor<T>& spectrum, const Tensor<T>& lr,
                                const PatchPlan& plan,
                                const std::vector<StreamWeights<T>>& weights) {
    if (spectrum.rank() != 3 || spectrum.dim(0) != plan.h || spectrum.dim(1) != plan.w ||
        spectrum.dim(2) != plan.c)
        throw DimensionError(cat("tokenize: spectrum ", shape_str(spectrum.shape()),
                                 " does not match plan ", plan.h, "x", plan.w, "x", plan.c));
    if (lr.rank() != 3 || lr.dim(0) != plan.lr_size || lr.dim(1) != plan.lr_size ||
        lr.dim(2) != plan.c)
        throw DimensionError(cat("tokenize: LR ", shape_str(lr.shape()), " does not match plan lr ",
                                 plan.lr_size, "x", plan.lr_size, "x", plan.c));
    if (weights.size() != plan.streams.size())
        throw DimensionError(cat("tokenize: ", weights.size(), " weight sets for ",
                                 plan.streams.size(), " streams"));
    std::vector<Tensor<T>> out;
    out.reserve(plan.streams.size());
    for (size_t i = 0; i < plan.streams.size(); ++i) {
        const TokenStream& s = plan.streams[i];
        out.push_back(tokenize_stream(s.is_lr ? lr : spectrum, s, weights[i], plan.embed_dim));
    }
    return out;
}

/// Scatters per-stream decoded patch values back into a packed spectrum.
/// values[i] is [tokens, patch_values] for spectrum stream i (plan order
/// without the LR stream).
template <typename T>
Tensor<T> assemble_spectrum(const std::vector<Tensor<T>>& values, const PatchPlan& plan) {
    if (values.size() + 1 != plan.streams.size())
        throw DimensionError(cat("assemble_spectrum: ", values.size(),
                                 " value blocks for ", plan.streams.size() - 1,
                                 " spectrum streams"));
    Shape spec_shape{plan.h, plan.w, plan.c};
    Tensor<T> acc;
    for (size_t i = 0; i < values.size(); ++i) {
        const TokenStream& s = plan.streams[i + 1];
        if (values[i].numel() != static_cast<int64_t>(s.index_map->size()))
            throw DimensionError(cat("assemble_spectrum: stream ", s.name, " got ",
                                     values[i].numel(), " values, expected ",
                                     s.index_map->size()));
        Tensor<T> part = scatter(values[i], s.index_map, spec_shape);
        acc = acc.defined() ? add(acc, part) : part;
    }
    return acc;
}

}  // namespace wsdt
