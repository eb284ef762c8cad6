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

// Orthonormal Haar DWT and its Mallat multi-level form on H x W x C arrays.
//
// Single level, per 2x2 block [[a,b],[c,d]] (a top-left, b top-right,
// c bottom-left, d bottom-right):
//
//   ll = (a+b+c+d)/2     v = (a-b+c-d)/2
//   h  = (a+b-c-d)/2     d = (a-b-c+d)/2
//
// The filters have unit gain, so the transform is orthogonal: energy is
// preserved and i.i.d. Gaussian pixels map to i.i.d. Gaussian coefficients
// with the same variance. Sub-band naming: `v` holds horizontal-axis
// differences (it responds to vertical edges) and `h` vertical-axis
// differences; the literature is inconsistent, this file is the convention.
//
// Packed layout of a J-level spectrum, anchored at the origin: the LF band
// occupies the top-left (H/2^J)x(W/2^J) corner; for each level j the V band
// sits top-right, H bottom-left and D bottom-right inside the
// (H/2^{j-1})x(W/2^{j-1}) region.

#include <memory>
#include <vector>

#include "common.hpp"
#include "image.hpp"
#include "tensor.hpp"

namespace wsdt {

enum class Subband { LL, V, H, D };

struct BandRect {
    int y = 0, x = 0, h = 0, w = 0;
};

/// Placement of one sub-band inside the packed spectrum. The LL band only
/// exists at level == levels.
inline BandRect subband_rect(int h, int w, int levels, int level, Subband band) {
    if (level < 1 || level > levels)
        throw ContractError(cat("subband_rect: level ", level, " outside [1,", levels, "]"));
    int bh = h >> level, bw = w >> level;
    switch (band) {
        case Subband::LL:
            if (level != levels)
                throw ContractError(cat("subband_rect: LL band lives at level ", levels));
            return {0, 0, bh, bw};
        case Subband::V: return {0, bw, bh, bw};
        case Subband::H: return {bh, 0, bh, bw};
        case Subband::D: return {bh, bw, bh, bw};
    }
    throw ContractError("subband_rect: unknown band");
}

/// Decomposition depth for an upscale factor: smallest J with 2^J >= N.
inline int level_for_scale(int n) {
    if (n < 2) throw ContractError(cat("level_for_scale: upscale factor must be >= 2, got ", n));
    int j = 1;
    int p = 2;
    while (p < n) {
        p <<= 1;
        ++j;
    }
    return j;
}

inline void check_mdwt_dims(int h, int w, int levels, const char* op) {
    if (levels < 1) throw ContractError(cat(op, ": levels must be >= 1, got ", levels));
    int div = 1 << levels;
    if (h % div != 0 || w % div != 0)
        throw DimensionError(
            cat(op, ": dims ", h, "x", w, " not divisible by 2^J = ", div));
}

// ---------------------------------------------------------------------------
// raw transforms on contiguous buffers

/// One analysis level: src is h x w x c, the four outputs are (h/2) x (w/2) x c.
template <typename T>
void dwt2d_raw(const T* src, int h, int w, int c, T* ll, T* v, T* hb, T* db) {
    int oh = h / 2, ow = w / 2;
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x)
            for (int ch = 0; ch < c; ++ch) {
                const T a = src[((2 * y) * w + 2 * x) * c + ch];
                const T b = src[((2 * y) * w + 2 * x + 1) * c + ch];
                const T cc = src[((2 * y + 1) * w + 2 * x) * c + ch];
                const T dd = src[((2 * y + 1) * w + 2 * x + 1) * c + ch];
                const size_t o = (static_cast<size_t>(y) * ow + x) * c + ch;
                ll[o] = (a + b + cc + dd) / 2;
                v[o] = (a - b + cc - dd) / 2;
                hb[o] = (a + b - cc - dd) / 2;
                db[o] = (a - b - cc + dd) / 2;
            }
}

/// Exact inverse of dwt2d_raw: inputs are oh x ow x c, dst is (2*oh) x (2*ow) x c.
template <typename T>
void idwt2d_raw(const T* ll, const T* v, const T* hb, const T* db, int oh, int ow, int c, T* dst) {
    int w = 2 * ow;
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x)
            for (int ch = 0; ch < c; ++ch) {
                const size_t o = (static_cast<size_t>(y) * ow + x) * c + ch;
                const T l = ll[o], vv = v[o], hh = hb[o], dd = db[o];
                dst[((2 * y) * w + 2 * x) * c + ch] = (l + vv + hh + dd) / 2;
                dst[((2 * y) * w + 2 * x + 1) * c + ch] = (l - vv + hh - dd) / 2;
                dst[((2 * y + 1) * w + 2 * x) * c + ch] = (l + vv - hh - dd) / 2;
                dst[((2 * y + 1) * w + 2 * x + 1) * c + ch] = (l - vv - hh + dd) / 2;
            }
}

/// J-level Mallat decomposition into the packed spectrum layout.
/// img and spectrum are both h x w x c and may not alias.
template <typename T>
void mdwt_raw(const T* img, int h, int w, int c, int levels, T* spectrum) {
    check_mdwt_dims(h, w, levels, "mdwt");
    std::vector<T> cur(img, img + static_cast<size_t>(h) * w * c);
    std::vector<T> next;
    for (int l = 1; l <= levels; ++l) {
        int ch = h >> (l - 1), cw = w >> (l - 1);
        int oh = ch / 2, ow = cw / 2;
        next.assign(static_cast<size_t>(oh) * ow * c, T(0));
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x)
                for (int chan = 0; chan < c; ++chan) {
                    const T a = cur[((2 * y) * cw + 2 * x) * c + chan];
                    const T b = cur[((2 * y) * cw + 2 * x + 1) * c + chan];
                    const T cc = cur[((2 * y + 1) * cw + 2 * x) * c + chan];
                    const T dd = cur[((2 * y + 1) * cw + 2 * x + 1) * c + chan];
                    next[(static_cast<size_t>(y) * ow + x) * c + chan] = (a + b + cc + dd) / 2;
                    spectrum[(static_cast<size_t>(y) * w + ow + x) * c + chan] =
                        (a - b + cc - dd) / 2;
                    spectrum[(static_cast<size_t>(oh + y) * w + x) * c + chan] =
                        (a + b - cc - dd) / 2;
                    spectrum[(static_cast<size_t>(oh + y) * w + ow + x) * c + chan] =
                        (a - b - cc + dd) / 2;
                }
        cur.swap(next);
    }
    int fh = h >> levels, fw = w >> levels;
    for (int y = 0; y < fh; ++y)
        for (int x = 0; x < fw; ++x)
            for (int chan = 0; chan < c; ++chan)
                spectrum[(static_cast<size_t>(y) * w + x) * c + chan] =
                    cur[(static_cast<size_t>(y) * fw + x) * c + chan];
}

/// Exact inverse of mdwt_raw.
template <typename T>
void imdwt_raw(const T* spectrum, int h, int w, int c, int levels, T* img) {
    check_mdwt_dims(h, w, levels, "imdwt");
    int fh = h >> levels, fw = w >> levels;
    std::vector<T> cur(static_cast<size_t>(fh) * fw * c);
    for (int y = 0; y < fh; ++y)
        for (int x = 0; x < fw; ++x)
            for (int chan = 0; chan < c; ++chan)
                cur[(static_cast<size_t>(y) * fw + x) * c + chan] =
                    spectrum[(static_cast<size_t>(y) * w + x) * c + chan];
    std::vector<T> next;
    for (int l = levels; l >= 1; --l) {
        int oh = h >> l, ow = w >> l;
        int dh = oh * 2, dw = ow * 2;
        next.assign(static_cast<size_t>(dh) * dw * c, T(0));
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x)
                for (int chan = 0; chan < c; ++chan) {
                    const T l0 = cur[(static_cast<size_t>(y) * ow + x) * c + chan];
                    const T vv = spectrum[(static_cast<size_t>(y) * w + ow + x) * c + chan];
                    const T hh = spectrum[(static_cast<size_t>(oh + y) * w + x) * c + chan];
                    const T dd = spectrum[(static_cast<size_t>(oh + y) * w + ow + x) * c + chan];
                    next[((2 * y) * dw + 2 * x) * c + chan] = (l0 + vv + hh + dd) / 2;
                    next[((2 * y) * dw + 2 * x + 1) * c + chan] = (l0 - vv + hh - dd) / 2;
                    next[((2 * y + 1) * dw + 2 * x) * c + chan] = (l0 + vv - hh - dd) / 2;
                    next[((2 * y + 1) * dw + 2 * x + 1) * c + chan] = (l0 - vv - hh + dd) / 2;
                }
        cur.swap(next);
    }
    std::copy(cur.begin(), cur.end(), img);
}

// ---------------------------------------------------------------------------
// Image conveniences

struct DwtBands {
    Image ll, v, h, d;
};

inline DwtBands dwt2d(const Image& img) {
    if (img.h % 2 != 0 || img.w % 2 != 0)
        throw DimensionError(cat("dwt2d: dims ", img.h, "x", img.w, " must be even"));
    DwtBands out{Image(img.h / 2, img.w / 2, img.c), Image(img.h / 2, img.w / 2, img.c),
                 Image(img.h / 2, img.w / 2, img.c), Image(img.h / 2, img.w / 2, img.c)};
    dwt2d_raw(img.data.data(), img.h, img.w, img.c, out.ll.data.data(), out.v.data.data(),
              out.h.data.data(), out.d.data.data());
    return out;
}

inline Image idwt2d(const DwtBands& bands) {
    const Image& ll = bands.ll;
    if (bands.v.h != ll.h || bands.v.w != ll.w || bands.h.h != ll.h || bands.h.w != ll.w ||
        bands.d.h != ll.h || bands.d.w != ll.w || bands.v.c != ll.c || bands.h.c != ll.c ||
        bands.d.c != ll.c)
        throw DimensionError("idwt2d: sub-band shapes disagree");
    Image out(ll.h * 2, ll.w * 2, ll.c);
    idwt2d_raw(ll.data.data(), bands.v.data.data(), bands.h.data.data(), bands.d.data.data(), ll.h,
               ll.w, ll.c, out.data.data());
    return out;
}

inline Image mdwt(const Image& img, int levels) {
    Image out(img.h, img.w, img.c);
    mdwt_raw(img.data.data(), img.h, img.w, img.c, levels, out.data.data());
    return out;
}

inline Image imdwt(const Image& spectrum, int levels) {
    Image out(spectrum.h, spectrum.w, spectrum.c);
    imdwt_raw(spectrum.data.data(), spectrum.h, spectrum.w, spectrum.c, levels, out.data.data());
    return out;
}

/// Per-sub-band affine normalization to [0,1] for visualization. Flat bands
/// (constant HF of a smooth image) map to mid-gray.
inline Image render_spectrum(const Image& spectrum, int levels) {
    check_mdwt_dims(spectrum.h, spectrum.w, levels, "render_spectrum");
    Image out(spectrum.h, spectrum.w, spectrum.c);
    auto normalize_rect = [&](const BandRect& r) {
        float lo = std::numeric_limits<float>::infinity();
        float hi = -std::numeric_limits<float>::infinity();
        for (int y = r.y; y < r.y + r.h; ++y)
            for (int x = r.x; x < r.x + r.w; ++x)
                for (int ch = 0; ch < spectrum.c; ++ch) {
                    float v = spectrum.at(y, x, ch);
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
        float range = hi - lo;
        for (int y = r.y; y < r.y + r.h; ++y)
            for (int x = r.x; x < r.x + r.w; ++x)
                for (int ch = 0; ch < spectrum.c; ++ch)
                    out.at(y, x, ch) = range < 1e-12f
                                           ? 0.5f
                                           : (spectrum.at(y, x, ch) - lo) / range;
    };
    normalize_rect(subband_rect(spectrum.h, spectrum.w, levels, levels, Subband::LL));
    for (int l = 1; l <= levels; ++l) {
        normalize_rect(subband_rect(spectrum.h, spectrum.w, levels, l, Subband::V));
        normalize_rect(subband_rect(spectrum.h, spectrum.w, levels, l, Subband::H));
        normalize_rect(subband_rect(spectrum.h, spectrum.w, levels, l, Subband::D));
    }
    return out;
}

// ---------------------------------------------------------------------------
// autodiff wrappers
//
// The transform is orthogonal, so the adjoint needed by the chain rule is
// simply the opposite transform applied to the output gradient.

template <typename T>
Tensor<T> mdwt_op(const Tensor<T>& x, int levels) {
    if (x.rank() != 3)
        throw DimensionError(cat("mdwt_op: expected [h,w,c] tensor, got ", shape_str(x.shape())));
    int h = static_cast<int>(x.dim(0)), w = static_cast<int>(x.dim(1)),
        c = static_cast<int>(x.dim(2));
    std::vector<T> v(x.numel());
    mdwt_raw(x.values().data(), h, w, c, levels, v.data());
    auto out = detail::make_node<T>(x.shape(), std::move(v), {x.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto xn = x.node();
        out.node()->backprop = [self, xn, h, w, c, levels] {
            xn->ensure_grad();
            std::vector<T> gx(self->grad.size());
            imdwt_raw(self->grad.data(), h, w, c, levels, gx.data());
            for (size_t i = 0; i < gx.size(); ++i) xn->grad[i] += gx[i];
        };
    }
    return out;
}

template <typename T>
Tensor<T> imdwt_op(const Tensor<T>& spectrum, int levels) {
    if (spectrum.rank() != 3)
        throw DimensionError(
            cat("imdwt_op: expected [h,w,c] tensor, got ", shape_str(spectrum.shape())));
    int h = static_cast<int>(spectrum.dim(0)), w = static_cast<int>(spectrum.dim(1)),
        c = static_cast<int>(spectrum.dim(2));
    std::vector<T> v(spectrum.numel());
    imdwt_raw(spectrum.values().data(), h, w, c, levels, v.data());
    auto out = detail::make_node<T>(spectrum.shape(), std::move(v), {spectrum.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto sn = spectrum.node();
        out.node()->backprop = [self, sn, h, w, c, levels] {
            sn->ensure_grad();
            std::vector<T> gs(self->grad.size());
            mdwt_raw(self->grad.data(), h, w, c, levels, gs.data());
            for (size_t i = 0; i < gs.size(); ++i) sn->grad[i] += gs[i];
        };
    }
    return out;
}

}  // namespace wsdt
