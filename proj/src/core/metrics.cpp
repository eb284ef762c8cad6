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

#include "metrics.hpp"

#include <cmath>
#include <vector>

namespace wsdt {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;  // (K1 * L)^2
constexpr double kC2 = 0.03 * 0.03;  // (K2 * L)^2

void check_same(const Image& a, const Image& b, const char* op) {
    if (a.h != b.h || a.w != b.w || a.c != b.c)
        throw DimensionError(cat(op, ": image shapes ", a.h, "x", a.w, "x", a.c, " vs ", b.h, "x",
                                 b.w, "x", b.c));
}

const std::vector<double>& gaussian_kernel() {
    static const std::vector<double> kernel = [] {
        std::vector<double> k(kWindow);
        double sum = 0;
        for (int i = 0; i < kWindow; ++i) {
            double d = i - (kWindow - 1) / 2.0;
            k[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
            sum += k[i];
        }
        for (auto& v : k) v /= sum;
        return k;
    }();
    return kernel;
}

// Separable valid-mode Gaussian filter of an h x w plane.
std::vector<double> gauss_filter(const std::vector<double>& plane, int h, int w, int* oh, int* ow) {
    const auto& k = gaussian_kernel();
    int mid_w = w - kWindow + 1;
    std::vector<double> tmp(static_cast<size_t>(h) * mid_w, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < mid_w; ++x) {
            double acc = 0;
            for (int i = 0; i < kWindow; ++i) acc += k[i] * plane[y * w + x + i];
            tmp[y * mid_w + x] = acc;
        }
    int out_h = h - kWindow + 1;
    std::vector<double> out(static_cast<size_t>(out_h) * mid_w, 0.0);
    for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < mid_w; ++x) {
            double acc = 0;
            for (int i = 0; i < kWindow; ++i) acc += k[i] * tmp[(y + i) * mid_w + x];
            out[y * mid_w + x] = acc;
        }
    *oh = out_h;
    *ow = mid_w;
    return out;
}

double ssim_plane(const std::vector<double>& pa, const std::vector<double>& pb, int h, int w) {
    std::vector<double> paa(pa.size()), pbb(pa.size()), pab(pa.size());
    for (size_t i = 0; i < pa.size(); ++i) {
        paa[i] = pa[i] * pa[i];
        pbb[i] = pb[i] * pb[i];
        pab[i] = pa[i] * pb[i];
    }
    int oh = 0, ow = 0;
    std::vector<double> mu_a = gauss_filter(pa, h, w, &oh, &ow);
    std::vector<double> mu_b = gauss_filter(pb, h, w, &oh, &ow);
    std::vector<double> m_aa = gauss_filter(paa, h, w, &oh, &ow);
    std::vector<double> m_bb = gauss_filter(pbb, h, w, &oh, &ow);
    std::vector<double> m_ab = gauss_filter(pab, h, w, &oh, &ow);
    double acc = 0;
    for (size_t i = 0; i < mu_a.size(); ++i) {
        double va = m_aa[i] - mu_a[i] * mu_a[i];
        double vb = m_bb[i] - mu_b[i] * mu_b[i];
        double cov = m_ab[i] - mu_a[i] * mu_b[i];
        double num = (2.0 * mu_a[i] * mu_b[i] + kC1) * (2.0 * cov + kC2);
        double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + kC1) * (va + vb + kC2);
        acc += num / den;
    }
    return acc / static_cast<double>(mu_a.size());
}

}  // namespace

double psnr(const Image& a, const Image& b) {
    check_same(a, b, "psnr");
    double mse = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = static_cast<double>(a.data[i]) - b.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.size());
    if (mse <= 1e-10) return 100.0;
    return std::min(100.0, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Image& a, const Image& b) {
    check_same(a, b, "ssim");
    if (a.h < kWindow || a.w < kWindow)
        throw ContractError(cat("ssim: image ", a.h, "x", a.w, " smaller than the ", kWindow, "x",
                                kWindow, " window"));
    double acc = 0;
    std::vector<double> pa(static_cast<size_t>(a.h) * a.w), pb(pa.size());
    for (int ch = 0; ch < a.c; ++ch) {
        for (int y = 0; y < a.h; ++y)
            for (int x = 0; x < a.w; ++x) {
                pa[static_cast<size_t>(y) * a.w + x] = a.at(y, x, ch);
                pb[static_cast<size_t>(y) * a.w + x] = b.at(y, x, ch);
            }
        acc += ssim_plane(pa, pb, a.h, a.w);
    }
    return acc / a.c;
}

double consistency(const Image& sr, const Image& lr) {
    if (lr.h < 1 || lr.w < 1 || sr.c != lr.c || sr.h % lr.h != 0 || sr.w % lr.w != 0 ||
        sr.h / lr.h != sr.w / lr.w)
        throw DimensionError(cat("consistency: SR ", sr.h, "x", sr.w, "x", sr.c,
                                 " is not an integer multiple of LR ", lr.h, "x", lr.w, "x", lr.c));
    int factor = sr.h / lr.h;
    Image down = box_downsample(sr, factor);
    double mse = 0;
    for (size_t i = 0; i < down.size(); ++i) {
        double d = static_cast<double>(down.data[i]) - lr.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(down.size());
    return mse * 1e5;
}

}  // namespace wsdt
