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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "core/metrics.hpp"
#include "core/rng.hpp"

using namespace wsdt;

namespace {

Image random_unit_image(int h, int w, int c, uint64_t seed) {
    Rng rng(seed);
    Image img(h, w, c);
    for (auto& v : img.data) v = static_cast<float>(rng.uniform());
    return img;
}

}  // namespace

TEST_CASE("psnr examples") {
    Image a = random_unit_image(8, 8, 3, 1);
    CHECK(psnr(a, a) == 100.0);  // cap

    // uniform error with MSE 0.01 -> 20 dB
    Image base(16, 16, 1);
    for (auto& v : base.data) v = 0.5f;
    Image off = base;
    for (auto& v : off.data) v += 0.1f;
    CHECK(psnr(base, off) == doctest::Approx(20.0).epsilon(1e-6));

    // MSE 1 -> 0 dB
    Image zero(8, 8, 1);
    Image one(8, 8, 1);
    for (auto& v : one.data) v = 1.f;
    CHECK(psnr(zero, one) == doctest::Approx(0.0));

    CHECK_THROWS_AS(psnr(a, Image(4, 4, 3)), DimensionError);
}

TEST_CASE("psnr is permutation invariant under matched permutations") {
    Image a = random_unit_image(8, 8, 1, 7);
    Image b = random_unit_image(8, 8, 1, 8);
    double ref = psnr(a, b);
    // reverse both images identically
    Image ar = a, br = b;
    std::reverse(ar.data.begin(), ar.data.end());
    std::reverse(br.data.begin(), br.data.end());
    CHECK(psnr(ar, br) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("ssim properties") {
    Image x = random_unit_image(24, 24, 1, 42);
    CHECK(ssim(x, x) == doctest::Approx(1.0).epsilon(1e-9));

    Image inverted = x;
    for (auto& v : inverted.data) v = 1.f - v;
    Image noisy = x;
    Rng rng(3);
    for (auto& v : noisy.data)
        v = std::min(1.f, std::max(0.f, v + 0.01f * static_cast<float>(rng.normal())));
    CHECK(ssim(x, inverted) < ssim(x, noisy));

    Image y = random_unit_image(24, 24, 1, 43);
    CHECK(ssim(x, y) == doctest::Approx(ssim(y, x)).epsilon(1e-12));

    CHECK_THROWS_AS(ssim(Image(8, 8, 1), Image(8, 8, 1)), ContractError);  // below window
}

TEST_CASE("ssim stays in [-1,1] and is 1 only for identical inputs") {
    Image x = random_unit_image(16, 16, 3, 5);
    for (float mag : {0.f, 0.005f, 0.05f, 0.3f, 1.f}) {
        Image pert = x;
        Rng rng(11);
        for (auto& v : pert.data)
            v = std::min(1.f, std::max(0.f, v + mag * static_cast<float>(rng.normal())));
        double s = ssim(x, pert);
        CHECK(s <= 1.0 + 1e-12);
        CHECK(s >= -1.0 - 1e-12);
        if (mag == 0.f)
            CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
        else
            CHECK(s < 1.0);
    }
}

TEST_CASE("consistency examples") {
    // exact box inverse scores 0
    Image lr = random_unit_image(4, 4, 3, 9);
    Image sr = box_upsample(lr, 8);
    CHECK(consistency(sr, lr) == doctest::Approx(0.0));

    // uniform offset delta between down(sr) and lr scores delta^2 * 1e5
    Image sr_off = sr;
    for (auto& v : sr_off.data) v += 0.01f;
    CHECK(consistency(sr_off, lr) == doctest::Approx(0.01 * 0.01 * 1e5).epsilon(1e-4));

    // brute-force MSE scaling on a random pair
    Image sr_rand = random_unit_image(32, 32, 3, 10);
    Image lr_rand = random_unit_image(4, 4, 3, 11);
    Image down = box_downsample(sr_rand, 8);
    double mse = 0;
    for (size_t i = 0; i < down.size(); ++i) {
        double d = static_cast<double>(down.data[i]) - lr_rand.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(down.size());
    CHECK(consistency(sr_rand, lr_rand) == doctest::Approx(mse * 1e5).epsilon(1e-9));

    CHECK_THROWS_AS(consistency(Image(9, 9, 1), Image(4, 4, 1)), DimensionError);
    CHECK_THROWS_AS(consistency(Image(8, 12, 1), Image(4, 4, 1)), DimensionError);
}
