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

#include <cmath>

#include "core/diffusion.hpp"

using namespace wsdt;

namespace {

struct Moments {
    double mean = 0, var = 0;
};

Moments moments(const std::vector<double>& v) {
    Moments m;
    for (double x : v) m.mean += x;
    m.mean /= static_cast<double>(v.size());
    for (double x : v) m.var += (x - m.mean) * (x - m.mean);
    m.var /= static_cast<double>(v.size());
    return m;
}

}  // namespace

TEST_CASE("schedule validation") {
    NoiseSchedule s = NoiseSchedule::default_few_step();
    CHECK(s.steps == 4);
    CHECK_NOTHROW(s.validate());

    NoiseSchedule bad = s;
    bad.alpha_bar[2] = 0.9;  // not decreasing
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    NoiseSchedule ends = s;
    ends.alpha_bar[0] = 0.5;
    CHECK_THROWS_AS(ends.validate(), ConfigError);

    NoiseSchedule range = s;
    range.alpha_bar[3] = -0.1;
    CHECK_THROWS_AS(range.validate(), ConfigError);

    // T=1 degenerate schedules skip the endpoint constraints
    NoiseSchedule one;
    one.steps = 1;
    one.alpha_bar = {0.25};
    CHECK_NOTHROW(one.validate());
}

TEST_CASE("posterior variance never exceeds the step variance") {
    NoiseSchedule s = NoiseSchedule::default_few_step();
    for (int t = 1; t < s.steps; ++t) CHECK(s.posterior_var(t) <= s.beta(t) + 1e-12);
}

TEST_CASE("forward_sample formula via noise replay") {
    // alpha_bar = 0.25 on a constant image of ones: I_t = 0.5 + sqrt(0.75) eps
    NoiseSchedule s;
    s.steps = 1;
    s.alpha_bar = {0.25};
    auto x0 = Tensor<double>::full({4, 4, 1}, 1.0);
    Rng rng(42);
    auto xt = forward_sample(x0, 0, s, rng);
    Rng replay(42);
    for (double v : xt.values()) {
        double eps = replay.normal();
        CHECK(v == doctest::Approx(0.5 + std::sqrt(0.75) * eps).epsilon(1e-12));
    }
    CHECK_THROWS_AS(forward_sample(x0, 1, s, rng), ContractError);

    // near-one alpha_bar: I_t ~= I_0
    NoiseSchedule sharp;
    sharp.steps = 1;
    sharp.alpha_bar = {1.0 - 1e-12};
    Rng rng2(1);
    auto close = forward_sample(x0, 0, sharp, rng2);
    for (double v : close.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("forward_sample Monte Carlo moments") {
    NoiseSchedule s = NoiseSchedule::default_few_step();
    auto x0 = Tensor<double>::full({16, 16, 3}, 1.0);
    for (int t = 0; t < s.steps; ++t) {
        Rng rng(1000 + t);
        std::vector<double> all;
        all.reserve(400 * 768);
        for (int rep = 0; rep < 400; ++rep) {
            auto xt = forward_sample(x0, t, s, rng);
            all.insert(all.end(), xt.values().begin(), xt.values().end());
        }
        Moments m = moments(all);
        double want_mean = std::sqrt(s.alpha_bar[t]);
        double want_var = 1.0 - s.alpha_bar[t];
        CHECK(std::abs(m.mean - want_mean) / want_mean < 0.01);
        CHECK(std::abs(m.var - want_var) / want_var < 0.02);
    }
}

TEST_CASE("posterior_sample zero-noise branch returns the exact mean") {
    NoiseSchedule s = NoiseSchedule::default_few_step();
    Rng rng(7);
    auto xt = Tensor<double>::full({2, 2, 1}, 0.8);
    auto x0 = Tensor<double>::full({2, 2, 1}, -0.3);
    // t = 1 -> t-1 = 0: mean only, no rng consumption
    uint64_t before = rng.next_u64();
    Rng rng_a(7);
    rng_a.next_u64();
    auto out = posterior_sample(xt, x0, 1, s, rng_a);
    double ab1 = s.alpha_bar[1], ab0 = s.alpha_bar[0];
    double beta = 1.0 - ab1 / ab0;
    double c0 = std::sqrt(ab0) * beta / (1 - ab1);
    double ct = std::sqrt(ab1 / ab0) * (1 - ab0) / (1 - ab1);
    for (double v : out.values())
        CHECK(v == doctest::Approx(c0 * -0.3 + ct * 0.8).epsilon(1e-12));
    (void)before;

    CHECK_THROWS_AS(posterior_sample(xt, x0, 0, s, rng), ContractError);
    CHECK_THROWS_AS(posterior_sample(xt, x0, 4, s, rng), ContractError);
}

TEST_CASE("posterior chain consistency at every t") {
    // With x0_hat = I_0 and I_t ~ q(I_t|I_0), the sampled I_{t-1} must be
    // distributed as q(I_{t-1}|I_0).
    NoiseSchedule s = NoiseSchedule::default_few_step();
    auto x0 = Tensor<double>::full({8, 8, 1}, 0.6);
    for (int t = 1; t < s.steps; ++t) {
        Rng rng(500 + t);
        std::vector<double> all;
        for (int rep = 0; rep < 3000; ++rep) {
            auto xt = forward_sample(x0, t, s, rng);
            auto prev = posterior_sample(xt, x0, t, s, rng);
            all.insert(all.end(), prev.values().begin(), prev.values().end());
        }
        Moments m = moments(all);
        double want_mean = std::sqrt(s.alpha_bar[t - 1]) * 0.6;
        CHECK(std::abs(m.mean - want_mean) / std::abs(want_mean) < 0.02);
        if (t >= 2) {
            double want_var = 1.0 - s.alpha_bar[t - 1];
            CHECK(std::abs(m.var - want_var) / want_var < 0.02);
        }
    }
}

TEST_CASE("sr_sample composition") {
    ModelConfig cfg;
    cfg.embed_dim = 16;
    cfg.n_heads = 2;
    cfg.depth_le = 1;
    cfg.depth_hd = 1;
    cfg.mlp_ratio = 2;
    cfg.hr_size = 8;
    cfg.upscale = 2;
    cfg.t_steps = 4;
    WsdtModel<float> model(cfg, 5);
    NoiseSchedule sched = NoiseSchedule::default_few_step();
    auto lr = Tensor<float>::full({4, 4, 3}, 0.25f);

    SUBCASE("untrained model with zero heads outputs the zero image") {
        Rng rng(1);
        std::vector<float> out = sr_sample(model, lr, sched, rng);
        for (float v : out) CHECK(v == 0.f);
    }

    SUBCASE("fixed seed gives bit-identical samples") {
        Rng prng(9);
        model.params().randomize_all(prng, 0.05);
        Rng r1(77), r2(77);
        CHECK(sr_sample(model, lr, sched, r1) == sr_sample(model, lr, sched, r2));
        Rng r3(78);
        CHECK(sr_sample(model, lr, sched, r3) != sr_sample(model, lr, sched, r1));
    }

    SUBCASE("T=1 degenerate schedule is a single forward pass on pure noise") {
        ModelConfig one = cfg;
        one.t_steps = 1;
        WsdtModel<float> m1(one, 5);
        Rng prng(9);
        m1.params().randomize_all(prng, 0.05);
        NoiseSchedule s1;
        s1.steps = 1;
        s1.alpha_bar = {0.01};
        Rng rng(3);
        std::vector<float> out = sr_sample(m1, lr, s1, rng);
        // replay: the only rng use is the initial noise image
        Rng replay(3);
        std::vector<float> noise(8 * 8 * 3);
        for (auto& v : noise) v = static_cast<float>(replay.normal());
        NoGradGuard g;
        auto direct = m1.forward(Tensor<float>::from({8, 8, 3}, noise), lr, 0);
        for (size_t i = 0; i < out.size(); ++i) {
            float clamped = std::min(1.f, std::max(-1.f, direct.values()[i]));
            CHECK(out[i] == clamped);
        }
    }

    SUBCASE("geometry mismatch is rejected") {
        Rng rng(1);
        auto wrong = Tensor<float>::full({5, 5, 3}, 0.f);
        CHECK_THROWS_AS(sr_sample(model, wrong, sched, rng), ConfigError);
    }
}

TEST_CASE("pixel noise maps to spectrum noise with identical statistics") {
    // forward_sample noise measured in the wavelet domain keeps its variance
    NoiseSchedule s = NoiseSchedule::default_few_step();
    auto x0 = Tensor<double>::zeros({32, 32, 1});
    Rng rng(31);
    std::vector<double> coeffs;
    for (int rep = 0; rep < 60; ++rep) {
        auto xt = forward_sample(x0, 3, s, rng);  // variance 0.99
        std::vector<double> spec(xt.numel());
        mdwt_raw(xt.values().data(), 32, 32, 1, 3, spec.data());
        coeffs.insert(coeffs.end(), spec.begin(), spec.end());
    }
    Moments m = moments(coeffs);
    CHECK(std::abs(m.var - 0.99) / 0.99 < 0.05);
    CHECK(std::abs(m.mean) < 3.0 / std::sqrt(static_cast<double>(coeffs.size())));
}
