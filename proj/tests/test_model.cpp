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

#include "core/model.hpp"
#include "support.hpp"

using namespace wsdt;

namespace {

/// 8x8 HR at 2x (J=1), D=16, depth 1/1 - the smallest exercisable model.
ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.embed_dim = 16;
    cfg.n_heads = 2;
    cfg.depth_le = 1;
    cfg.depth_hd = 1;
    cfg.mlp_ratio = 2;
    cfg.p_min = 2;
    cfg.lr_patch = 2;
    cfg.t_steps = 4;
    cfg.hr_size = 8;
    cfg.upscale = 2;
    cfg.channels = 3;
    return cfg;
}

template <typename T>
Tensor<T> random_tensor(Shape shape, Rng& rng, double stddev = 1.0) {
    std::vector<T> v(static_cast<size_t>(shape_numel(shape)));
    for (auto& e : v) e = static_cast<T>(stddev * rng.normal());
    return Tensor<T>::from(std::move(shape), std::move(v));
}

}  // namespace

TEST_CASE("timestep sinusoid: t=0 gives the [0...,1...] pattern") {
    std::vector<double> s = timestep_sinusoid(0.0, 16);
    for (int i = 0; i < 8; ++i) CHECK(s[i] == doctest::Approx(0.0));
    for (int i = 8; i < 16; ++i) CHECK(s[i] == doctest::Approx(1.0));
}

TEST_CASE("timestep embeddings are distinct per t") {
    WsdtModel<double> model(tiny_config(), 3);
    std::vector<std::vector<double>> embs;
    for (int t = 0; t < 4; ++t) embs.push_back(model.timestep_embedding(t).values());
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) CHECK(embs[a] != embs[b]);
    CHECK_THROWS_AS(model.timestep_embedding(4), ContractError);
    CHECK_THROWS_AS(model.timestep_embedding(-1), ContractError);
}

TEST_CASE("freshly initialized decoder trunks are the identity map") {
    WsdtModel<double> model(tiny_config(), 7);
    const PatchPlan& plan = model.plan();
    Rng rng(5);
    auto lr_tok = random_tensor<double>({plan.streams[0].tokens(), 16}, rng);
    auto lf_tok = random_tensor<double>({plan.streams[1].tokens(), 16}, rng);

    auto [out_lr, out_lf] = model.ledec_forward(lr_tok, lf_tok, 2);
    CHECK(out_lr.values() == lr_tok.values());
    CHECK(out_lf.values() == lf_tok.values());

    std::vector<Tensor<double>> hf;
    for (size_t i = 2; i < plan.streams.size(); ++i)
        hf.push_back(random_tensor<double>({plan.streams[i].tokens(), 16}, rng));
    auto [h_lr, h_lf, h_hf] = model.hddec_forward(lr_tok, lf_tok, hf, 1);
    CHECK(h_lr.values() == lr_tok.values());
    CHECK(h_lf.values() == lf_tok.values());
    for (size_t i = 0; i < hf.size(); ++i) CHECK(h_hf[i].values() == hf[i].values());
}

TEST_CASE("trans_block with zero modulation weights is a plain identity") {
    // zero temb + zero modulation MLP -> unit scale, zero shift, zero gate
    Rng rng(9);
    const int d = 16, n = 5;
    BlockP<double> p;
    auto mk = [&](int64_t in, int64_t out, bool zero) {
        LinearP<double> l;
        l.w = zero ? Tensor<double>::zeros({in, out}) : random_tensor<double>({in, out}, rng, 0.3);
        l.b = Tensor<double>::zeros({1, out});
        return l;
    };
    p.wq = mk(d, d, false);
    p.wk = mk(d, d, false);
    p.wv = mk(d, d, false);
    p.wo = mk(d, d, false);
    p.mlp_in = mk(d, 2 * d, false);
    p.mlp_out = mk(2 * d, d, false);
    p.adaln = mk(d, 6 * d, true);
    auto x = random_tensor<double>({n, d}, rng);
    auto temb = Tensor<double>::zeros({1, d});
    SegmentLayout layout;
    layout.n_lr = n;
    AttentionMask mask = build_m_low(layout);
    auto y = trans_block(x, mask.view(), temb, p, 2);
    CHECK(y.values() == x.values());
}

TEST_CASE("mask semantics inside the decoders (randomized parameters)") {
    ModelConfig cfg = tiny_config();
    WsdtModel<double> model(cfg, 11);
    Rng prng(123);
    model.params().randomize_all(prng, 0.2);
    const PatchPlan& plan = model.plan();
    const int d = cfg.embed_dim;
    Rng rng(6);

    auto lr_tok = random_tensor<double>({plan.streams[0].tokens(), d}, rng);
    auto lf_tok = random_tensor<double>({plan.streams[1].tokens(), d}, rng);
    std::vector<Tensor<double>> hf;
    for (size_t i = 2; i < plan.streams.size(); ++i)
        hf.push_back(random_tensor<double>({plan.streams[i].tokens(), d}, rng));

    SUBCASE("LEDec: LR outputs are bit-identical under any LF perturbation") {
        auto [lr0, lf0] = model.ledec_forward(lr_tok, lf_tok, 1);
        for (int64_t tok = 0; tok < lf_tok.dim(0); ++tok) {
            auto bumped = lf_tok.detach();
            bumped.mutable_values()[tok * d + 3] += 0.5;
            auto [lr1, lf1] = model.ledec_forward(lr_tok, bumped, 1);
            CHECK(lr1.values() == lr0.values());
            CHECK(lf1.values() != lf0.values());
        }
    }

    SUBCASE("LEDec: LR perturbation reaches the LF outputs") {
        auto [lr0, lf0] = model.ledec_forward(lr_tok, lf_tok, 1);
        auto bumped = lr_tok.detach();
        bumped.mutable_values()[2] += 0.25;
        auto [lr1, lf1] = model.ledec_forward(bumped, lf_tok, 1);
        double max_delta = 0;
        for (size_t i = 0; i < lf0.values().size(); ++i)
            max_delta = std::max(max_delta, std::abs(lf1.values()[i] - lf0.values()[i]));
        CHECK(max_delta > 0.0);
    }

    SUBCASE("HDDec: LF perturbations never reach HF outputs (full depth)") {
        auto [l0, f0, h0] = model.hddec_forward(lr_tok, lf_tok, hf, 2);
        for (int64_t tok = 0; tok < lf_tok.dim(0); ++tok) {
            auto bumped = lf_tok.detach();
            bumped.mutable_values()[tok * d] += 1.0;
            auto [l1, f1, h1] = model.hddec_forward(lr_tok, bumped, hf, 2);
            for (size_t s = 0; s < h0.size(); ++s) CHECK(h1[s].values() == h0[s].values());
            CHECK(f1.values() != f0.values());
        }
    }

    SUBCASE("HDDec single block: LR perturbation leaves LF rows unchanged") {
        ModelConfig one = cfg;
        one.depth_hd = 1;
        WsdtModel<double> m1(one, 11);
        Rng r2(99);
        m1.params().randomize_all(r2, 0.2);
        auto [l0, f0, h0] = m1.hddec_forward(lr_tok, lf_tok, hf, 1);
        auto bumped = lr_tok.detach();
        bumped.mutable_values()[0] += 0.7;
        auto [l1, f1, h1] = m1.hddec_forward(bumped, lf_tok, hf, 1);
        CHECK(f1.values() == f0.values());  // LF cannot see LR in one hop
        // but HF can (HF attends to LR)
        bool hf_changed = false;
        for (size_t s = 0; s < h0.size(); ++s) hf_changed |= h1[s].values() != h0[s].values();
        CHECK(hf_changed);
    }
}

TEST_CASE("wsdt_forward shape, zero-head init, and determinism") {
    ModelConfig cfg = tiny_config();
    WsdtModel<float> model(cfg, 21);
    Rng rng(33);
    auto noisy = random_tensor<float>({8, 8, 3}, rng);
    auto lr = random_tensor<float>({4, 4, 3}, rng);

    auto out = model.forward(noisy, lr, 1);
    CHECK(out.shape() == Shape{8, 8, 3});
    // zero-initialized heads -> zero image
    for (float v : out.values()) CHECK(v == 0.f);

    // determinism: same inputs, bit-identical outputs
    Rng prng(3);
    model.params().randomize_all(prng, 0.1);
    auto a = model.forward(noisy, lr, 2);
    auto b = model.forward(noisy, lr, 2);
    CHECK(a.values() == b.values());
    CHECK(a.values() != out.values());
}

TEST_CASE("end-to-end gradient spot check (f64, random subset of parameters)") {
    ModelConfig cfg = tiny_config();
    WsdtModel<double> model(cfg, 2);
    Rng prng(17);
    model.params().randomize_all(prng, 0.2);

    Rng rng(4);
    auto noisy = random_tensor<double>({8, 8, 3}, rng, 0.5);
    auto lr = random_tensor<double>({4, 4, 3}, rng, 0.5);
    auto target = random_tensor<double>({8, 8, 3}, rng, 0.5);

    auto loss_fn = [&] {
        auto out = model.forward(noisy, lr, 1);
        return mean(abs(sub(out, target)));
    };
    auto loss = loss_fn();
    backward(loss);

    Rng pick(77);
    const double h = 1e-5;
    int checked = 0;
    for (const auto& [name, tensor] : model.params().entries()) {
        if (pick.uniform() > 0.04) continue;  // ~4% of parameter tensors
        Tensor<double> t = tensor;
        size_t j = static_cast<size_t>(pick.below(static_cast<uint64_t>(t.numel())));
        double orig = t.values()[j];
        double analytic = t.grad()[j];
        double up, down;
        {
            NoGradGuard g;
            t.mutable_values()[j] = orig + h;
            up = loss_fn().item();
            t.mutable_values()[j] = orig - h;
            down = loss_fn().item();
            t.mutable_values()[j] = orig;
        }
        double fd = (up - down) / (2 * h);
        double rel = std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-6});
        CHECK(rel < 1e-3);
        ++checked;
    }
    CHECK(checked > 3);
}

TEST_CASE("set_masks validates sizes") {
    WsdtModel<float> model(tiny_config(), 1);
    SegmentLayout wrong;
    wrong.n_lr = 1;
    wrong.n_lf = 1;
    wrong.hf_level_counts = {1};
    CHECK_THROWS_AS(model.set_masks(build_m_low({1, 1, {}}), build_m_high(wrong)), ConfigError);
}
