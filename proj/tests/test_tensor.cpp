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

#include "core/masks.hpp"
#include "core/tensor.hpp"
#include "support.hpp"

using namespace wsdt;
using test::grad_check;

namespace {

MaskView full_mask(int64_t n, std::shared_ptr<std::vector<uint8_t>>& storage) {
    storage = std::make_shared<std::vector<uint8_t>>(static_cast<size_t>(n * n), 1);
    return {storage, n, n};
}

}  // namespace

TEST_CASE("matmul examples") {
    auto eye = Tensor<float>::from({2, 2}, {1, 0, 0, 1});
    auto prod = matmul(eye, eye);
    CHECK(prod.values() == std::vector<float>{1, 0, 0, 1});

    auto a = Tensor<float>::from({2, 2}, {1, 2, 3, 4});
    auto b = Tensor<float>::from({2, 1}, {1, 1});
    auto y = matmul(a, b);
    CHECK(y.shape() == Shape{2, 1});
    CHECK(y.values()[0] == doctest::Approx(3));
    CHECK(y.values()[1] == doctest::Approx(7));

    CHECK_THROWS_AS(matmul(a, Tensor<float>::from({3, 1}, {1, 1, 1})), DimensionError);
}

TEST_CASE("matmul scalar product rule gradients") {
    auto a = Tensor<double>::param({1, 1}, {2.0});
    auto b = Tensor<double>::param({1, 1}, {3.0});
    auto y = matmul(a, b);
    backward(y);
    CHECK(a.grad()[0] == doctest::Approx(3.0));
    CHECK(b.grad()[0] == doctest::Approx(2.0));
}

TEST_CASE("backward on sum gives all-ones gradient") {
    auto x = Tensor<double>::param({2, 3}, {1, -2, 3, 4, 0.5, -1});
    auto s = sum(x);
    backward(s);
    for (double g : x.grad()) CHECK(g == doctest::Approx(1.0));
}

TEST_CASE("backward of x^2 at 3 gives 6") {
    auto x = Tensor<double>::param({1}, {3.0});
    auto y = mul(x, x);
    backward(y);
    CHECK(x.grad()[0] == doctest::Approx(6.0));
}

TEST_CASE("backward rejects non-scalar loss") {
    auto x = Tensor<double>::param({2}, {1.0, 2.0});
    auto y = mul(x, x);
    CHECK_THROWS_AS(backward(y), ContractError);
}

TEST_CASE("layer_norm examples") {
    int d = 4;
    auto ones = Tensor<float>::full({d}, 1.f);
    auto zeros = Tensor<float>::zeros({d});

    // constant row -> zeros under the eps convention
    auto x_const = Tensor<float>::full({1, d}, 2.5f);
    auto y = layer_norm(x_const, ones, zeros);
    for (float v : y.values()) CHECK(v == doctest::Approx(0.f).epsilon(1e-6));

    // [1,-1] stays [1,-1] up to the eps correction
    auto x = Tensor<float>::from({1, 2}, {1.f, -1.f});
    auto ones2 = Tensor<float>::full({2}, 1.f);
    auto zeros2 = Tensor<float>::zeros({2});
    auto y2 = layer_norm(x, ones2, zeros2);
    CHECK(y2.values()[0] == doctest::Approx(1.f).epsilon(1e-4));
    CHECK(y2.values()[1] == doctest::Approx(-1.f).epsilon(1e-4));

    // shift=c makes the output mean c
    Rng rng(11);
    std::vector<float> data;
    for (int i = 0; i < d; ++i) data.push_back(static_cast<float>(rng.normal()));
    auto x3 = Tensor<float>::from({1, d}, std::move(data));
    auto shift = Tensor<float>::full({d}, 0.75f);
    auto y3 = layer_norm(x3, ones, shift);
    double mean = 0;
    for (float v : y3.values()) mean += v;
    mean /= d;
    CHECK(mean == doctest::Approx(0.75).epsilon(1e-5));
}

TEST_CASE("masked_attention examples") {
    // single visible token: output equals v
    std::shared_ptr<std::vector<uint8_t>> store1;
    MaskView m1 = full_mask(1, store1);
    auto q = Tensor<float>::from({1, 2}, {0.3f, -0.7f});
    auto k = Tensor<float>::from({1, 2}, {1.f, 2.f});
    auto v = Tensor<float>::from({1, 2}, {5.f, -4.f});
    auto out = masked_attention(q, k, v, m1);
    CHECK(out.values()[0] == doctest::Approx(5.f));
    CHECK(out.values()[1] == doctest::Approx(-4.f));

    // hiding key 2 from query 1 zeroes that attention weight exactly
    auto vis = std::make_shared<std::vector<uint8_t>>(std::vector<uint8_t>{1, 1, 1, 1, 1, 0, 1, 1, 1});
    MaskView m3{vis, 3, 3};
    Rng rng(5);
    auto scores = Tensor<float>::from({3, 3}, std::vector<float>{
        0.1f, -2.f, 3.f, 0.5f, 1.f, 2.f, -1.f, 0.f, 1.f});
    auto w = masked_softmax(scores, m3);
    CHECK(w.values()[1 * 3 + 2] == 0.0f);  // exact zero
    for (int row = 0; row < 3; ++row) {
        double s = 0;
        for (int col = 0; col < 3; ++col) s += w.values()[row * 3 + col];
        CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
    }

    // uniform logits, all visible, n=4: every weight is 1/4
    std::shared_ptr<std::vector<uint8_t>> store4;
    MaskView m4 = full_mask(4, store4);
    auto flat = masked_softmax(Tensor<float>::full({4, 4}, 0.37f), m4);
    for (float x : flat.values()) CHECK(x == doctest::Approx(0.25f));
}

TEST_CASE("masked_softmax rejects a fully masked query row") {
    auto vis = std::make_shared<std::vector<uint8_t>>(std::vector<uint8_t>{1, 1, 0, 0});
    MaskView m{vis, 2, 2};
    CHECK_THROWS_AS(masked_softmax(Tensor<float>::zeros({2, 2}), m), ConfigError);
}

TEST_CASE("determinism: identical inputs give bit-identical outputs and gradients") {
    auto run = [] {
        Rng rng(123);
        auto a = Tensor<double>::param({8, 8}, test::random_values(64, rng));
        auto b = Tensor<double>::param({8, 8}, test::random_values(64, rng));
        auto loss = mean(abs(matmul(gelu(a), silu(b))));
        backward(loss);
        std::vector<double> out{loss.item()};
        out.insert(out.end(), a.grad().begin(), a.grad().end());
        out.insert(out.end(), b.grad().begin(), b.grad().end());
        return out;
    };
    CHECK(run() == run());
}

TEST_CASE("gradient check: every differentiable op") {
    Rng rng(42);
    double tol = 1e-4;

    SUBCASE("matmul") {
        auto a = Tensor<double>::param({3, 4}, test::random_values(12, rng));
        auto b = Tensor<double>::param({4, 2}, test::random_values(8, rng));
        auto res = grad_check(
            [](const std::vector<Tensor<double>>& xs) { return sum(matmul(xs[0], xs[1])); },
            {a, b});
        CHECK(res.max_rel_err < tol);
    }
    SUBCASE("matmul_nt") {
        auto a = Tensor<double>::param({3, 4}, test::random_values(12, rng));
        auto b = Tensor<double>::param({5, 4}, test::random_values(20, rng));
        auto res = grad_check(
            [](const std::vector<Tensor<double>>& xs) {
                return mean(mul(matmul_nt(xs[0], xs[1]), matmul_nt(xs[0], xs[1])));
            },
            {a, b});
        CHECK(res.max_rel_err < tol);
    }
    SUBCASE("elementwise and broadcasts") {
        auto a = Tensor<double>::param({4, 3}, test::random_values(12, rng));
        auto b = Tensor<double>::param({4, 3}, test::random_values(12, rng));
        auto v = Tensor<double>::param({1, 3}, test::random_values(3, rng));
        auto res = grad_check(
            [](const std::vector<Tensor<double>>& xs) {
                auto y = add(mul(xs[0], xs[1]), sub(xs[0], xs[1]));
                y = mul_rowvec(y, xs[2]);
                y = add_rowvec(y, xs[2]);
                y = lincomb(0.3, y, -1.7, xs[0]);
                return mean(abs(add_scalar(scale(y, 2.0), 0.1)));
            },
            {a, b, v});
        CHECK(res.max_rel_err < tol);
    }
    SUBCASE("activations") {
        auto a = Tensor<double>::param({5, 5}, test::random_values(25, rng));
        auto res = grad_check(
            [](const std::vector<Tensor<double>>& xs) {
                auto y = add(gelu(xs[0]), silu(xs[0]));
                y = add(y, leaky_relu(xs[0], 0.2));
                y = add(y, softplus(xs[0]));
                return sum(y);
            },
            {a});
        CHECK(res.max_rel_err < tol);
    }
    SUBCASE("rownorm") {
        auto a = Tensor<double>::param({4, 6}, test::random_values(24, rng));
        auto w = Tensor<double>::param({4, 6}, test::random_values(24, rng));
        auto res = grad_check(
            [](const std::vector<Tensor<double>>& xs) {
                return sum(mul(rownorm(xs[0]), xs[1]));
            },
            {a, w});
        CHECK(res.max_rel_err < tol);
    }
    SUBCASE("structural ops") {
        auto a = Tensor<double>::param({2, 4}, test::random_values(8, rng));
        auto b = Tensor<double>::param({3, 4}, test::random_values(12, rng));
        auto res = grad_check(
            [](const std::vector<Tensor<double>>& xs) {
                auto cat_r = concat_rows<double>({xs[0], xs[1]});
                auto left = slice_cols(cat_r, 0, 2);
                auto right = slice_cols(cat_r, 2, 2);
                auto swapped = concat_cols<double>({right, left});
                auto mid = slice_rows(swapped, 1, 3);
                return mean(mul(mid, mid));
            },
            {a, b});
        CHECK(res.max_rel_err < tol);
    }
    SUBCASE("gather and scatter") {
        auto a = Tensor<double>::param({2, 3}, test::random_values(6, rng));
        auto fwd = std::make_shared<const std::vector<int64_t>>(
            std::vector<int64_t>{5, 0, 3, 1, 2, 4});
        auto res = grad_check(
            [fwd](const std::vector<Tensor<double>>& xs) {
                auto g = gather(xs[0], fwd, {3, 2});
                auto s = scatter(g, fwd, {2, 3});
                return mean(mul(s, s));
            },
            {a});
        CHECK(res.max_rel_err < tol);
    }
    SUBCASE("masked attention and reductions") {
        auto vis = std::make_shared<std::vector<uint8_t>>(
            std::vector<uint8_t>{1, 0, 1, 1, 1, 0, 1, 1, 1});
        MaskView m{vis, 3, 3};
        auto q = Tensor<double>::param({3, 4}, test::random_values(12, rng));
        auto k = Tensor<double>::param({3, 4}, test::random_values(12, rng));
        auto v = Tensor<double>::param({3, 4}, test::random_values(12, rng));
        auto res = grad_check(
            [m](const std::vector<Tensor<double>>& xs) {
                return sum(mean_rows(masked_attention(xs[0], xs[1], xs[2], m)));
            },
            {q, k, v});
        CHECK(res.max_rel_err < tol);
    }
}

TEST_CASE("2-layer MLP end-to-end gradient check") {
    Rng rng(7);
    auto x = Tensor<double>::param({4, 6}, test::random_values(24, rng));
    auto w1 = Tensor<double>::param({6, 8}, test::random_values(48, rng));
    auto b1 = Tensor<double>::param({1, 8}, test::random_values(8, rng));
    auto w2 = Tensor<double>::param({8, 3}, test::random_values(24, rng));
    auto b2 = Tensor<double>::param({1, 3}, test::random_values(3, rng));
    auto res = grad_check(
        [](const std::vector<Tensor<double>>& xs) {
            auto h = gelu(add_rowvec(matmul(xs[0], xs[1]), xs[2]));
            auto y = add_rowvec(matmul(h, xs[3]), xs[4]);
            return mean(mul(y, y));
        },
        {x, w1, b1, w2, b2});
    CHECK(res.max_rel_err < 1e-4);
    CHECK(res.checked == 24 + 48 + 8 + 24 + 3);
}
