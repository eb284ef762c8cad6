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

// Test-only oracles. The finite-difference checker is the independent
// gradient reference: it re-evaluates the scalar function under +/-h
// perturbations of each input value and never touches the autodiff path it
// verifies.

#include <cmath>
#include <functional>
#include <vector>

#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace wsdt::test {

inline std::vector<double> random_values(int64_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(static_cast<size_t>(n));
    for (auto& e : v) e = rng.uniform(lo, hi);
    return v;
}

struct GradCheckResult {
    double max_rel_err = 0.0;
    double max_abs_err = 0.0;
    int64_t checked = 0;
};

/// Central finite differences against analytic gradients for a scalar
/// function of several double tensors. `fn` must rebuild its graph from the
/// leaf tensors on every call.
inline GradCheckResult grad_check(
    const std::function<Tensor<double>(const std::vector<Tensor<double>>&)>& fn,
    std::vector<Tensor<double>> leaves, double h = 1e-5, double denom_floor = 1e-6) {
    Tensor<double> loss = fn(leaves);
    backward(loss);
    std::vector<std::vector<double>> analytic;
    for (auto& leaf : leaves) analytic.push_back(leaf.grad());

    GradCheckResult res;
    for (size_t li = 0; li < leaves.size(); ++li) {
        auto& values = leaves[li].mutable_values();
        for (size_t j = 0; j < values.size(); ++j) {
            double orig = values[j];
            values[j] = orig + h;
            double up;
            {
                NoGradGuard guard;
                up = fn(leaves).item();
            }
            values[j] = orig - h;
            double down;
            {
                NoGradGuard guard;
                down = fn(leaves).item();
            }
            values[j] = orig;
            double fd = (up - down) / (2.0 * h);
            double an = analytic[li][j];
            double abs_err = std::abs(fd - an);
            double rel = abs_err / std::max({std::abs(fd), std::abs(an), denom_floor});
            res.max_rel_err = std::max(res.max_rel_err, rel);
            res.max_abs_err = std::max(res.max_abs_err, abs_err);
            ++res.checked;
        }
    }
    return res;
}

}  // namespace wsdt::test
