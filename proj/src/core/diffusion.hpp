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

// Few-step Gaussian diffusion in the pixel domain. alpha_bar[t] is the
// cumulative signal coefficient of q(I_t | I_0) = N(sqrt(ab_t) I_0,
// (1-ab_t) I). All noise is injected on pixels; the orthonormal wavelet
// transform maps it to spectrum noise with identical statistics.

#include <cmath>
#include <vector>

#include "common.hpp"
#include "image.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace wsdt {

struct NoiseSchedule {
    int steps = 0;
    std::vector<double> alpha_bar;  // size == steps, strictly decreasing, in (0,1)

    void validate() const {
        if (steps < 1) throw ConfigError(cat("schedule steps must be >= 1, got ", steps));
        if (static_cast<int>(alpha_bar.size()) != steps)
            throw ConfigError(cat("schedule has ", alpha_bar.size(), " alpha_bar entries for ",
                                  steps, " steps"));
        for (int t = 0; t < steps; ++t) {
            if (!(alpha_bar[t] > 0.0 && alpha_bar[t] < 1.0))
                throw ConfigError(cat("alpha_bar[", t, "] = ", alpha_bar[t], " outside (0,1)"));
            if (t > 0 && !(alpha_bar[t] < alpha_bar[t - 1]))
                throw ConfigError(cat("alpha_bar must be strictly decreasing at t = ", t));
        }
        if (steps >= 2) {
            if (alpha_bar.front() < 0.99)
                throw ConfigError(cat("alpha_bar[0] = ", alpha_bar.front(),
                                      " must be >= 0.99 (near-clean first step)"));
            if (alpha_bar.back() > 0.05)
                throw ConfigError(cat("alpha_bar[T-1] = ", alpha_bar.back(),
                                      " must be <= 0.05 (near-noise last step)"));
        }
    }

    /// Per-step signal ratio alpha_t = ab_t / ab_{t-1}, defined for t >= 1.
    double alpha(int t) const { return alpha_bar[t] / alpha_bar[t - 1]; }
    double beta(int t) const { return 1.0 - alpha(t); }
    /// Posterior variance of q(I_{t-1} | I_t, I_0).
    double posterior_var(int t) const {
        return (1.0 - alpha_bar[t - 1]) / (1.0 - alpha_bar[t]) * beta(t);
    }

    /// T=4 few-step default: sqrt(alpha_bar) = [0.99, 0.8, 0.4, 0.1].
    static NoiseSchedule default_few_step() {
        NoiseSchedule s;
        s.steps = 4;
        s.alpha_bar = {0.9801, 0.64, 0.16, 0.01};
        s.validate();
        return s;
    }
};

namespace detail {
template <typename T>
Tensor<T> noise_like(const Shape& shape, Rng& rng) {
    std::vector<T> v(static_cast<size_t>(shape_numel(shape)));
    for (auto& e : v) e = static_cast<T>(rng.normal());
    return Tensor<T>::from(shape, std::move(v));
}
}  // namespace detail

/// Draws I_t ~ q(I_t | I_0) = N(sqrt(ab_t) I_0, (1-ab_t) I).
template <typename T>
Tensor<T> forward_sample(const Tensor<T>& x0, int t, const NoiseSchedule& sched, Rng& rng) {
    if (t < 0 || t >= sched.steps)
        throw ContractError(cat("forward_sample: t = ", t, " outside [0,", sched.steps, ")"));
    double ab = sched.alpha_bar[t];
    Tensor<T> eps = detail::noise_like<T>(x0.shape(), rng);
    return lincomb(static_cast<T>(std::sqrt(ab)), x0, static_cast<T>(std::sqrt(1.0 - ab)), eps);
}

/// Draws I_{t-1} ~ q(I_{t-1} | I_t, x0_hat), the Gaussian posterior of the
/// forward chain with the clean image replaced by its estimate. At
/// t - 1 == 0 the mean is returned without noise. Differentiable in both
/// tensor arguments.
template <typename T>
Tensor<T> posterior_sample(const Tensor<T>& xt, const Tensor<T>& x0_hat, int t,
                           const NoiseSchedule& sched, Rng& rng) {
    if (t < 1 || t >= sched.steps)
        throw ContractError(cat("posterior_sample: t = ", t, " outside [1,", sched.steps, ")"));
    double ab_t = sched.alpha_bar[t];
    double ab_prev = sched.alpha_bar[t - 1];
    double beta = sched.beta(t);
    double coef_x0 = std::sqrt(ab_prev) * beta / (1.0 - ab_t);
    double coef_xt = std::sqrt(sched.alpha(t)) * (1.0 - ab_prev) / (1.0 - ab_t);
    Tensor<T> mean =
        lincomb(static_cast<T>(coef_x0), x0_hat, static_cast<T>(coef_xt), xt);
    if (t - 1 == 0) return mean;
    double sigma = std::sqrt(sched.posterior_var(t));
    Tensor<T> eps = detail::noise_like<T>(mean.shape(), rng);
    return lincomb(T(1), mean, static_cast<T>(sigma), eps);
}

/// Conditional SR sampling loop. lr is a pixel tensor in [-1,1]; the result
/// is the clean-image estimate of the final step, clamped to [-1,1].
/// Runs exactly T model evaluations: t = T-1 .. 1 with posterior sampling in
/// between, then a final evaluation at t = 0 whose x0 estimate is returned.
template <typename T>
std::vector<T> sr_sample(const WsdtModel<T>& model, const Tensor<T>& lr,
                         const NoiseSchedule& sched, Rng& rng) {
    if (sched.steps != model.config().t_steps)
        throw ConfigError(cat("sr_sample: schedule steps ", sched.steps,
                              " do not match model t_steps ", model.config().t_steps));
    const int hr = model.config().hr_size;
    const int c = model.config().channels;
    if (lr.rank() != 3 || lr.dim(0) != model.config().lr_size() ||
        lr.dim(1) != model.config().lr_size() || lr.dim(2) != c)
        throw ConfigError(cat("sr_sample: LR ", shape_str(lr.shape()), " does not match model lr ",
                              model.config().lr_size(), "x", model.config().lr_size(), "x", c));
    NoGradGuard no_grad;
    Tensor<T> x = detail::noise_like<T>({hr, hr, c}, rng);
    for (int t = sched.steps - 1; t >= 1; --t) {
        Tensor<T> x0_hat = model.forward(x, lr, t);
        x = posterior_sample(x, x0_hat, t, sched, rng);
    }
    Tensor<T> x0_hat = model.forward(x, lr, 0);
    std::vector<T> out = x0_hat.values();
    for (auto& v : out) v = std::min(T(1), std::max(T(-1), v));
    return out;
}

}  // namespace wsdt
