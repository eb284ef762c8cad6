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

#include <cmath>
#include <vector>

#include "param_store.hpp"
#include "tensor.hpp"

namespace wsdt {

/// Adam with the GAN-style moment defaults (beta1 = 0.5, beta2 = 0.9).
template <typename T>
class Adam {
public:
    Adam(std::vector<Tensor<T>> params, double lr, double beta1 = 0.5, double beta2 = 0.9,
         double eps = 1e-8)
        : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        m_.reserve(params_.size());
        v_.reserve(params_.size());
        for (const auto& p : params_) {
            m_.emplace_back(p.numel(), T(0));
            v_.emplace_back(p.numel(), T(0));
        }
    }

    static Adam for_store(ParamStore<T>& store, double lr) {
        std::vector<Tensor<T>> params;
        for (auto& [name, t] : store.entries()) params.push_back(t);
        return Adam(std::move(params), lr);
    }

    void step() {
        ++t_;
        double bc1 = 1.0 - std::pow(beta1_, t_);
        double bc2 = 1.0 - std::pow(beta2_, t_);
        for (size_t i = 0; i < params_.size(); ++i) {
            auto& value = params_[i].mutable_values();
            const auto& grad = params_[i].grad();
            auto& m = m_[i];
            auto& v = v_[i];
            for (size_t j = 0; j < value.size(); ++j) {
                double g = static_cast<double>(grad[j]);
                double mj = beta1_ * m[j] + (1.0 - beta1_) * g;
                double vj = beta2_ * v[j] + (1.0 - beta2_) * g * g;
                m[j] = static_cast<T>(mj);
                v[j] = static_cast<T>(vj);
                value[j] -= static_cast<T>(lr_ * (mj / bc1) / (std::sqrt(vj / bc2) + eps_));
            }
        }
    }

    void zero_grad() {
        for (auto& p : params_) p.zero_grad();
    }

    int64_t step_count() const { return t_; }
    void set_step_count(int64_t t) { t_ = t; }
    std::vector<std::vector<T>>& moments_m() { return m_; }
    std::vector<std::vector<T>>& moments_v() { return v_; }
    const std::vector<Tensor<T>>& params() const { return params_; }

private:
    std::vector<Tensor<T>> params_;
    std::vector<std::vector<T>> m_, v_;
    double lr_, beta1_, beta2_, eps_;
    int64_t t_ = 0;
};

}  // namespace wsdt
