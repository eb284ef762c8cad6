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

#include <string>
#include <unordered_map>
#include <vector>

#include "rng.hpp"
#include "tensor.hpp"

namespace wsdt {

enum class Init { Zeros, XavierUniform, Normal002 };

/// Ordered collection of named trainable leaves. Creation order is fixed by
/// the model constructor, which makes initialization, optimizer state and
/// checkpoint layout deterministic.
template <typename T>
class ParamStore {
public:
    Tensor<T> create(const std::string& name, Shape shape, Init init, Rng& rng) {
        if (index_.count(name)) throw ContractError(cat("duplicate parameter name: ", name));
        int64_t n = shape_numel(shape);
        std::vector<T> data(static_cast<size_t>(n), T(0));
        switch (init) {
            case Init::Zeros:
                break;
            case Init::XavierUniform: {
                int64_t fan_in = shape.size() == 2 ? shape[0] : n;
                int64_t fan_out = shape.size() == 2 ? shape[1] : n;
                double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
                for (auto& v : data) v = static_cast<T>(rng.uniform(-limit, limit));
                break;
            }
            case Init::Normal002:
                for (auto& v : data) v = static_cast<T>(0.02 * rng.normal());
                break;
        }
        Tensor<T> t = Tensor<T>::param(std::move(shape), std::move(data));
        index_[name] = entries_.size();
        entries_.push_back({name, t});
        return t;
    }

    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    Tensor<T>& at(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end()) throw ContractError(cat("unknown parameter: ", name));
        return entries_[it->second].second;
    }

    const std::vector<std::pair<std::string, Tensor<T>>>& entries() const { return entries_; }

    void zero_grad() {
        for (auto& [name, t] : entries_) t.zero_grad();
    }

    int64_t total_values() const {
        int64_t n = 0;
        for (const auto& [name, t] : entries_) n += t.numel();
        return n;
    }

    /// Overwrites every parameter with N(0, stddev) draws. Test scaffolding:
    /// sensitivity and gradient checks need the zero-initialized gates and
    /// heads replaced by generic values.
    void randomize_all(Rng& rng, double stddev) {
        for (auto& [name, t] : entries_)
            for (auto& v : t.mutable_values()) v = static_cast<T>(stddev * rng.normal());
    }

private:
    std::vector<std::pair<std::string, Tensor<T>>> entries_;
    std::unordered_map<std::string, size_t> index_;
};

}  // namespace wsdt
