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

// Reverse-mode autodiff over dense row-major tensors, define-by-run style.
// Each operation allocates an output node that records its parents and a
// closure pulling the output gradient back into parent gradients;
// backward() replays the implicit tape in reverse topological order.
//
// The op set is deliberately small: matrix products (BLAS-backed),
// elementwise arithmetic, trailing-dimension affine broadcasts, row
// normalization, masked softmax, a handful of activations, and
// gather/scatter index maps. There is no general broadcasting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

#include <cblas.h>

#include "common.hpp"
#include "rng.hpp"

extern "C" void openblas_set_num_threads(int);

namespace wsdt {

using Shape = std::vector<int64_t>;

inline std::string shape_str(const Shape& s) {
    std::string out = "[";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

inline int64_t shape_numel(const Shape& s) {
    int64_t n = 1;
    for (int64_t e : s) n *= e;
    return n;
}

namespace detail {

// GEMM reproducibility: pin BLAS to one thread before the first call.
inline const int blas_single_thread = [] {
    openblas_set_num_threads(1);
    return 1;
}();

inline void gemm(bool ta, bool tb, int64_t m, int64_t n, int64_t k, float alpha, const float* a,
                 int64_t lda, const float* b, int64_t ldb, float beta, float* c, int64_t ldc) {
    cblas_sgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans, tb ? CblasTrans : CblasNoTrans,
                static_cast<int>(m), static_cast<int>(n), static_cast<int>(k), alpha, a,
                static_cast<int>(lda), b, static_cast<int>(ldb), beta, c, static_cast<int>(ldc));
}

inline void gemm(bool ta, bool tb, int64_t m, int64_t n, int64_t k, double alpha, const double* a,
                 int64_t lda, const double* b, int64_t ldb, double beta, double* c, int64_t ldc) {
    cblas_dgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans, tb ? CblasTrans : CblasNoTrans,
                static_cast<int>(m), static_cast<int>(n), static_cast<int>(k), alpha, a,
                static_cast<int>(lda), b, static_cast<int>(ldb), beta, c, static_cast<int>(ldc));
}

template <typename T>
struct Node {
    Shape shape;
    std::vector<T> value;
    std::vector<T> grad;  // allocated on demand, same extent as value
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node<T>>> parents;
    std::function<void()> backprop;

    void ensure_grad() {
        if (grad.empty()) grad.assign(value.size(), T(0));
    }
};

}  // namespace detail

namespace detail {
inline bool& grad_mode_flag() {
    thread_local bool enabled = true;
    return enabled;
}
}  // namespace detail

/// Scoped suppression of graph construction (inference / finite-difference
/// evaluation). Ops built under the guard are plain value computations.
struct NoGradGuard {
    bool prev;
    NoGradGuard() : prev(detail::grad_mode_flag()) { detail::grad_mode_flag() = false; }
    ~NoGradGuard() { detail::grad_mode_flag() = prev; }
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;
};

/// Non-owning view of a boolean visibility matrix (query row, key column).
/// Storage is shared so autodiff closures can keep it alive.
struct MaskView {
    std::shared_ptr<const std::vector<uint8_t>> visible;
    int64_t rows = 0;
    int64_t cols = 0;

    uint8_t at(int64_t q, int64_t k) const { return (*visible)[q * cols + k]; }
};

template <typename T>
class Tensor {
public:
    Tensor() = default;

    static Tensor from(Shape shape, std::vector<T> data) {
        if (shape_numel(shape) != static_cast<int64_t>(data.size()))
            throw DimensionError(cat("tensor data length ", data.size(), " does not match shape ",
                                     shape_str(shape)));
        Tensor t;
        t.node_ = std::make_shared<detail::Node<T>>();
        t.node_->shape = std::move(shape);
        t.node_->value = std::move(data);
        return t;
    }

    static Tensor zeros(Shape shape) {
        std::vector<T> d(static_cast<size_t>(shape_numel(shape)), T(0));
        return from(std::move(shape), std::move(d));
    }

    static Tensor full(Shape shape, T v) {
        std::vector<T> d(static_cast<size_t>(shape_numel(shape)), v);
        return from(std::move(shape), std::move(d));
    }

    static Tensor scalar(T v) { return from({1}, {v}); }

    /// Leaf that participates in gradient accumulation.
    static Tensor param(Shape shape, std::vector<T> data) {
        Tensor t = from(std::move(shape), std::move(data));
        t.node_->requires_grad = true;
        return t;
    }

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    int64_t numel() const { return static_cast<int64_t>(node_->value.size()); }
    int64_t dim(size_t i) const { return node_->shape[i]; }
    size_t rank() const { return node_->shape.size(); }
    bool requires_grad() const { return node_->requires_grad; }

    const std::vector<T>& values() const { return node_->value; }
    /// In-place mutation; reserved for leaves between graph lifetimes
    /// (optimizer updates) and for buffer-style construction.
    std::vector<T>& mutable_values() { return node_->value; }

    const std::vector<T>& grad() const {
        node_->ensure_grad();
        return node_->grad;
    }
    std::vector<T>& mutable_grad() {
        node_->ensure_grad();
        return node_->grad;
    }
    void zero_grad() {
        if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), T(0));
    }

    T item() const {
        if (numel() != 1) throw ContractError(cat("item() on non-scalar tensor ", shape_str(shape())));
        return node_->value[0];
    }

    /// Constant copy cut off from the graph.
    Tensor detach() const { return from(node_->shape, node_->value); }

    std::shared_ptr<detail::Node<T>> node() const { return node_; }

private:
    std::shared_ptr<detail::Node<T>> node_;
};

namespace detail {

template <typename T>
Tensor<T> make_node(Shape shape, std::vector<T> value,
                    std::vector<std::shared_ptr<Node<T>>> parents) {
    Tensor<T> out = Tensor<T>::from(std::move(shape), std::move(value));
    auto n = out.node();
    if (grad_mode_flag()) {
        for (const auto& p : parents)
            if (p->requires_grad) n->requires_grad = true;
    }
    if (n->requires_grad) n->parents = std::move(parents);
    return out;
}

template <typename T>
void check_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
    if (a.shape() != b.shape())
        throw DimensionError(
            cat(op, ": shape mismatch ", shape_str(a.shape()), " vs ", shape_str(b.shape())));
}

// Last-dimension extent, with leading dims flattened into rows.
template <typename T>
std::pair<int64_t, int64_t> rows_cols(const Tensor<T>& x, const char* op) {
    if (x.rank() < 1 || x.dim(x.rank() - 1) == 0)
        throw DimensionError(cat(op, ": needs a nonzero trailing dimension, got ",
                                 shape_str(x.shape())));
    int64_t d = x.dim(x.rank() - 1);
    return {x.numel() / d, d};
}

template <typename T>
void check_rowvec(const Tensor<T>& v, int64_t d, const char* op) {
    if (v.numel() != d)
        throw DimensionError(cat(op, ": broadcast vector ", shape_str(v.shape()),
                                 " does not match trailing dimension ", d));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// elementwise ops

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    detail::check_same_shape(a, b, "add");
    std::vector<T> v(a.values());
    const auto& bv = b.values();
    for (size_t i = 0; i < v.size(); ++i) v[i] += bv[i];
    auto out = detail::make_node<T>(a.shape(), std::move(v), {a.node(), b.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto an = a.node(), bn = b.node();
        out.node()->backprop = [self, an, bn] {
            if (an->requires_grad) {
                an->ensure_grad();
                for (size_t i = 0; i < self->grad.size(); ++i) an->grad[i] += self->grad[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (size_t i = 0; i < self->grad.size(); ++i) bn->grad[i] += self->grad[i];
            }
        };
    }
    return out;
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    detail::check_same_shape(a, b, "sub");
    std::vector<T> v(a.values());
    const auto& bv = b.values();
    for (size_t i = 0; i < v.size(); ++i) v[i] -= bv[i];
    auto out = detail::make_node<T>(a.shape(), std::move(v), {a.node(), b.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto an = a.node(), bn = b.node();
        out.node()->backprop = [self, an, bn] {
            if (an->requires_grad) {
                an->ensure_grad();
                for (size_t i = 0; i < self->grad.size(); ++i) an->grad[i] += self->grad[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (size_t i = 0; i < self->grad.size(); ++i) bn->grad[i] -= self->grad[i];
            }
        };
    }
    return out;
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    detail::check_same_shape(a, b, "mul");
    std::vector<T> v(a.values());
    const auto& bv = b.values();
    for (size_t i = 0; i < v.size(); ++i) v[i] *= bv[i];
    auto out = detail::make_node<T>(a.shape(), std::move(v), {a.node(), b.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto an = a.node(), bn = b.node();
        out.node()->backprop = [self, an, bn] {
            if (an->requires_grad) {
                an->ensure_grad();
                for (size_t i = 0; i < self->grad.size(); ++i)
                    an->grad[i] += self->grad[i] * bn->value[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (size_t i = 0; i < self->grad.size(); ++i)
                    bn->grad[i] += self->grad[i] * an->value[i];
            }
        };
    }
    return out;
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T c) {
    std::vector<T> v(a.values());
    for (auto& x : v) x *= c;
    auto out = detail::make_node<T>(a.shape(), std::move(v), {a.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto an = a.node();
        out.node()->backprop = [self, an, c] {
            an->ensure_grad();
            for (size_t i = 0; i < self->grad.size(); ++i) an->grad[i] += c * self->grad[i];
        };
    }
    return out;
}

/// ca*a + cb*b with constant coefficients.
template <typename T>
Tensor<T> lincomb(T ca, const Tensor<T>& a, T cb, const Tensor<T>& b) {
    detail::check_same_shape(a, b, "lincomb");
    std::vector<T> v(a.numel());
    const auto& av = a.values();
    const auto& bv = b.values();
    for (size_t i = 0; i < v.size(); ++i) v[i] = ca * av[i] + cb * bv[i];
    auto out = detail::make_node<T>(a.shape(), std::move(v), {a.node(), b.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto an = a.node(), bn = b.node();
        out.node()->backprop = [self, an, bn, ca, cb] {
            if (an->requires_grad) {
                an->ensure_grad();
                for (size_t i = 0; i < self->grad.size(); ++i) an->grad[i] += ca * self->grad[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (size_t i = 0; i < self->grad.size(); ++i) bn->grad[i] += cb * self->grad[i];
            }
        };
    }
    return out;
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& a, T c) {
    std::vector<T> v(a.values());
    for (auto& x : v) x += c;
    auto out = detail::make_node<T>(a.shape(), std::move(v), {a.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto an = a.node();
        out.node()->backprop = [self, an] {
            an->ensure_grad();
            for (size_t i = 0; i < self->grad.size(); ++i) an->grad[i] += self->grad[i];
        };
    }
    return out;
}

// ---------------------------------------------------------------------------
// matrix products

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
        throw DimensionError(
            cat("matmul: incompatible shapes ", shape_str(a.shape()), " vs ", shape_str(b.shape())));
    int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    std::vector<T> v(static_cast<size_t>(m * n), T(0));
    detail::gemm(false, false, m, n, k, T(1), a.values().data(), k, b.values().data(), n, T(0),
                 v.data(), n);
    auto out = detail::make_node<T>({m, n}, std::move(v), {a.node(), b.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto an = a.node(), bn = b.node();
        out.node()->backprop = [self, an, bn, m, n, k] {
            if (an->requires_grad) {
                an->ensure_grad();
                // dA += G * B^T
                detail::gemm(false, true, m, k, n, T(1), self->grad.data(), n, bn->value.data(), n,
                             T(1), an->grad.data(), k);
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                // dB += A^T * G
                detail::gemm(true, false, k, n, m, T(1), an->value.data(), k, self->grad.data(), n,
                             T(1), bn->grad.data(), n);
            }
        };
    }
    return out;
}

/// a @ b^T for row-major operands of shape [m,k] and [n,k].
template <typename T>
Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(1))
        throw DimensionError(cat("matmul_nt: incompatible shapes ", shape_str(a.shape()), " vs ",
                                 shape_str(b.shape())));
    int64_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
    std::vector<T> v(static_cast<size_t>(m * n), T(0));
    detail::gemm(false, true, m, n, k, T(1), a.values().data(), k, b.values().data(), k, T(0),
                 v.data(), n);
    auto out = detail::make_node<T>({m, n}, std::move(v), {a.node(), b.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto an = a.node(), bn = b.node();
        out.node()->backprop = [self, an, bn, m, n, k] {
            if (an->requires_grad) {
                an->ensure_grad();
                // dA += G * B
                detail::gemm(false, false, m, k, n, T(1), self->grad.data(), n, bn->value.data(), k,
                             T(1), an->grad.data(), k);
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                // dB += G^T * A
                detail::gemm(true, false, n, k, m, T(1), self->grad.data(), n, an->value.data(), k,
                             T(1), bn->grad.data(), k);
            }
        };
    }
    return out;
}

// ---------------------------------------------------------------------------
// trailing-dimension broadcasts (the only broadcasting in this engine)

template <typename T>
Tensor<T> add_rowvec(const Tensor<T>& x, const Tensor<T>& v) {
    auto [rows, d] = detail::rows_cols(x, "add_rowvec");
    detail::check_rowvec(v, d, "add_rowvec");
    std::vector<T> out_v(x.values());
    const auto& vv = v.values();
    for (int64_t r = 0; r < rows; ++r)
        for (int64_t j = 0; j < d; ++j) out_v[r * d + j] += vv[j];
    auto out = detail::make_node<T>(x.shape(), std::move(out_v), {x.node(), v.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto xn = x.node(), vn = v.node();
        out.node()->backprop = [self, xn, vn, rows, d] {
            if (xn->requires_grad) {
                xn->ensure_grad();
                for (size_t i = 0; i < self->grad.size(); ++i) xn->grad[i] += self->grad[i];
            }
            if (vn->requires_grad) {
                vn->ensure_grad();
                for (int64_t r = 0; r < rows; ++r)
                    for (int64_t j = 0; j < d; ++j) vn->grad[j] += self->grad[r * d + j];
            }
        };
    }
    return out;
}

template <typename T>
Tensor<T> mul_rowvec(const Tensor<T>& x, const Tensor<T>& v) {
    auto [rows, d] = detail::rows_cols(x, "mul_rowvec");
    detail::check_rowvec(v, d, "mul_rowvec");
    std::vector<T> out_v(x.values());
    const auto& vv = v.values();
    for (int64_t r = 0; r < rows; ++r)
        for (int64_t j = 0; j < d; ++j) out_v[r * d + j] *= vv[j];
    auto out = detail::make_node<T>(x.shape(), std::move(out_v), {x.node(), v.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto xn = x.node(), vn = v.node();
        out.node()->backprop = [self, xn, vn, rows, d] {
            if (xn->requires_grad) {
                xn->ensure_grad();
                for (int64_t r = 0; r < rows; ++r)
                    for (int64_t j = 0; j < d; ++j)
                        xn->grad[r * d + j] += self->grad[r * d + j] * vn->value[j];
            }
            if (vn->requires_grad) {
                vn->ensure_grad();
                for (int64_t r = 0; r < rows; ++r)
                    for (int64_t j = 0; j < d; ++j)
                        vn->grad[j] += self->grad[r * d + j] * xn->value[r * d + j];
            }
        };
    }
    return out;
}

// ---------------------------------------------------------------------------
// normalization

/// Per-row standardization over the trailing dimension: zero mean, unit
/// variance (population, eps inside the square root).
template <typename T>
Tensor<T> rownorm(const Tensor<T>& x, T eps = T(1e-5)) {
    auto [rows, d] = detail::rows_cols(x, "rownorm");
    std::vector<T> v(x.numel());
    auto inv_sigma = std::make_shared<std::vector<T>>(rows);
    const auto& xv = x.values();
    for (int64_t r = 0; r < rows; ++r) {
        T mean = 0;
        for (int64_t j = 0; j < d; ++j) mean += xv[r * d + j];
        mean /= static_cast<T>(d);
        T var = 0;
        for (int64_t j = 0; j < d; ++j) {
            T c = xv[r * d + j] - mean;
            var += c * c;
        }
        var /= static_cast<T>(d);
        T is = T(1) / std::sqrt(var + eps);
        (*inv_sigma)[r] = is;
        for (int64_t j = 0; j < d; ++j) v[r * d + j] = (xv[r * d + j] - mean) * is;
    }
    auto out = detail::make_node<T>(x.shape(), std::move(v), {x.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto xn = x.node();
        out.node()->backprop = [self, xn, inv_sigma, rows, d] {
            xn->ensure_grad();
            for (int64_t r = 0; r < rows; ++r) {
                T g_mean = 0, gy_mean = 0;
                const T* g = self->grad.data() + r * d;
                const T* y = self->value.data() + r * d;
                for (int64_t j = 0; j < d; ++j) {
                    g_mean += g[j];
                    gy_mean += g[j] * y[j];
                }
                g_mean /= static_cast<T>(d);
                gy_mean /= static_cast<T>(d);
                T is = (*inv_sigma)[r];
                for (int64_t j = 0; j < d; ++j)
                    xn->grad[r * d + j] += is * (g[j] - g_mean - y[j] * gy_mean);
            }
        };
    }
    return out;
}

/// Standard layer norm over the trailing dimension: standardize, then apply
/// the affine scale/shift vectors.
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& scale_v, const Tensor<T>& shift_v,
                     T eps = T(1e-5)) {
    return add_rowvec(mul_rowvec(rownorm(x, eps), scale_v), shift_v);
}

// ---------------------------------------------------------------------------
// activations

template <typename T>
Tensor<T> gelu(const Tensor<T>& x) {
    // tanh approximation
    constexpr double kC = 0.7978845608028654;  // sqrt(2/pi)
    constexpr double kA = 0.044715;
    std::vector<T> v(x.numel());
    const auto& xv = x.values();
    for (size_t i = 0; i < v.size(); ++i) {
        double z = static_cast<double>(xv[i]);
        double u = kC * (z + kA * z * z * z);
        v[i] = static_cast<T>(0.5 * z * (1.0 + std::tanh(u)));
    }
    auto out = detail::make_node<T>(x.shape(), std::move(v), {x.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto xn = x.node();
        out.node()->backprop = [self, xn] {
            xn->ensure_grad();
            for (size_t i = 0; i < self->grad.size(); ++i) {
                double z = static_cast<double>(xn->value[i]);
                double u = kC * (z + kA * z * z * z);
                double th = std::tanh(u);
                double du = kC * (1.0 + 3.0 * kA * z * z);
                double dz = 0.5 * (1.0 + th) + 0.5 * z * (1.0 - th * th) * du;
                xn->grad[i] += self->grad[i] * static_cast<T>(dz);
            }
        };
    }
    return out;
}

template <typename T>
Tensor<T> silu(const Tensor<T>& x) {
    std::vector<T> v(x.numel());
    const auto& xv = x.values();
    auto sig = [](double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); };
    for (size_t i = 0; i < v.size(); ++i) {
        double z = static_cast<double>(xv[i]);
        v[i] = static_cast<T>(z * sig(z));
    }
    auto out = detail::make_node<T>(x.shape(), std::move(v), {x.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto xn = x.node();
        out.node()->backprop = [self, xn, sig] {
            xn->ensure_grad();
            for (size_t i = 0; i < self->grad.size(); ++i) {
                double z = static_cast<double>(xn->value[i]);
                double s = sig(z);
                xn->grad[i] += self->grad[i] * static_cast<T>(s * (1.0 + z * (1.0 - s)));
            }
        };
    }
    return out;
}

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, T slope) {
    std::vector<T> v(x.numel());
    const auto& xv = x.values();
    for (size_t i = 0; i < v.size(); ++i) v[i] = xv[i] >= T(0) ? xv[i] : slope * xv[i];
    auto out = detail::make_node<T>(x.shape(), std::move(v), {x.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto xn = x.node();
        out.node()->backprop = [self, xn, slope] {
            xn->ensure_grad();
            for (size_t i = 0; i < self->grad.size(); ++i)
                xn->grad[i] += self->grad[i] * (xn->value[i] >= T(0) ? T(1) : slope);
        };
    }
    return out;
}

/// Numerically stable log(1 + exp(x)).
template <typename T>
Tensor<T> softplus(const Tensor<T>& x) {
    std::vector<T> v(x.numel());
    const auto& xv = x.values();
    for (size_t i = 0; i < v.size(); ++i) {
        double z = static_cast<double>(xv[i]);
        v[i] = static_cast<T>(std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))));
    }
    auto out = detail::make_node<T>(x.shape(), std::move(v), {x.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto xn = x.node();
        out.node()->backprop = [self, xn] {
            xn->ensure_grad();
            for (size_t i = 0; i < self->grad.size(); ++i) {
                double z = static_cast<double>(xn->value[i]);
                double s = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
                xn->grad[i] += self->grad[i] * static_cast<T>(s);
            }
        };
    }
    return out;
}

template <typename T>
Tensor<T> abs(const Tensor<T>& x) {
    std::vector<T> v(x.numel());
    const auto& xv = x.values();
    for (size_t i = 0; i < v.size(); ++i) v[i] = std::abs(xv[i]);
    auto out = detail::make_node<T>(x.shape(), std::move(v), {x.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto xn = x.node();
        out.node()->backprop = [self, xn] {
            xn->ensure_grad();
            for (size_t i = 0; i < self->grad.size(); ++i) {
                T s = xn->value[i] > T(0) ? T(1) : (xn->value[i] < T(0) ? T(-1) : T(0));
                xn->grad[i] += self->grad[i] * s;
            }
        };
    }
    return out;
}

// ---------------------------------------------------------------------------
// reductions

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
    T acc = 0;
    for (T v : x.values()) acc += v;
    auto out = detail::make_node<T>({1}, {acc}, {x.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto xn = x.node();
        out.node()->backprop = [self, xn] {
            xn->ensure_grad();
            for (auto& g : xn->grad) g += self->grad[0];
        };
    }
    return out;
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
    return scale(sum(x), T(1) / static_cast<T>(x.numel()));
}

/// Column means: [n,D] -> [1,D].
template <typename T>
Tensor<T> mean_rows(const Tensor<T>& x) {
    auto [rows, d] = detail::rows_cols(x, "mean_rows");
    std::vector<T> v(static_cast<size_t>(d), T(0));
    const auto& xv = x.values();
    for (int64_t r = 0; r < rows; ++r)
        for (int64_t j = 0; j < d; ++j) v[j] += xv[r * d + j];
    for (auto& e : v) e /= static_cast<T>(rows);
    auto out = detail::make_node<T>({1, d}, std::move(v), {x.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto xn = x.node();
        out.node()->backprop = [self, xn, rows, d] {
            xn->ensure_grad();
            T inv = T(1) / static_cast<T>(rows);
            for (int64_t r = 0; r < rows; ++r)
                for (int64_t j = 0; j < d; ++j) xn->grad[r * d + j] += self->grad[j] * inv;
        };
    }
    return out;
}

// ---------------------------------------------------------------------------
// structural ops

template <typename T>
Tensor<T> concat_rows(const std::vector<Tensor<T>>& parts) {
    if (parts.empty()) throw ContractError("concat_rows: empty input list");
    int64_t d = parts[0].dim(parts[0].rank() - 1);
    int64_t total = 0;
    std::vector<std::shared_ptr<detail::Node<T>>> parents;
    for (const auto& p : parts) {
        auto [r, pd] = detail::rows_cols(p, "concat_rows");
        if (pd != d)
            throw DimensionError(cat("concat_rows: trailing dim mismatch ", pd, " vs ", d));
        total += r;
        parents.push_back(p.node());
    }
    std::vector<T> v;
    v.reserve(static_cast<size_t>(total * d));
    for (const auto& p : parts) v.insert(v.end(), p.values().begin(), p.values().end());
    auto out = detail::make_node<T>({total, d}, std::move(v), std::move(parents));
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto ps = out.node()->parents;  // copy of shared_ptrs
        out.node()->backprop = [self, ps] {
            size_t off = 0;
            for (const auto& p : ps) {
                size_t n = p->value.size();
                if (p->requires_grad) {
                    p->ensure_grad();
                    for (size_t i = 0; i < n; ++i) p->grad[i] += self->grad[off + i];
                }
                off += n;
            }
        };
    }
    return out;
}

template <typename T>
Tensor<T> slice_rows(const Tensor<T>& x, int64_t begin, int64_t count) {
    auto [rows, d] = detail::rows_cols(x, "slice_rows");
    if (begin < 0 || count < 0 || begin + count > rows)
        throw DimensionError(cat("slice_rows: range [", begin, ",", begin + count,
                                 ") out of bounds for ", rows, " rows"));
    std::vector<T> v(x.values().begin() + begin * d, x.values().begin() + (begin + count) * d);
    auto out = detail::make_node<T>({count, d}, std::move(v), {x.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto xn = x.node();
        out.node()->backprop = [self, xn, begin, d] {
            xn->ensure_grad();
            for (size_t i = 0; i < self->grad.size(); ++i)
                xn->grad[begin * d + i] += self->grad[i];
        };
    }
    return out;
}

template <typename T>
Tensor<T> slice_cols(const Tensor<T>& x, int64_t begin, int64_t count) {
    auto [rows, d] = detail::rows_cols(x, "slice_cols");
    if (begin < 0 || count < 0 || begin + count > d)
        throw DimensionError(cat("slice_cols: range [", begin, ",", begin + count,
                                 ") out of bounds for ", d, " cols"));
    std::vector<T> v(static_cast<size_t>(rows * count));
    const auto& xv = x.values();
    for (int64_t r = 0; r < rows; ++r)
        for (int64_t j = 0; j < count; ++j) v[r * count + j] = xv[r * d + begin + j];
    auto out = detail::make_node<T>({rows, count}, std::move(v), {x.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto xn = x.node();
        out.node()->backprop = [self, xn, rows, d, begin, count] {
            xn->ensure_grad();
            for (int64_t r = 0; r < rows; ++r)
                for (int64_t j = 0; j < count; ++j)
                    xn->grad[r * d + begin + j] += self->grad[r * count + j];
        };
    }
    return out;
}

template <typename T>
Tensor<T> concat_cols(const std::vector<Tensor<T>>& parts) {
    if (parts.empty()) throw ContractError("concat_cols: empty input list");
    int64_t rows = detail::rows_cols(parts[0], "concat_cols").first;
    int64_t total_d = 0;
    std::vector<std::shared_ptr<detail::Node<T>>> parents;
    std::vector<int64_t> widths;
    for (const auto& p : parts) {
        auto [r, pd] = detail::rows_cols(p, "concat_cols");
        if (r != rows) throw DimensionError(cat("concat_cols: row mismatch ", r, " vs ", rows));
        total_d += pd;
        widths.push_back(pd);
        parents.push_back(p.node());
    }
    std::vector<T> v(static_cast<size_t>(rows * total_d));
    int64_t off = 0;
    for (size_t pi = 0; pi < parts.size(); ++pi) {
        const auto& pv = parts[pi].values();
        int64_t w = widths[pi];
        for (int64_t r = 0; r < rows; ++r)
            for (int64_t j = 0; j < w; ++j) v[r * total_d + off + j] = pv[r * w + j];
        off += w;
    }
    auto out = detail::make_node<T>({rows, total_d}, std::move(v), std::move(parents));
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto ps = out.node()->parents;
        out.node()->backprop = [self, ps, rows, total_d, widths] {
            int64_t off2 = 0;
            for (size_t pi = 0; pi < ps.size(); ++pi) {
                int64_t w = widths[pi];
                if (ps[pi]->requires_grad) {
                    ps[pi]->ensure_grad();
                    for (int64_t r = 0; r < rows; ++r)
                        for (int64_t j = 0; j < w; ++j)
                            ps[pi]->grad[r * w + j] += self->grad[r * total_d + off2 + j];
                }
                off2 += w;
            }
        };
    }
    return out;
}

/// out[i] = x[index[i]]. The index map is shared with the backward closure.
template <typename T>
Tensor<T> gather(const Tensor<T>& x, std::shared_ptr<const std::vector<int64_t>> index,
                 Shape out_shape) {
    if (shape_numel(out_shape) != static_cast<int64_t>(index->size()))
        throw DimensionError(cat("gather: index size ", index->size(), " does not match out shape ",
                                 shape_str(out_shape)));
    std::vector<T> v(index->size());
    const auto& xv = x.values();
    for (size_t i = 0; i < v.size(); ++i) v[i] = xv[static_cast<size_t>((*index)[i])];
    auto out = detail::make_node<T>(std::move(out_shape), std::move(v), {x.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto xn = x.node();
        out.node()->backprop = [self, xn, index] {
            xn->ensure_grad();
            for (size_t i = 0; i < self->grad.size(); ++i)
                xn->grad[static_cast<size_t>((*index)[i])] += self->grad[i];
        };
    }
    return out;
}

/// out[index[i]] = x[i]; indices must be unique; unwritten outputs are zero.
template <typename T>
Tensor<T> scatter(const Tensor<T>& x, std::shared_ptr<const std::vector<int64_t>> index,
                  Shape out_shape) {
    if (static_cast<int64_t>(index->size()) != x.numel())
        throw DimensionError(
            cat("scatter: index size ", index->size(), " does not match input ", x.numel()));
    std::vector<T> v(static_cast<size_t>(shape_numel(out_shape)), T(0));
    const auto& xv = x.values();
    for (size_t i = 0; i < xv.size(); ++i) v[static_cast<size_t>((*index)[i])] = xv[i];
    auto out = detail::make_node<T>(std::move(out_shape), std::move(v), {x.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto xn = x.node();
        out.node()->backprop = [self, xn, index] {
            xn->ensure_grad();
            for (size_t i = 0; i < xn->grad.size(); ++i)
                xn->grad[i] += self->grad[static_cast<size_t>((*index)[i])];
        };
    }
    return out;
}

// ---------------------------------------------------------------------------
// masked softmax / attention

/// Row softmax under a visibility mask. Masking is an additive -1e9 bias
/// before the softmax, followed by explicit re-zeroing of masked weights, so
/// masked positions carry exactly zero weight whatever the exponent rounding
/// does. A query row with no visible key is a configuration error.
template <typename T>
Tensor<T> masked_softmax(const Tensor<T>& scores, const MaskView& mask) {
    if (scores.rank() != 2 || scores.dim(0) != mask.rows || scores.dim(1) != mask.cols)
        throw DimensionError(cat("masked_softmax: scores ", shape_str(scores.shape()),
                                 " vs mask [", mask.rows, "x", mask.cols, "]"));
    int64_t n = mask.rows, m = mask.cols;
    std::vector<T> v(static_cast<size_t>(n * m));
    const auto& sv = scores.values();
    for (int64_t q = 0; q < n; ++q) {
        bool any = false;
        double mx = -std::numeric_limits<double>::infinity();
        for (int64_t j = 0; j < m; ++j) {
            double s = static_cast<double>(sv[q * m + j]) + (mask.at(q, j) ? 0.0 : -1e9);
            if (mask.at(q, j)) any = true;
            mx = std::max(mx, s);
        }
        if (!any)
            throw ConfigError(cat("masked_softmax: query row ", q, " has no visible key"));
        double denom = 0;
        for (int64_t j = 0; j < m; ++j) {
            double s = static_cast<double>(sv[q * m + j]) + (mask.at(q, j) ? 0.0 : -1e9);
            denom += std::exp(s - mx);
        }
        for (int64_t j = 0; j < m; ++j) {
            double s = static_cast<double>(sv[q * m + j]) + (mask.at(q, j) ? 0.0 : -1e9);
            T w = static_cast<T>(std::exp(s - mx) / denom);
            v[q * m + j] = mask.at(q, j) ? w : T(0);
        }
    }
    auto out = detail::make_node<T>(scores.shape(), std::move(v), {scores.node()});
    if (out.requires_grad()) {
        auto self = out.node().get();
        auto sn = scores.node();
        out.node()->backprop = [self, sn, n, m] {
            sn->ensure_grad();
            for (int64_t q = 0; q < n; ++q) {
                const T* w = self->value.data() + q * m;
                const T* g = self->grad.data() + q * m;
                T dot = 0;
                for (int64_t j = 0; j < m; ++j) dot += w[j] * g[j];
                for (int64_t j = 0; j < m; ++j) sn->grad[q * m + j] += w[j] * (g[j] - dot);
            }
        };
    }
    return out;
}

/// Scaled dot-product attention with a visibility mask (single head).
template <typename T>
Tensor<T> masked_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                           const MaskView& mask) {
    if (q.rank() != 2 || k.rank() != 2 || v.rank() != 2 || q.dim(1) != k.dim(1) ||
        k.dim(0) != v.dim(0))
        throw DimensionError(cat("masked_attention: q ", shape_str(q.shape()), ", k ",
                                 shape_str(k.shape()), ", v ", shape_str(v.shape())));
    T inv_sqrt_d = T(1) / std::sqrt(static_cast<T>(q.dim(1)));
    Tensor<T> logits = scale(matmul_nt(q, k), inv_sqrt_d);
    Tensor<T> weights = masked_softmax(logits, mask);
    return matmul(weights, v);
}

// ---------------------------------------------------------------------------
// backward

/// Reverse-mode sweep from a scalar loss. Every node reachable from the loss
/// is visited exactly once, in reverse topological order.
template <typename T>
void backward(Tensor<T>& loss) {
    if (loss.numel() != 1)
        throw ContractError(cat("backward: loss must be scalar, got ", shape_str(loss.shape())));
    auto root = loss.node();
    if (!root->requires_grad)
        throw ContractError("backward: loss does not depend on any gradient-tracked tensor");

    // iterative post-order DFS
    std::vector<detail::Node<T>*> order;
    std::unordered_set<detail::Node<T>*> seen;
    std::vector<std::pair<detail::Node<T>*, size_t>> stack;
    stack.push_back({root.get(), 0});
    seen.insert(root.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            detail::Node<T>* p = node->parents[next].get();
            ++next;
            if (p->requires_grad && !seen.count(p)) {
                seen.insert(p);
                stack.push_back({p, 0});
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    root->ensure_grad();
    root->grad[0] += T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backprop) (*it)->backprop();
}

}  // namespace wsdt
