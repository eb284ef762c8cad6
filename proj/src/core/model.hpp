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

// The wavelet-spectrum denoising transformer. One forward pass maps a noisy
// pixel image plus the LR conditioning image to an estimate of the clean
// pixel image:
//
//   mdwt -> tokenize -> LEDec (LR|LF, M_low) -> HDDec (LR|LF|HF, M_high)
//        -> per-stream heads -> packed spectrum -> imdwt
//
// Both decoder stacks are AdaLN-Zero transformer blocks: the timestep
// embedding drives per-block scale/shift/gate modulation whose projection is
// zero-initialized, so a fresh trunk is the identity map on tokens. The
// output heads are zero-initialized as well; a fresh model predicts the zero
// image.

#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "masks.hpp"
#include "param_store.hpp"
#include "tokenizer.hpp"
#include "wavelet.hpp"

namespace wsdt {

struct ModelConfig {
    int embed_dim = 256;
    int n_heads = 4;
    int depth_le = 6;
    int depth_hd = 6;
    int mlp_ratio = 4;
    int p_min = 2;
    int lr_patch = 2;
    int t_steps = 4;
    // geometry
    int hr_size = 128;
    int upscale = 8;
    int channels = 3;

    int levels() const { return level_for_scale(upscale); }
    int lr_size() const { return hr_size / upscale; }

    void validate() const {
        if (embed_dim < 8 || embed_dim % 8 != 0)
            throw ConfigError(cat("embed_dim ", embed_dim, " must be a positive multiple of 8"));
        if (n_heads < 1 || embed_dim % n_heads != 0)
            throw ConfigError(cat("embed_dim ", embed_dim, " not divisible by n_heads ", n_heads));
        if (depth_le < 1 || depth_hd < 1)
            throw ConfigError(cat("decoder depths must be >= 1, got ", depth_le, "/", depth_hd));
        if (mlp_ratio < 1) throw ConfigError(cat("mlp_ratio must be >= 1, got ", mlp_ratio));
        if (t_steps < 1) throw ConfigError(cat("t_steps must be >= 1, got ", t_steps));
        if (upscale < 2) throw ConfigError(cat("upscale must be >= 2, got ", upscale));
        if (hr_size % upscale != 0)
            throw ConfigError(cat("hr_size ", hr_size, " not divisible by upscale ", upscale));
        if (channels < 1) throw ConfigError(cat("channels must be >= 1, got ", channels));
    }

    /// CPU-sized preset used by the bundled configs and tests.
    static ModelConfig desk_preset() {
        ModelConfig cfg;
        cfg.embed_dim = 128;
        cfg.depth_le = 2;
        cfg.depth_hd = 2;
        cfg.hr_size = 64;
        return cfg;
    }
};

/// Sinusoidal embedding of a (timestep) scalar: sine half then cosine half,
/// frequencies geometrically spaced with base 10000.
inline std::vector<double> timestep_sinusoid(double t, int dim) {
    int half = dim / 2;
    std::vector<double> out(static_cast<size_t>(dim));
    for (int i = 0; i < half; ++i) {
        double freq = std::pow(10000.0, -static_cast<double>(i) / half);
        out[i] = std::sin(t * freq);
        out[half + i] = std::cos(t * freq);
    }
    return out;
}

template <typename T>
struct LinearP {
    Tensor<T> w;  // [in, out]
    Tensor<T> b;  // [1, out]
};

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const LinearP<T>& p) {
    return add_rowvec(matmul(x, p.w), p.b);
}

/// x * (1 + scale) + shift with [1,D] modulation vectors.
template <typename T>
Tensor<T> modulate(const Tensor<T>& x, const Tensor<T>& scale_v, const Tensor<T>& shift_v) {
    return add_rowvec(mul_rowvec(x, add_scalar(scale_v, T(1))), shift_v);
}

template <typename T>
struct BlockP {
    LinearP<T> wq, wk, wv, wo;
    LinearP<T> mlp_in, mlp_out;
    LinearP<T> adaln;  // [D, 6D], zero-initialized
};

/// Multi-head masked self-attention (pre-projected inputs share the mask).
template <typename T>
Tensor<T> multihead_attention(const Tensor<T>& x, const MaskView& mask, const BlockP<T>& p,
                              int n_heads) {
    Tensor<T> q = linear(x, p.wq);
    Tensor<T> k = linear(x, p.wk);
    Tensor<T> v = linear(x, p.wv);
    int64_t d = q.dim(1);
    int64_t hd = d / n_heads;
    std::vector<Tensor<T>> heads;
    heads.reserve(static_cast<size_t>(n_heads));
    for (int h = 0; h < n_heads; ++h) {
        Tensor<T> qh = slice_cols(q, h * hd, hd);
        Tensor<T> kh = slice_cols(k, h * hd, hd);
        Tensor<T> vh = slice_cols(v, h * hd, hd);
        heads.push_back(masked_attention(qh, kh, vh, mask));
    }
    return linear(n_heads == 1 ? heads[0] : concat_cols(heads), p.wo);
}

/// One AdaLN-Zero transformer block:
///   x + gate_a * Attn(modulate(LN(x))) , then + gate_m * MLP(modulate(LN(.)))
template <typename T>
Tensor<T> trans_block(const Tensor<T>& x, const MaskView& mask, const Tensor<T>& temb,
                      const BlockP<T>& p, int n_heads) {
    int64_t d = x.dim(x.rank() - 1);
    Tensor<T> mod = linear(silu(temb), p.adaln);  // [1, 6D]
    Tensor<T> shift_a = slice_cols(mod, 0, d);
    Tensor<T> scale_a = slice_cols(mod, d, d);
    Tensor<T> gate_a = slice_cols(mod, 2 * d, d);
    Tensor<T> shift_m = slice_cols(mod, 3 * d, d);
    Tensor<T> scale_m = slice_cols(mod, 4 * d, d);
    Tensor<T> gate_m = slice_cols(mod, 5 * d, d);

    Tensor<T> attn = multihead_attention(modulate(rownorm(x), scale_a, shift_a), mask, p, n_heads);
    Tensor<T> x1 = add(x, mul_rowvec(attn, gate_a));
    Tensor<T> h = modulate(rownorm(x1), scale_m, shift_m);
    Tensor<T> m = linear(gelu(linear(h, p.mlp_in)), p.mlp_out);
    return add(x1, mul_rowvec(m, gate_m));
}

template <typename T>
struct HeadP {
    LinearP<T> adaln;  // [D, 2D], zero-initialized (scale/shift, no gate)
    LinearP<T> out;    // [D, p*p*C], zero-initialized
};

template <typename T>
class WsdtModel {
public:
    WsdtModel(ModelConfig cfg, uint64_t init_seed) : cfg_(cfg) {
        cfg_.validate();
        int j = cfg_.levels();
        plan_ = plan_patches(cfg_.hr_size, cfg_.hr_size, j, cfg_.p_min, cfg_.lr_size(),
                             cfg_.embed_dim, cfg_.channels, cfg_.lr_patch);
        m_low_ = build_m_low(plan_.segments_low());
        m_high_ = build_m_high(plan_.segments());
        init_params(init_seed);
    }

    const ModelConfig& config() const { return cfg_; }
    const PatchPlan& plan() const { return plan_; }
    ParamStore<T>& params() { return params_; }
    const ParamStore<T>& params() const { return params_; }
    const AttentionMask& mask_low() const { return m_low_; }
    const AttentionMask& mask_high() const { return m_high_; }

    /// Replaces the decoder masks (segment layouts must match the plan).
    /// Used by ablation experiments; the product path keeps the defaults.
    void set_masks(AttentionMask low, AttentionMask high) {
        if (low.n != m_low_.n || high.n != m_high_.n)
            throw ConfigError(cat("set_masks: sizes ", low.n, "/", high.n, " do not match plan (",
                                  m_low_.n, "/", m_high_.n, ")"));
        m_low_ = std::move(low);
        m_high_ = std::move(high);
    }

    /// Timestep embedding after the 2-layer MLP, shared by both decoders.
    Tensor<T> timestep_embedding(int t) const {
        check_t(t);
        std::vector<double> sin_part = timestep_sinusoid(static_cast<double>(t), cfg_.embed_dim);
        std::vector<T> v(sin_part.begin(), sin_part.end());
        Tensor<T> freq = Tensor<T>::from({1, cfg_.embed_dim}, std::move(v));
        return linear(silu(linear(freq, temb1_)), temb2_);
    }

    std::vector<Tensor<T>> tokenize_all(const Tensor<T>& spectrum, const Tensor<T>& lr) const {
        return tokenize(spectrum, lr, plan_, embeds_);
    }

    /// LEDec: depth_le blocks over [LR | LF] under M_low.
    std::pair<Tensor<T>, Tensor<T>> ledec_forward(const Tensor<T>& lr_tok, const Tensor<T>& lf_tok,
                                                  int t) const {
        check_t(t);
        const int64_t n_lr = plan_.streams[0].tokens();
        const int64_t n_lf = plan_.streams[1].tokens();
        if (lr_tok.dim(0) != n_lr || lf_tok.dim(0) != n_lf)
            throw ContractError(cat("ledec_forward: token blocks ", lr_tok.dim(0), "/",
                                    lf_tok.dim(0), " do not match layout ", n_lr, "/", n_lf));
        Tensor<T> temb = timestep_embedding(t);
        Tensor<T> x = concat_rows<T>({lr_tok, lf_tok});
        for (const auto& blk : ledec_) x = trans_block(x, m_low_.view(), temb, blk, cfg_.n_heads);
        return {slice_rows(x, 0, n_lr), slice_rows(x, n_lr, n_lf)};
    }

    /// HDDec: depth_hd blocks over [LR | LF | HF...] under M_high. Returns
    /// the final LR rows (unused downstream), the LF residual rows, and the
    /// denoised HF blocks in plan stream order.
    std::tuple<Tensor<T>, Tensor<T>, std::vector<Tensor<T>>> hddec_forward(
        const Tensor<T>& lr_tok, const Tensor<T>& lf_tok, const std::vector<Tensor<T>>& hf_toks,
        int t) const {
        check_t(t);
        const int64_t n_lr = plan_.streams[0].tokens();
        const int64_t n_lf = plan_.streams[1].tokens();
        if (hf_toks.size() != plan_.streams.size() - 2)
            throw ContractError(cat("hddec_forward: ", hf_toks.size(), " HF blocks for ",
                                    plan_.streams.size() - 2, " streams"));
        Tensor<T> temb = timestep_embedding(t);
        std::vector<Tensor<T>> parts{lr_tok, lf_tok};
        parts.insert(parts.end(), hf_toks.begin(), hf_toks.end());
        Tensor<T> x = concat_rows(parts);
        if (x.dim(0) != m_high_.n)
            throw ContractError(cat("hddec_forward: sequence length ", x.dim(0),
                                    " does not match mask ", m_high_.n));
        for (const auto& blk : hddec_) x = trans_block(x, m_high_.view(), temb, blk, cfg_.n_heads);
        Tensor<T> out_lr = slice_rows(x, 0, n_lr);
        Tensor<T> out_lf = slice_rows(x, n_lr, n_lf);
        std::vector<Tensor<T>> out_hf;
        int64_t off = n_lr + n_lf;
        for (size_t i = 2; i < plan_.streams.size(); ++i) {
            int64_t n = plan_.streams[i].tokens();
            out_hf.push_back(slice_rows(x, off, n));
            off += n;
        }
        return {out_lr, out_lf, out_hf};
    }

    /// Per-stream AdaLN (no gate) + linear head, then scatter into the
    /// packed spectrum. lf_tokens must already be the sum of the LEDec
    /// output and the HDDec LF residual.
    Tensor<T> detokenize(const Tensor<T>& lf_tokens, const std::vector<Tensor<T>>& hf_tokens,
                         int t) const {
        check_t(t);
        if (hf_tokens.size() != heads_.size() - 1)
            throw DimensionError(cat("detokenize: ", hf_tokens.size(), " HF blocks for ",
                                     heads_.size() - 1, " heads"));
        Tensor<T> temb = timestep_embedding(t);
        std::vector<Tensor<T>> values;
        values.reserve(heads_.size());
        for (size_t i = 0; i < heads_.size(); ++i) {
            const Tensor<T>& tok = i == 0 ? lf_tokens : hf_tokens[i - 1];
            const TokenStream& s = plan_.streams[i + 1];
            if (tok.dim(0) != s.tokens())
                throw DimensionError(cat("detokenize: stream ", s.name, " got ", tok.dim(0),
                                         " tokens, expected ", s.tokens()));
            Tensor<T> mod = linear(silu(temb), heads_[i].adaln);  // [1, 2D]
            Tensor<T> shift_v = slice_cols(mod, 0, cfg_.embed_dim);
            Tensor<T> scale_v = slice_cols(mod, cfg_.embed_dim, cfg_.embed_dim);
            Tensor<T> h = modulate(rownorm(tok), scale_v, shift_v);
            values.push_back(linear(h, heads_[i].out));
        }
        return assemble_spectrum(values, plan_);
    }

    /// Full denoising pass. Inputs are pixel-domain [-1,1] tensors; the
    /// output is the clean-image estimate (x0 parameterization), not the
    /// noise.
    Tensor<T> forward(const Tensor<T>& noisy, const Tensor<T>& lr, int t) const {
        check_t(t);
        Tensor<T> spectrum = mdwt_op(noisy, plan_.levels);
        std::vector<Tensor<T>> toks = tokenize_all(spectrum, lr);
        auto [f_lr, f_le] = ledec_forward(toks[0], toks[1], t);
        std::vector<Tensor<T>> hf_in(toks.begin() + 2, toks.end());
        auto [f_lr2, f_lres, hf_out] = hddec_forward(f_lr, f_le, hf_in, t);
        (void)f_lr2;  // final LR rows are discarded
        Tensor<T> spec_hat = detokenize(add(f_le, f_lres), hf_out, t);
        return imdwt_op(spec_hat, plan_.levels);
    }

private:
    void check_t(int t) const {
        if (t < 0 || t >= cfg_.t_steps)
            throw ContractError(cat("timestep ", t, " outside [0,", cfg_.t_steps, ")"));
    }

    LinearP<T> make_linear(const std::string& name, int64_t in, int64_t out, Init init, Rng& rng) {
        return {params_.create(name + ".w", {in, out}, init, rng),
                params_.create(name + ".b", {1, out}, Init::Zeros, rng)};
    }

    BlockP<T> make_block(const std::string& prefix, Rng& rng) {
        const int d = cfg_.embed_dim;
        BlockP<T> b;
        b.wq = make_linear(prefix + ".attn.q", d, d, Init::XavierUniform, rng);
        b.wk = make_linear(prefix + ".attn.k", d, d, Init::XavierUniform, rng);
        b.wv = make_linear(prefix + ".attn.v", d, d, Init::XavierUniform, rng);
        b.wo = make_linear(prefix + ".attn.o", d, d, Init::XavierUniform, rng);
        b.mlp_in = make_linear(prefix + ".mlp.fc1", d, d * cfg_.mlp_ratio, Init::XavierUniform, rng);
        b.mlp_out = make_linear(prefix + ".mlp.fc2", d * cfg_.mlp_ratio, d, Init::XavierUniform, rng);
        b.adaln = make_linear(prefix + ".adaln", d, 6 * d, Init::Zeros, rng);
        return b;
    }

    void init_params(uint64_t seed) {
        Rng rng(seed);
        const int d = cfg_.embed_dim;
        temb1_ = make_linear("temb.fc1", d, d, Init::Normal002, rng);
        temb2_ = make_linear("temb.fc2", d, d, Init::Normal002, rng);
        for (const TokenStream& s : plan_.streams)
            embeds_.push_back({params_.create(cat("embed.", s.name, ".w"), {s.patch_values, d},
                                              Init::XavierUniform, rng),
                               params_.create(cat("embed.", s.name, ".b"), {1, d}, Init::Zeros,
                                              rng)});
        for (int i = 0; i < cfg_.depth_le; ++i) ledec_.push_back(make_block(cat("ledec.", i), rng));
        for (int i = 0; i < cfg_.depth_hd; ++i) hddec_.push_back(make_block(cat("hddec.", i), rng));
        for (size_t i = 1; i < plan_.streams.size(); ++i) {
            const TokenStream& s = plan_.streams[i];
            HeadP<T> head;
            head.adaln = make_linear(cat("head.", s.name, ".adaln"), d, 2 * d, Init::Zeros, rng);
            head.out = make_linear(cat("head.", s.name, ".out"), d, s.patch_values, Init::Zeros, rng);
            heads_.push_back(std::move(head));
        }
    }

    ModelConfig cfg_;
    PatchPlan plan_;
    AttentionMask m_low_, m_high_;
    ParamStore<T> params_;
    LinearP<T> temb1_, temb2_;
    std::vector<StreamWeights<T>> embeds_;
    std::vector<BlockP<T>> ledec_, hddec_;
    std::vector<HeadP<T>> heads_;
};

}  // namespace wsdt
