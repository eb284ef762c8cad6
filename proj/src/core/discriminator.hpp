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

// Time-conditioned discriminator over (candidate, context) image pairs. The
// two images are concatenated along channels and pushed through a stack of
// stride-2 patch convolutions (kernel == stride, realized as gather +
// matmul); the timestep embedding is projected into each layer's features.
// Output is a single logit.

#include <vector>

#include "model.hpp"
#include "param_store.hpp"
#include "tensor.hpp"

namespace wsdt {

template <typename T>
class Discriminator {
public:
    Discriminator(int image_size, int channels, int t_steps, int base_channels, uint64_t seed)
        : size_(image_size), channels_(channels), t_steps_(t_steps) {
        if (image_size < 4 || (image_size & (image_size - 1)) != 0)
            throw ConfigError(cat("discriminator image size ", image_size,
                                  " must be a power of two >= 4"));
        Rng rng(seed);
        temb_dim_ = 128;
        temb1_ = make_linear("temb.fc1", temb_dim_, temb_dim_, rng);
        temb2_ = make_linear("temb.fc2", temb_dim_, temb_dim_, rng);

        int h = image_size, c_in = 2 * channels;
        int c_out = base_channels;
        int li = 0;
        // Downsample until 4x4 (at least two layers).
        while (h > 4 || li < 2) {
            Layer layer;
            layer.in_h = h;
            layer.in_c = c_in;
            layer.out_c = c_out;
            layer.map = patch_map(h, c_in);
            layer.proj = make_linear(cat("layer", li, ".proj"), 4 * c_in, c_out, rng);
            layer.temb = make_linear(cat("layer", li, ".temb"), temb_dim_, c_out, rng);
            layers_.push_back(std::move(layer));
            h /= 2;
            c_in = c_out;
            c_out = std::min(2 * c_out, 256);
            ++li;
            if (h < 2) throw ConfigError(cat("discriminator ran out of spatial extent at ", h));
        }
        head_ = make_linear("head", c_in, 1, rng);
    }

    ParamStore<T>& params() { return params_; }
    const ParamStore<T>& params() const { return params_; }

    /// Scalar logit for the pair (candidate, context) at timestep t.
    Tensor<T> forward(const Tensor<T>& candidate, const Tensor<T>& context, int t) const {
        if (t < 0 || t >= t_steps_)
            throw ContractError(cat("discriminator timestep ", t, " outside [0,", t_steps_, ")"));
        check_image(candidate, "candidate");
        check_image(context, "context");
        // channel concat: [S*S, C] | [S*S, C] -> rows of [S, S, 2C]
        Tensor<T> x = concat_cols<T>({candidate, context});

        std::vector<double> sins = timestep_sinusoid(static_cast<double>(t), temb_dim_);
        std::vector<T> sv(sins.begin(), sins.end());
        Tensor<T> temb = Tensor<T>::from({1, temb_dim_}, std::move(sv));
        temb = linear(silu(linear(temb, temb1_)), temb2_);

        for (const Layer& layer : layers_) {
            int64_t tokens = static_cast<int64_t>(layer.in_h / 2) * (layer.in_h / 2);
            x = gather(x, layer.map, {tokens, 4 * layer.in_c});
            x = linear(x, layer.proj);
            x = add_rowvec(x, linear(temb, layer.temb));
            x = leaky_relu(x, T(0.2));
        }
        return linear(mean_rows(x), head_);
    }

private:
    struct Layer {
        LinearP<T> proj;
        LinearP<T> temb;
        std::shared_ptr<std::vector<int64_t>> map;
        int in_h = 0, in_c = 0, out_c = 0;
    };

    LinearP<T> make_linear(const std::string& name, int64_t in, int64_t out, Rng& rng) {
        return {params_.create(name + ".w", {in, out}, Init::XavierUniform, rng),
                params_.create(name + ".b", {1, out}, Init::Zeros, rng)};
    }

    // 2x2 patch gather over an [h, h, c] feature grid.
    static std::shared_ptr<std::vector<int64_t>> patch_map(int h, int c) {
        auto map = std::make_shared<std::vector<int64_t>>();
        map->reserve(static_cast<size_t>(h) * h * c);
        int oh = h / 2;
        for (int gy = 0; gy < oh; ++gy)
            for (int gx = 0; gx < oh; ++gx)
                for (int py = 0; py < 2; ++py)
                    for (int px = 0; px < 2; ++px)
                        for (int ch = 0; ch < c; ++ch)
                            map->push_back(
                                ((static_cast<int64_t>(2 * gy + py)) * h + (2 * gx + px)) * c + ch);
        return map;
    }

    void check_image(const Tensor<T>& img, const char* what) const {
        if (img.rank() != 3 || img.dim(0) != size_ || img.dim(1) != size_ ||
            img.dim(2) != channels_)
            throw DimensionError(cat("discriminator ", what, " ", shape_str(img.shape()),
                                     " does not match ", size_, "x", size_, "x", channels_));
    }

    int size_, channels_, t_steps_;
    int temb_dim_;
    ParamStore<T> params_;
    LinearP<T> temb1_, temb2_;
    std::vector<Layer> layers_;
    LinearP<T> head_;
};

}  // namespace wsdt
