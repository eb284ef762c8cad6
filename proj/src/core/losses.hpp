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

#include <utility>

#include "discriminator.hpp"
#include "tensor.hpp"
#include "wavelet.hpp"

namespace wsdt {

template <typename T>
struct ReconLosses {
    Tensor<T> pixel;  // mean |x0_hat - x0|
    Tensor<T> fre;    // mean |mdwt(x0_hat) - mdwt(x0)|
};

/// L1 reconstruction in both the pixel and the wavelet-spectrum domain.
template <typename T>
ReconLosses<T> loss_recon(const Tensor<T>& x0_hat, const Tensor<T>& x0, int levels) {
    if (x0_hat.shape() != x0.shape())
        throw DimensionError(cat("loss_recon: shapes ", shape_str(x0_hat.shape()), " vs ",
                                 shape_str(x0.shape())));
    ReconLosses<T> out;
    out.pixel = mean(abs(sub(x0_hat, x0)));
    out.fre = mean(abs(sub(mdwt_op(x0_hat, levels), mdwt_op(x0, levels))));
    return out;
}

/// Discriminator objective: -log sigma(D(real)) - log(1 - sigma(D(fake))).
/// The fake candidate should be detached by the caller when this drives a
/// discriminator update.
template <typename T>
Tensor<T> adv_d_loss(const Discriminator<T>& disc, const Tensor<T>& real_prev,
                     const Tensor<T>& fake_prev, const Tensor<T>& context, int t) {
    Tensor<T> logit_real = disc.forward(real_prev, context, t);
    Tensor<T> logit_fake = disc.forward(fake_prev, context, t);
    return add(sum(softplus(scale(logit_real, T(-1)))), sum(softplus(logit_fake)));
}

/// Non-saturating generator objective: -log sigma(D(fake)).
template <typename T>
Tensor<T> adv_g_loss(const Discriminator<T>& disc, const Tensor<T>& fake_prev,
                     const Tensor<T>& context, int t) {
    Tensor<T> logit_fake = disc.forward(fake_prev, context, t);
    return sum(softplus(scale(logit_fake, T(-1))));
}

/// The (L_D, L_G) pair for one sample. L_D sees the fake through a detached
/// copy so generator parameters receive gradient only from L_G.
template <typename T>
std::pair<Tensor<T>, Tensor<T>> loss_adv(const Discriminator<T>& disc, const Tensor<T>& real_prev,
                                         const Tensor<T>& fake_prev, const Tensor<T>& context,
                                         int t) {
    Tensor<T> l_d = adv_d_loss(disc, real_prev, fake_prev.detach(), context, t);
    Tensor<T> l_g = adv_g_loss(disc, fake_prev, context, t);
    return {l_d, l_g};
}

}  // namespace wsdt
