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

#include <vector>

#include "diffusion.hpp"
#include "discriminator.hpp"
#include "losses.hpp"
#include "model.hpp"
#include "optimizer.hpp"
#include "synth.hpp"

namespace wsdt {

struct TrainConfig {
    double alpha = 1.0;  // adversarial weight
    double beta = 1.0;   // pixel reconstruction weight
    double gamma = 1.0;  // spectrum reconstruction weight
    double lr_g = 2e-4;
    double lr_d = 2e-4;
    int batch_size = 4;
    int iterations = 2000;
    uint64_t seed = 0;
    int upscale = 8;
    int image_size = 64;
    int checkpoint_every = 500;

    void validate() const {
        if (alpha < 0 || beta < 0 || gamma < 0)
            throw ConfigError("loss weights alpha/beta/gamma must be >= 0");
        if (lr_g <= 0 || lr_d <= 0) throw ConfigError("learning rates must be > 0");
        if (batch_size < 1) throw ConfigError(cat("batch_size must be >= 1, got ", batch_size));
        if (iterations < 0) throw ConfigError(cat("iterations must be >= 0, got ", iterations));
        if (upscale < 2) throw ConfigError(cat("upscale must be >= 2, got ", upscale));
        if (image_size % upscale != 0)
            throw ConfigError(
                cat("image_size ", image_size, " not divisible by upscale ", upscale));
        if (checkpoint_every < 1)
            throw ConfigError(cat("checkpoint_every must be >= 1, got ", checkpoint_every));
    }
};

struct StepStats {
    int64_t iteration = 0;
    double l_d = 0, l_adv_g = 0, l_pixel = 0, l_fre = 0;
};

/// One training iteration is a serialized transaction over both parameter
/// sets: draw a timestep and noises per sample, update the discriminator on
/// real/fake pairs, then update the generator against the refreshed
/// discriminator plus the two reconstruction terms.
class Trainer {
public:
    Trainer(WsdtModel<float>& model, Discriminator<float>& disc, NoiseSchedule schedule,
            TrainConfig cfg, const std::vector<SynthPair>& dataset)
        : model_(model),
          disc_(disc),
          sched_(std::move(schedule)),
          cfg_(cfg),
          opt_g_(Adam<float>::for_store(model.params(), cfg.lr_g)),
          opt_d_(Adam<float>::for_store(disc.params(), cfg.lr_d)),
          root_(cfg.seed) {
        cfg_.validate();
        sched_.validate();
        if (sched_.steps != model_.config().t_steps)
            throw ConfigError(cat("schedule steps ", sched_.steps, " do not match model t_steps ",
                                  model_.config().t_steps));
        if (sched_.steps < 2)
            throw ConfigError("training requires a schedule with at least 2 steps");
        if (dataset.empty()) throw ConfigError("training dataset is empty");
        hr_.reserve(dataset.size());
        lr_.reserve(dataset.size());
        for (const auto& pair : dataset) {
            hr_.push_back(image_tensor(pair.hr));
            lr_.push_back(image_tensor(pair.lr));
        }
    }

    static Tensor<float> image_tensor(const Image& img) {
        return Tensor<float>::from({img.h, img.w, img.c}, img.data);
    }

    int64_t iteration() const { return iter_; }
    void set_iteration(int64_t it) { iter_ = it; }
    Adam<float>& opt_g() { return opt_g_; }
    Adam<float>& opt_d() { return opt_d_; }
    const NoiseSchedule& schedule() const { return sched_; }
    const TrainConfig& config() const { return cfg_; }

    StepStats step() {
        Rng rng = root_.fork(static_cast<uint64_t>(iter_));
        const int bsz = cfg_.batch_size;
        const float inv_b = 1.0f / static_cast<float>(bsz);

        struct Sample {
            int t;
            Tensor<float> xt, prev_real, x0, lr, x0_hat, prev_fake;
        };
        std::vector<Sample> batch;
        batch.reserve(static_cast<size_t>(bsz));
        for (int i = 0; i < bsz; ++i) {
            Sample s;
            size_t idx = static_cast<size_t>(rng.below(hr_.size()));
            s.t = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(sched_.steps - 1)));
            s.x0 = hr_[idx];
            s.lr = lr_[idx];
            s.xt = forward_sample(s.x0, s.t, sched_, rng);
            s.prev_real = forward_sample(s.x0, s.t - 1, sched_, rng);
            s.x0_hat = model_.forward(s.xt, s.lr, s.t);
            s.prev_fake = posterior_sample(s.xt, s.x0_hat, s.t, sched_, rng);
            batch.push_back(std::move(s));
        }

        // Discriminator update (fake candidates detached).
        Tensor<float> l_d;
        for (const Sample& s : batch) {
            Tensor<float> term = adv_d_loss(disc_, s.prev_real, s.prev_fake.detach(), s.xt, s.t);
            l_d = l_d.defined() ? add(l_d, term) : term;
        }
        l_d = scale(l_d, inv_b);
        backward(l_d);
        opt_d_.step();
        opt_d_.zero_grad();
        model_.params().zero_grad();

        // Generator update against the refreshed discriminator.
        Tensor<float> l_adv, l_pix, l_fre;
        for (const Sample& s : batch) {
            Tensor<float> adv = adv_g_loss(disc_, s.prev_fake, s.xt, s.t);
            ReconLosses<float> rec = loss_recon(s.x0_hat, s.x0, model_.plan().levels);
            l_adv = l_adv.defined() ? add(l_adv, adv) : adv;
            l_pix = l_pix.defined() ? add(l_pix, rec.pixel) : rec.pixel;
            l_fre = l_fre.defined() ? add(l_fre, rec.fre) : rec.fre;
        }
        l_adv = scale(l_adv, inv_b);
        l_pix = scale(l_pix, inv_b);
        l_fre = scale(l_fre, inv_b);
        Tensor<float> l_g =
            add(add(scale(l_adv, static_cast<float>(cfg_.alpha)),
                    scale(l_pix, static_cast<float>(cfg_.beta))),
                scale(l_fre, static_cast<float>(cfg_.gamma)));
        backward(l_g);
        opt_g_.step();
        opt_g_.zero_grad();
        disc_.params().zero_grad();

        ++iter_;
        StepStats stats{iter_, static_cast<double>(l_d.item()), static_cast<double>(l_adv.item()),
                        static_cast<double>(l_pix.item()), static_cast<double>(l_fre.item())};
        if (!std::isfinite(stats.l_d) || !std::isfinite(stats.l_adv_g) ||
            !std::isfinite(stats.l_pixel) || !std::isfinite(stats.l_fre))
            throw NumericError(cat("non-finite loss at iteration ", iter_, ": l_d=", stats.l_d,
                                   " l_adv_g=", stats.l_adv_g, " l_pixel=", stats.l_pixel,
                                   " l_fre=", stats.l_fre));
        return stats;
    }

private:
    WsdtModel<float>& model_;
    Discriminator<float>& disc_;
    NoiseSchedule sched_;
    TrainConfig cfg_;
    std::vector<Tensor<float>> hr_, lr_;
    Adam<float> opt_g_, opt_d_;
    Rng root_;
    int64_t iter_ = 0;
};

}  // namespace wsdt
