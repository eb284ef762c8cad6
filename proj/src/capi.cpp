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

#include "wsdt/wsdt.h"

#include <cstring>
#include <string>

#include "core/config.hpp"
#include "core/image.hpp"
#include "core/metrics.hpp"
#include "core/runner.hpp"
#include "core/wavelet.hpp"

struct wsdt_image {
    wsdt::Image img;
};

struct wsdt_model {
    wsdt::LoadedModel loaded;
    std::string metadata_json;
};

namespace {

thread_local std::string g_last_error;

wsdt_status status_for(const wsdt::Error& e) {
    using Kind = wsdt::Error::Kind;
    switch (e.kind()) {
        case Kind::Dimension: return WSDT_ERR_DIMENSION;
        case Kind::Config: return WSDT_ERR_CONFIG;
        case Kind::Contract: return WSDT_ERR_CONTRACT;
        case Kind::Io: return WSDT_ERR_IO;
        case Kind::Numeric: return WSDT_ERR_NUMERIC;
    }
    return WSDT_ERR_INTERNAL;
}

template <typename Fn>
wsdt_status guarded(Fn&& fn) {
    try {
        fn();
        return WSDT_OK;
    } catch (const wsdt::Error& e) {
        g_last_error = e.what();
        return status_for(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return WSDT_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return WSDT_ERR_INTERNAL;
    }
}

wsdt_status invalid_argument(const char* msg) {
    g_last_error = msg;
    return WSDT_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.data(), s.size() + 1);
    return out;
}

}  // namespace

extern "C" {

const char* wsdt_version(void) { return "1.0.0"; }

const char* wsdt_status_name(wsdt_status status) {
    switch (status) {
        case WSDT_OK: return "ok";
        case WSDT_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case WSDT_ERR_DIMENSION: return "dimension_error";
        case WSDT_ERR_CONFIG: return "config_error";
        case WSDT_ERR_CONTRACT: return "contract_error";
        case WSDT_ERR_IO: return "io_error";
        case WSDT_ERR_NUMERIC: return "numeric_error";
        case WSDT_ERR_INTERNAL: return "internal_error";
    }
    return "unknown";
}

const char* wsdt_last_error(void) { return g_last_error.c_str(); }

void wsdt_string_free(char* s) { delete[] s; }

wsdt_status wsdt_image_create(int32_t h, int32_t w, int32_t c, const float* data,
                              wsdt_image** out) {
    if (!out) return invalid_argument("out is null");
    if (h < 1 || w < 1 || c < 1) return invalid_argument("image dims must be positive");
    return guarded([&] {
        auto* img = new wsdt_image{wsdt::Image(h, w, c)};
        if (data) std::memcpy(img->img.data.data(), data, img->img.size() * sizeof(float));
        *out = img;
    });
}

void wsdt_image_free(wsdt_image* img) { delete img; }

int32_t wsdt_image_height(const wsdt_image* img) { return img ? img->img.h : 0; }
int32_t wsdt_image_width(const wsdt_image* img) { return img ? img->img.w : 0; }
int32_t wsdt_image_channels(const wsdt_image* img) { return img ? img->img.c : 0; }
float* wsdt_image_data(wsdt_image* img) { return img ? img->img.data.data() : nullptr; }

wsdt_status wsdt_image_read_pnm(const char* path, wsdt_image** out) {
    if (!path || !out) return invalid_argument("path/out is null");
    return guarded([&] { *out = new wsdt_image{wsdt::read_pnm(path)}; });
}

wsdt_status wsdt_image_write_pnm(const wsdt_image* img, const char* path) {
    if (!img || !path) return invalid_argument("image/path is null");
    return guarded([&] { wsdt::write_pnm(img->img, path); });
}

wsdt_status wsdt_level_for_scale(int32_t upscale, int32_t* levels_out) {
    if (!levels_out) return invalid_argument("levels_out is null");
    return guarded([&] { *levels_out = wsdt::level_for_scale(upscale); });
}

wsdt_status wsdt_mdwt(const wsdt_image* img, int32_t levels, wsdt_image** spectrum_out) {
    if (!img || !spectrum_out) return invalid_argument("image/out is null");
    return guarded([&] { *spectrum_out = new wsdt_image{wsdt::mdwt(img->img, levels)}; });
}

wsdt_status wsdt_imdwt(const wsdt_image* spectrum, int32_t levels, wsdt_image** image_out) {
    if (!spectrum || !image_out) return invalid_argument("spectrum/out is null");
    return guarded([&] { *image_out = new wsdt_image{wsdt::imdwt(spectrum->img, levels)}; });
}

wsdt_status wsdt_spectrum_render(const wsdt_image* spectrum, int32_t levels,
                                 wsdt_image** vis_out) {
    if (!spectrum || !vis_out) return invalid_argument("spectrum/out is null");
    return guarded([&] { *vis_out = new wsdt_image{wsdt::render_spectrum(spectrum->img, levels)}; });
}

wsdt_status wsdt_spectrum_save(const wsdt_image* spectrum, int32_t levels, const char* path) {
    if (!spectrum || !path) return invalid_argument("spectrum/path is null");
    return guarded([&] { wsdt::write_spectrum_sidecar(spectrum->img, levels, path); });
}

wsdt_status wsdt_spectrum_load(const char* path, wsdt_image** spectrum_out, int32_t* levels_out) {
    if (!path || !spectrum_out) return invalid_argument("path/out is null");
    return guarded([&] {
        int levels = 0;
        *spectrum_out = new wsdt_image{wsdt::read_spectrum_sidecar(path, &levels)};
        if (levels_out) *levels_out = levels;
    });
}

wsdt_status wsdt_metric_psnr(const wsdt_image* a, const wsdt_image* b, double* out) {
    if (!a || !b || !out) return invalid_argument("argument is null");
    return guarded([&] { *out = wsdt::psnr(a->img, b->img); });
}

wsdt_status wsdt_metric_ssim(const wsdt_image* a, const wsdt_image* b, double* out) {
    if (!a || !b || !out) return invalid_argument("argument is null");
    return guarded([&] { *out = wsdt::ssim(a->img, b->img); });
}

wsdt_status wsdt_metric_consistency(const wsdt_image* sr, const wsdt_image* lr, double* out) {
    if (!sr || !lr || !out) return invalid_argument("argument is null");
    return guarded([&] { *out = wsdt::consistency(sr->img, lr->img); });
}

wsdt_status wsdt_model_load(const char* checkpoint_path, wsdt_model** out) {
    if (!checkpoint_path || !out) return invalid_argument("path/out is null");
    return guarded([&] {
        auto* m = new wsdt_model;
        m->loaded = wsdt::load_model_checkpoint(checkpoint_path);
        wsdt::RunConfig rc;
        rc.model = m->loaded.cfg;
        rc.schedule = m->loaded.schedule;
        rc.train.seed = m->loaded.seed;
        m->metadata_json = rc.to_metadata_json(m->loaded.iteration);
        *out = m;
    });
}

void wsdt_model_free(wsdt_model* model) { delete model; }

wsdt_status wsdt_model_metadata_json(const wsdt_model* model, char** json_out) {
    if (!model || !json_out) return invalid_argument("model/out is null");
    return guarded([&] { *json_out = dup_string(model->metadata_json); });
}

wsdt_status wsdt_model_sample(const wsdt_model* model, const wsdt_image* lr, uint64_t seed,
                              wsdt_image** sr_out) {
    if (!model || !lr || !sr_out) return invalid_argument("argument is null");
    return guarded(
        [&] { *sr_out = new wsdt_image{wsdt::sample_run(model->loaded, lr->img, seed)}; });
}

wsdt_status wsdt_train_run(const char* config_json, const char* out_dir,
                           const char* resume_checkpoint) {
    if (!config_json || !out_dir) return invalid_argument("config/out_dir is null");
    return guarded([&] {
        wsdt::RunConfig cfg = wsdt::RunConfig::parse(config_json);
        wsdt::train_run(cfg, out_dir, resume_checkpoint ? resume_checkpoint : "");
    });
}

wsdt_status wsdt_gen_data_run(const char* config_json, const char* out_dir) {
    if (!config_json || !out_dir) return invalid_argument("config/out_dir is null");
    return guarded([&] {
        wsdt::RunConfig cfg = wsdt::RunConfig::parse(config_json);
        wsdt::gen_data_run(cfg, out_dir);
    });
}

wsdt_status wsdt_eval_run(const char* sr_dir, const char* hr_dir, const char* lr_dir,
                          int32_t threads, char** report_kv_out, char** report_json_out) {
    if (!sr_dir || !hr_dir || !lr_dir) return invalid_argument("directory argument is null");
    return guarded([&] {
        wsdt::EvalResult res = wsdt::eval_run(sr_dir, hr_dir, lr_dir, threads <= 0 ? 1 : threads);
        if (report_kv_out) *report_kv_out = dup_string(res.kv_text);
        if (report_json_out) *report_json_out = dup_string(res.json_text);
    });
}

}  // extern "C"
