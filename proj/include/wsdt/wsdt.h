/* Copyright 2026 WSDT Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* Public C interface of the wsdt library: wavelet-spectrum diffusion
 * transformer super-resolution, plus the wavelet, metric and dataset
 * utilities behind the CLI.
 *
 * Conventions:
 *   - every fallible call returns wsdt_status; WSDT_OK is 0;
 *   - on failure, wsdt_last_error() returns a thread-local message;
 *   - objects are opaque handles released with their wsdt_*_free function;
 *   - images are dense row-major H x W x C float arrays with interleaved
 *     channels; file I/O and metrics expect values in [0,1].
 */

#ifndef WSDT_WSDT_H_
#define WSDT_WSDT_H_

#include <stdint.h>

#if defined(_WIN32)
#define WSDT_API __declspec(dllexport)
#else
#define WSDT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wsdt_status {
    WSDT_OK = 0,
    WSDT_ERR_INVALID_ARGUMENT = 1,
    WSDT_ERR_DIMENSION = 2,
    WSDT_ERR_CONFIG = 3,
    WSDT_ERR_CONTRACT = 4,
    WSDT_ERR_IO = 5,
    WSDT_ERR_NUMERIC = 6,
    WSDT_ERR_INTERNAL = 7
} wsdt_status;

typedef struct wsdt_image wsdt_image;
typedef struct wsdt_model wsdt_model;

WSDT_API const char* wsdt_version(void);
WSDT_API const char* wsdt_status_name(wsdt_status status);
/* Message describing the most recent failure on this thread. */
WSDT_API const char* wsdt_last_error(void);
/* Releases strings returned through char** out-parameters. */
WSDT_API void wsdt_string_free(char* s);

/* ---- images ---- */

/* data may be NULL for a zero-initialized image; otherwise h*w*c floats are
 * copied. */
WSDT_API wsdt_status wsdt_image_create(int32_t h, int32_t w, int32_t c, const float* data,
                                       wsdt_image** out);
WSDT_API void wsdt_image_free(wsdt_image* img);
WSDT_API int32_t wsdt_image_height(const wsdt_image* img);
WSDT_API int32_t wsdt_image_width(const wsdt_image* img);
WSDT_API int32_t wsdt_image_channels(const wsdt_image* img);
/* Mutable pointer to the h*w*c float payload. */
WSDT_API float* wsdt_image_data(wsdt_image* img);

/* Binary PPM (P6) / PGM (P5), maxval 255. Pixels map to [0,1]. */
WSDT_API wsdt_status wsdt_image_read_pnm(const char* path, wsdt_image** out);
WSDT_API wsdt_status wsdt_image_write_pnm(const wsdt_image* img, const char* path);

/* ---- wavelet spectra ---- */

/* Smallest J with 2^J >= upscale (upscale must be >= 2). */
WSDT_API wsdt_status wsdt_level_for_scale(int32_t upscale, int32_t* levels_out);
/* J-level Mallat decomposition into the packed spectrum layout; dims must be
 * divisible by 2^levels. */
WSDT_API wsdt_status wsdt_mdwt(const wsdt_image* img, int32_t levels, wsdt_image** spectrum_out);
WSDT_API wsdt_status wsdt_imdwt(const wsdt_image* spectrum, int32_t levels,
                                wsdt_image** image_out);
/* Per-sub-band normalization of a spectrum to [0,1] for display. */
WSDT_API wsdt_status wsdt_spectrum_render(const wsdt_image* spectrum, int32_t levels,
                                          wsdt_image** vis_out);
/* Raw f32 sidecar with exact coefficients, for lossless inversion. */
WSDT_API wsdt_status wsdt_spectrum_save(const wsdt_image* spectrum, int32_t levels,
                                        const char* path);
WSDT_API wsdt_status wsdt_spectrum_load(const char* path, wsdt_image** spectrum_out,
                                        int32_t* levels_out);

/* ---- metrics (images in [0,1]) ---- */

WSDT_API wsdt_status wsdt_metric_psnr(const wsdt_image* a, const wsdt_image* b, double* out);
WSDT_API wsdt_status wsdt_metric_ssim(const wsdt_image* a, const wsdt_image* b, double* out);
/* MSE(box_down(sr), lr) in units of 1e-5; the factor comes from the dims. */
WSDT_API wsdt_status wsdt_metric_consistency(const wsdt_image* sr, const wsdt_image* lr,
                                             double* out);

/* ---- model loading and sampling ---- */

WSDT_API wsdt_status wsdt_model_load(const char* checkpoint_path, wsdt_model** out);
WSDT_API void wsdt_model_free(wsdt_model* model);
/* Checkpoint metadata (model geometry, schedule, iteration, seed) as JSON. */
WSDT_API wsdt_status wsdt_model_metadata_json(const wsdt_model* model, char** json_out);
/* Conditional SR sampling. lr must match the checkpoint LR geometry and be
 * in [0,1]; the result is the HR image in [0,1]. Deterministic per seed. */
WSDT_API wsdt_status wsdt_model_sample(const wsdt_model* model, const wsdt_image* lr,
                                       uint64_t seed, wsdt_image** sr_out);

/* ---- full commands ---- */

/* Trains per the JSON run configuration, writing checkpoints and a
 * train_log.jsonl into out_dir. resume_checkpoint may be NULL. */
WSDT_API wsdt_status wsdt_train_run(const char* config_json, const char* out_dir,
                                    const char* resume_checkpoint);
/* Writes the synthetic dataset (hr/ and lr/ PPM trees) into out_dir. */
WSDT_API wsdt_status wsdt_gen_data_run(const char* config_json, const char* out_dir);
/* Scores SR images against HR/LR references (matched sorted file lists).
 * Either report output may be NULL when not wanted. threads <= 0 selects a
 * single-threaded run. */
WSDT_API wsdt_status wsdt_eval_run(const char* sr_dir, const char* hr_dir, const char* lr_dir,
                                   int32_t threads, char** report_kv_out, char** report_json_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* WSDT_WSDT_H_ */
