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

// Command-line front end. All functionality lives behind the C API in
// libwsdt; this file only parses arguments, moves files and maps statuses to
// exit codes (0 ok, 2 usage/config, 3 numerical failure).

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "wsdt/wsdt.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

int exit_code_for(wsdt_status status) {
    if (status == WSDT_OK) return 0;
    return status == WSDT_ERR_NUMERIC ? kExitNumeric : kExitUsage;
}

int fail(wsdt_status status) {
    std::cerr << "wsdt: error (" << wsdt_status_name(status) << "): " << wsdt_last_error()
              << "\n";
    return exit_code_for(status);
}

struct ImageDeleter {
    void operator()(wsdt_image* p) const { wsdt_image_free(p); }
};
using ImagePtr = std::unique_ptr<wsdt_image, ImageDeleter>;

std::string read_text_file(const std::string& path, bool* ok) {
    std::ifstream in(path);
    if (!in) {
        *ok = false;
        return {};
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    *ok = true;
    return ss.str();
}

int run_dwt(const std::string& input, int levels, const std::string& out_dir) {
    wsdt_image* raw = nullptr;
    wsdt_status st = wsdt_image_read_pnm(input.c_str(), &raw);
    if (st != WSDT_OK) return fail(st);
    ImagePtr img(raw);

    wsdt_image* spec_raw = nullptr;
    st = wsdt_mdwt(img.get(), levels, &spec_raw);
    if (st != WSDT_OK) return fail(st);
    ImagePtr spectrum(spec_raw);

    wsdt_image* vis_raw = nullptr;
    st = wsdt_spectrum_render(spectrum.get(), levels, &vis_raw);
    if (st != WSDT_OK) return fail(st);
    ImagePtr vis(vis_raw);

    fs::create_directories(out_dir);
    bool gray = wsdt_image_channels(img.get()) == 1;
    std::string vis_path = (fs::path(out_dir) / (gray ? "spectrum.pgm" : "spectrum.ppm")).string();
    std::string sidecar_path = (fs::path(out_dir) / "spectrum.wsp").string();
    st = wsdt_image_write_pnm(vis.get(), vis_path.c_str());
    if (st != WSDT_OK) return fail(st);
    st = wsdt_spectrum_save(spectrum.get(), levels, sidecar_path.c_str());
    if (st != WSDT_OK) return fail(st);
    std::cout << "wrote " << vis_path << " and " << sidecar_path << "\n";
    return 0;
}

int run_idwt(const std::string& sidecar, const std::string& out_dir) {
    wsdt_image* spec_raw = nullptr;
    int32_t levels = 0;
    wsdt_status st = wsdt_spectrum_load(sidecar.c_str(), &spec_raw, &levels);
    if (st != WSDT_OK) return fail(st);
    ImagePtr spectrum(spec_raw);

    wsdt_image* img_raw = nullptr;
    st = wsdt_imdwt(spectrum.get(), levels, &img_raw);
    if (st != WSDT_OK) return fail(st);
    ImagePtr img(img_raw);

    fs::create_directories(out_dir);
    bool gray = wsdt_image_channels(img.get()) == 1;
    std::string out_path = (fs::path(out_dir) / (gray ? "restored.pgm" : "restored.ppm")).string();
    st = wsdt_image_write_pnm(img.get(), out_path.c_str());
    if (st != WSDT_OK) return fail(st);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int run_gen_data(const std::string& config_path, const std::string& out_dir) {
    bool ok = false;
    std::string config = read_text_file(config_path, &ok);
    if (!ok) {
        std::cerr << "wsdt: cannot read config file " << config_path << "\n";
        return kExitUsage;
    }
    wsdt_status st = wsdt_gen_data_run(config.c_str(), out_dir.c_str());
    if (st != WSDT_OK) return fail(st);
    std::cout << "wrote dataset under " << out_dir << "\n";
    return 0;
}

int run_train(const std::string& config_path, const std::string& out_dir,
              const std::string& resume) {
    bool ok = false;
    std::string config = read_text_file(config_path, &ok);
    if (!ok) {
        std::cerr << "wsdt: cannot read config file " << config_path << "\n";
        return kExitUsage;
    }
    wsdt_status st =
        wsdt_train_run(config.c_str(), out_dir.c_str(), resume.empty() ? nullptr : resume.c_str());
    if (st != WSDT_OK) return fail(st);
    std::cout << "training complete; outputs under " << out_dir << "\n";
    return 0;
}

int run_sample(const std::string& lr_path, const std::string& checkpoint, uint64_t seed,
               const std::string& out_dir) {
    wsdt_model* model_raw = nullptr;
    wsdt_status st = wsdt_model_load(checkpoint.c_str(), &model_raw);
    if (st != WSDT_OK) return fail(st);
    std::unique_ptr<wsdt_model, void (*)(wsdt_model*)> model(model_raw, wsdt_model_free);

    wsdt_image* lr_raw = nullptr;
    st = wsdt_image_read_pnm(lr_path.c_str(), &lr_raw);
    if (st != WSDT_OK) return fail(st);
    ImagePtr lr(lr_raw);

    wsdt_image* sr_raw = nullptr;
    st = wsdt_model_sample(model.get(), lr.get(), seed, &sr_raw);
    if (st != WSDT_OK) return fail(st);
    ImagePtr sr(sr_raw);

    fs::create_directories(out_dir);
    std::string out_path = (fs::path(out_dir) / "sr.ppm").string();
    st = wsdt_image_write_pnm(sr.get(), out_path.c_str());
    if (st != WSDT_OK) return fail(st);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int run_eval(const std::string& sr_dir, const std::string& hr_dir, const std::string& lr_dir,
             const std::string& out_dir) {
    int threads = 0;
    if (const char* env = std::getenv("WSDT_THREADS")) {
        threads = std::atoi(env);
        if (threads < 1) {
            std::cerr << "wsdt: WSDT_THREADS must be a positive integer\n";
            return kExitUsage;
        }
    }
    char* kv = nullptr;
    char* json = nullptr;
    wsdt_status st = wsdt_eval_run(sr_dir.c_str(), hr_dir.c_str(), lr_dir.c_str(), threads, &kv,
                                   &json);
    if (st != WSDT_OK) return fail(st);
    std::cout << kv;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream out(fs::path(out_dir) / "report.json");
        out << json << "\n";
    }
    wsdt_string_free(kv);
    wsdt_string_free(json);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wsdt: wavelet-spectrum diffusion transformer super-resolution"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(wsdt_version()));

    std::string input, sidecar, config, checkpoint, out_dir;
    std::string sr_dir, hr_dir, lr_dir;
    int levels = 1;
    uint64_t seed = 0;

    auto* dwt = app.add_subcommand("dwt", "Decompose an image into its packed wavelet spectrum");
    dwt->add_option("input", input, "PPM/PGM image")->required();
    dwt->add_option("--levels", levels, "Decomposition depth J")->required();
    dwt->add_option("--out", out_dir, "Output directory")->required();

    auto* idwt = app.add_subcommand("idwt", "Reconstruct an image from a spectrum sidecar");
    idwt->add_option("sidecar", sidecar, "spectrum.wsp sidecar file")->required();
    idwt->add_option("--out", out_dir, "Output directory")->required();

    auto* gen = app.add_subcommand("gen-data", "Generate the synthetic dataset");
    gen->add_option("--config", config, "Run configuration JSON")->required();
    gen->add_option("--out", out_dir, "Output directory")->required();

    auto* train = app.add_subcommand("train", "Train the model");
    train->add_option("--config", config, "Run configuration JSON")->required();
    train->add_option("--out", out_dir, "Output directory")->required();
    train->add_option("--checkpoint", checkpoint, "Checkpoint to resume from");

    auto* sample = app.add_subcommand("sample", "Super-resolve an LR image");
    sample->add_option("lr", input, "LR image (PPM/PGM)")->required();
    sample->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
    sample->add_option("--seed", seed, "Sampling seed")->required();
    sample->add_option("--out", out_dir, "Output directory")->required();

    auto* eval = app.add_subcommand("eval", "Score SR images against HR/LR references");
    eval->add_option("sr_dir", sr_dir, "Directory of SR images")->required();
    eval->add_option("hr_dir", hr_dir, "Directory of HR references")->required();
    eval->add_option("lr_dir", lr_dir, "Directory of LR inputs")->required();
    eval->add_option("--out", out_dir, "Directory for report.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    if (dwt->parsed()) return run_dwt(input, levels, out_dir);
    if (idwt->parsed()) return run_idwt(sidecar, out_dir);
    if (gen->parsed()) return run_gen_data(config, out_dir);
    if (train->parsed()) return run_train(config, out_dir, checkpoint);
    if (sample->parsed()) return run_sample(input, checkpoint, seed, out_dir);
    if (eval->parsed()) return run_eval(sr_dir, hr_dir, lr_dir, out_dir);
    return kExitUsage;
}
