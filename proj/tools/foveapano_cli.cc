// foveapano command-line front end. Everything goes through the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "foveapano/foveapano.h"

namespace {

using Json = nlohmann::json;

struct StringDeleter {
  void operator()(char* s) const { fp_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

struct ImageDeleter {
  void operator()(fp_image* img) const { fp_image_free(img); }
};
using OwnedImage = std::unique_ptr<fp_image, ImageDeleter>;

struct PipelineDeleter {
  void operator()(fp_pipeline* p) const { fp_pipeline_free(p); }
};
using OwnedPipeline = std::unique_ptr<fp_pipeline, PipelineDeleter>;

class CommandError : public std::runtime_error {
 public:
  CommandError(fp_status status, const std::string& what)
      : std::runtime_error(what), status(status) {}
  fp_status status;
};

void Check(fp_status status, const std::string& context) {
  if (status != FP_OK) {
    throw CommandError(status, context + ": " + fp_status_name(status) + ": " +
                                   fp_last_error());
  }
}

OwnedImage Load(const std::string& path) {
  fp_image* img = nullptr;
  Check(fp_image_load(path.c_str(), &img), "loading " + path);
  return OwnedImage(img);
}

Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CommandError(FP_ERR_IO, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw CommandError(FP_ERR_INVALID_ARGUMENT, path + ": " + e.what());
  }
}

// Pipeline flags; unset options leave the config file (or defaults) alone.
struct PipelineFlags {
  std::string config_path;
  std::optional<std::string> near_kind, mid_kind, near_command, mid_command;
  std::optional<std::string> method, preconditioner;
  std::optional<double> tol;
  std::optional<int> max_iters, output_height, mid_downscale;
  std::optional<unsigned long long> seed;
  bool extend_360 = false;

  void Register(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON pipeline config")
        ->check(CLI::ExistingFile);
    cmd->add_option("--near-generator", near_kind,
                    "resize_baseline|mirror_pad|patch_extrapolate|external");
    cmd->add_option("--mid-generator", mid_kind,
                    "resize_baseline|mirror_pad|patch_extrapolate|external");
    cmd->add_option("--near-command", near_command,
                    "external command template for the near stage");
    cmd->add_option("--mid-command", mid_command,
                    "external command template for the mid stage");
    cmd->add_option("--method", method, "overlay|poisson")
        ->check(CLI::IsMember({"overlay", "poisson"}));
    cmd->add_option("--preconditioner", preconditioner, "none|jacobi|multigrid")
        ->check(CLI::IsMember({"none", "jacobi", "multigrid"}));
    cmd->add_option("--tol", tol, "CG relative residual tolerance");
    cmd->add_option("--max-iters", max_iters, "CG iteration cap (0 = auto)");
    cmd->add_option("--output-height", output_height, "equirect canvas height");
    cmd->add_option("--mid-downscale", mid_downscale, "1, 2 or 4");
    cmd->add_option("--seed", seed, "seed for stochastic generators");
    cmd->add_flag("--extend-360", extend_360, "also write a mirrored 360 panorama");
  }

  std::string BuildConfig() const {
    Json c = config_path.empty() ? Json::object() : ReadJsonFile(config_path);
    auto generator = [&c](const char* key, const std::optional<std::string>& kind,
                          const std::optional<std::string>& command) {
      if (!c.contains(key) || c[key].is_string()) {
        Json g = Json::object();
        if (c.contains(key)) g["kind"] = c[key];
        c[key] = g;
      }
      if (kind) c[key]["kind"] = *kind;
      if (command) {
        c[key]["external_command"] = *command;
        if (!kind) c[key]["kind"] = "external";
      }
    };
    generator("near_generator", near_kind, near_command);
    generator("mid_generator", mid_kind, mid_command);
    if (method) c["fusion"]["method"] = *method;
    if (preconditioner) c["fusion"]["preconditioner"] = *preconditioner;
    if (tol) c["fusion"]["cg_tolerance"] = *tol;
    if (max_iters) c["fusion"]["cg_max_iters"] = *max_iters;
    if (output_height) c["output_height"] = *output_height;
    if (mid_downscale) c["mid_downscale"] = *mid_downscale;
    if (seed) c["seed"] = *seed;
    if (extend_360) c["extend_to_360"] = true;
    return c.dump();
  }

  OwnedPipeline Create() const {
    fp_pipeline* p = nullptr;
    Check(fp_pipeline_create(BuildConfig().c_str(), &p), "pipeline config");
    return OwnedPipeline(p);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Foveated panoramic outpainting: narrow image to 180/360 degree panorama"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fp_version()));

  // run
  auto* run = app.add_subcommand("run", "Expand one image to a panorama");
  std::string run_input, run_out = "out";
  PipelineFlags run_flags;
  run->add_option("input", run_input, "narrow-FoV input image")->required()
      ->check(CLI::ExistingFile);
  run->add_option("-o,--out-dir", run_out, "output directory");
  run_flags.Register(run);

  // run-batch
  auto* batch = app.add_subcommand("run-batch", "Run the pipeline over a manifest");
  std::string batch_manifest, batch_out = "out";
  int batch_parallel = 0;
  PipelineFlags batch_flags;
  batch->add_option("manifest", batch_manifest,
                    "JSON lines {\"input\",\"id\",\"gt\"} or one path per line")
      ->required()->check(CLI::ExistingFile);
  batch->add_option("-o,--out-dir", batch_out, "output directory");
  batch->add_option("-j,--jobs", batch_parallel, "parallel items (0 = all cores)");
  batch_flags.Register(batch);

  // prepare-dataset
  auto* prep = app.add_subcommand("prepare-dataset",
                                  "Extract front/right/back/left training triples");
  std::string prep_in, prep_out;
  int prep_native = 512;
  prep->add_option("input_dir", prep_in, "directory of 2:1 panoramas")->required()
      ->check(CLI::ExistingDirectory);
  prep->add_option("output_dir", prep_out, "output root")->required();
  prep->add_option("--native-size", prep_native,
                   "perspective extraction size before the 256 resize");

  // fuse
  auto* fuse = app.add_subcommand("fuse", "Align and fuse original with generated content");
  std::string fuse_original, fuse_generated, fuse_stage = "near", fuse_out;
  std::string fuse_method = "poisson", fuse_pre = "multigrid";
  double fuse_tol = 1e-6;
  int fuse_iters = 0, fuse_height = 0;
  fuse->add_option("--original", fuse_original)->required()->check(CLI::ExistingFile);
  fuse->add_option("--generated", fuse_generated)->required()->check(CLI::ExistingFile);
  fuse->add_option("--stage", fuse_stage, "near|mid")
      ->check(CLI::IsMember({"near", "mid"}));
  fuse->add_option("--method", fuse_method, "overlay|poisson")
      ->check(CLI::IsMember({"overlay", "poisson"}));
  fuse->add_option("--preconditioner", fuse_pre)->check(CLI::IsMember({"none", "jacobi", "multigrid"}));
  fuse->add_option("--tol", fuse_tol, "CG relative residual tolerance");
  fuse->add_option("--max-iters", fuse_iters, "CG iteration cap (0 = auto)");
  fuse->add_option("--height", fuse_height, "mid stage: equirect canvas height");
  fuse->add_option("-o,--out", fuse_out, "fused PNG")->required();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "PSNR / NRMSE of predictions against ground truth");
  std::string eval_pred, eval_gt, eval_manifest, eval_out, eval_target = "near";
  eval->add_option("--pred", eval_pred)->required()->check(CLI::ExistingDirectory);
  eval->add_option("--gt", eval_gt)->required()->check(CLI::ExistingDirectory);
  eval->add_option("--manifest", eval_manifest)->required()->check(CLI::ExistingFile);
  eval->add_option("--out", eval_out, "report CSV");
  eval->add_option("--target", eval_target, "manifest field when entries lack \"path\"")
      ->check(CLI::IsMember({"input", "near", "mid"}));

  // foveation profile
  auto* fov = app.add_subcommand("foveation", "Foveation model tools");
  fov->require_subcommand(1);
  auto* profile = fov->add_subcommand("profile", "Required vs delivered resolution as CSV");
  double prof_beta = 2.5, prof_r1 = 1.0, prof_step = 1.0;
  int prof_downscale = 4;
  std::string prof_out;
  profile->add_option("--beta", prof_beta, "acuity half-resolution angle (deg)");
  profile->add_option("--r1", prof_r1, "relative resolution of the input");
  profile->add_option("--step", prof_step, "sampling step (deg)");
  profile->add_option("--mid-downscale", prof_downscale, "stage-2 resolution divisor");
  profile->add_option("-o,--out", prof_out, "CSV file (default: stdout)");

  // extend360
  auto* ext = app.add_subcommand("extend360", "Mirror a 180 degree panorama to 360");
  std::string ext_in, ext_out;
  ext->add_option("input", ext_in)->required()->check(CLI::ExistingFile);
  ext->add_option("-o,--out", ext_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const OwnedPipeline pipeline = run_flags.Create();
      char* manifest = nullptr;
      Check(fp_pipeline_run(pipeline.get(), run_input.c_str(), run_out.c_str(), &manifest),
            "run");
      OwnedString owned(manifest);
      std::cout << Json::parse(manifest).dump(2) << '\n';
    } else if (*batch) {
      const OwnedPipeline pipeline = batch_flags.Create();
      char* report = nullptr;
      const fp_status status = fp_pipeline_run_batch(
          pipeline.get(), batch_manifest.c_str(), batch_out.c_str(), batch_parallel,
          &report);
      const std::string error = fp_last_error();
      OwnedString owned(report);
      if (report) std::cout << Json::parse(report).dump(2) << '\n';
      if (status != FP_OK) throw CommandError(status, "run-batch: " + error);
    } else if (*prep) {
      char* summary = nullptr;
      Check(fp_prepare_dataset(prep_in.c_str(), prep_out.c_str(), prep_native, &summary),
            "prepare-dataset");
      OwnedString owned(summary);
      std::cout << Json::parse(summary).dump(2) << '\n';
    } else if (*fuse) {
      const OwnedImage original = Load(fuse_original);
      const OwnedImage generated = Load(fuse_generated);
      const Json options{{"method", fuse_method},
                         {"cg_tolerance", fuse_tol},
                         {"cg_max_iters", fuse_iters},
                         {"preconditioner", fuse_pre},
                         {"canvas_height", fuse_height}};
      fp_image* fused = nullptr;
      char* report = nullptr;
      Check(fp_fuse(original.get(), generated.get(),
                    fuse_stage == "near" ? FP_STAGE_NEAR : FP_STAGE_MID,
                    options.dump().c_str(), &fused, &report),
            "fuse");
      const OwnedImage owned_fused(fused);
      OwnedString owned_report(report);
      Check(fp_image_save_png(fused, fuse_out.c_str()), "writing " + fuse_out);
      std::cout << report << '\n';
    } else if (*eval) {
      char* summary = nullptr;
      Check(fp_evaluate(eval_pred.c_str(), eval_gt.c_str(), eval_manifest.c_str(),
                        eval_target.c_str(), eval_out.empty() ? nullptr : eval_out.c_str(),
                        &summary),
            "evaluate");
      OwnedString owned(summary);
      std::cout << summary << '\n';
    } else if (*profile) {
      char* csv = nullptr;
      Check(fp_resolution_profile_csv(prof_beta, prof_r1, prof_step, prof_downscale,
                                      nullptr, &csv),
            "foveation profile");
      OwnedString owned(csv);
      if (prof_out.empty()) {
        std::cout << csv;
      } else {
        std::ofstream(prof_out) << csv;
      }
    } else if (*ext) {
      const OwnedImage pano = Load(ext_in);
      fp_image* extended = nullptr;
      Check(fp_mirror_extend(pano.get(), &extended), "extend360");
      const OwnedImage owned(extended);
      Check(fp_image_save_png(extended, ext_out.c_str()), "writing " + ext_out);
    }
  } catch (const CommandError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.status);
  }
  return 0;
}
