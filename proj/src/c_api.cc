#include "foveapano/foveapano.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include <nlohmann/json.hpp>

#include "dataset.h"
#include "errors.h"
#include "external_generator.h"
#include "foveation.h"
#include "fusion.h"
#include "image_io.h"
#include "metrics.h"
#include "pipeline.h"
#include "projection.h"

struct fp_image {
  foveapano::RasterImage raster;
};

struct fp_pipeline {
  foveapano::PipelineConfig config;
};

namespace {

using foveapano::Error;
using foveapano::ErrorCode;

thread_local std::string g_last_error;

fp_status ToStatus(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return FP_ERR_INVALID_ARGUMENT;
    case ErrorCode::kDomain: return FP_ERR_DOMAIN;
    case ErrorCode::kDimension: return FP_ERR_DIMENSION;
    case ErrorCode::kCoverage: return FP_ERR_COVERAGE;
    case ErrorCode::kGeometry: return FP_ERR_GEOMETRY;
    case ErrorCode::kSolver: return FP_ERR_SOLVER;
    case ErrorCode::kExternalGenerator: return FP_ERR_EXTERNAL_GENERATOR;
    case ErrorCode::kIo: return FP_ERR_IO;
    case ErrorCode::kNormalization: return FP_ERR_NORMALIZATION;
    case ErrorCode::kBatch: return FP_ERR_BATCH;
    case ErrorCode::kInternal: return FP_ERR_INTERNAL;
  }
  return FP_ERR_INTERNAL;
}

template <typename Fn>
fp_status Guard(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return FP_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return ToStatus(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("invalid JSON: ") + e.what();
    return FP_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return FP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FP_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return FP_ERR_INTERNAL;
  }
}

void RequireArg(const void* p, const char* name) {
  foveapano::Require(p != nullptr, ErrorCode::kInvalidArgument,
                     std::string(name) + " must not be NULL");
}

char* CopyString(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

nlohmann::json ParseOptional(const char* json_text) {
  if (json_text == nullptr || *json_text == '\0') return nlohmann::json::object();
  return nlohmann::json::parse(json_text);
}

foveapano::GeneratorStage ToStage(fp_stage stage) {
  foveapano::Require(stage == FP_STAGE_NEAR || stage == FP_STAGE_MID,
                     ErrorCode::kInvalidArgument, "unknown stage");
  return stage == FP_STAGE_NEAR ? foveapano::GeneratorStage::kNear
                                : foveapano::GeneratorStage::kMid;
}

fp_image* Wrap(foveapano::RasterImage raster) {
  return new fp_image{std::move(raster)};
}

}  // namespace

extern "C" {

const char* fp_version(void) { return "1.0.0"; }

const char* fp_last_error(void) { return g_last_error.c_str(); }

const char* fp_status_name(fp_status status) {
  switch (status) {
    case FP_OK: return "ok";
    case FP_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case FP_ERR_DOMAIN: return "domain_error";
    case FP_ERR_DIMENSION: return "dimension_error";
    case FP_ERR_COVERAGE: return "coverage_error";
    case FP_ERR_GEOMETRY: return "geometry_error";
    case FP_ERR_SOLVER: return "solver_error";
    case FP_ERR_EXTERNAL_GENERATOR: return "external_generator_error";
    case FP_ERR_IO: return "io_error";
    case FP_ERR_NORMALIZATION: return "normalization_error";
    case FP_ERR_BATCH: return "batch_error";
    case FP_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

void fp_string_free(char* str) { delete[] str; }

fp_status fp_image_create(int width, int height, const double* rgb,
                          fp_image** out) {
  return Guard([&] {
    RequireArg(out, "out");
    foveapano::RasterImage img(width, height);
    if (rgb != nullptr) {
      std::memcpy(img.samples().data(), rgb, img.samples().size() * sizeof(double));
    }
    *out = Wrap(std::move(img));
  });
}

fp_status fp_image_load(const char* path, fp_image** out) {
  return Guard([&] {
    RequireArg(path, "path");
    RequireArg(out, "out");
    *out = Wrap(foveapano::LoadImage(path));
  });
}

fp_status fp_image_save_png(const fp_image* image, const char* path) {
  return Guard([&] {
    RequireArg(image, "image");
    RequireArg(path, "path");
    foveapano::SavePng(image->raster, path);
  });
}

int fp_image_width(const fp_image* image) {
  return image ? image->raster.width() : 0;
}

int fp_image_height(const fp_image* image) {
  return image ? image->raster.height() : 0;
}

const double* fp_image_data(const fp_image* image) {
  return image ? image->raster.samples().data() : nullptr;
}

void fp_image_free(fp_image* image) { delete image; }

fp_status fp_relative_resolution(double beta, double theta, double* out) {
  return Guard([&] {
    RequireArg(out, "out");
    *out = foveapano::RelativeResolution({beta}, theta);
  });
}

fp_status fp_required_resolution(double beta, double theta1, double theta2,
                                 double r1, double* out) {
  return Guard([&] {
    RequireArg(out, "out");
    *out = foveapano::RequiredResolution({beta}, theta1, theta2, r1);
  });
}

fp_status fp_input_fov(double linear_ratio, double alpha_prime, double* out) {
  return Guard([&] {
    RequireArg(out, "out");
    *out = foveapano::InputFov(linear_ratio, alpha_prime);
  });
}

fp_status fp_resolution_profile_csv(double beta, double r1, double step,
                                    int mid_downscale, const char* layout_json,
                                    char** csv_out) {
  return Guard([&] {
    RequireArg(csv_out, "csv_out");
    const nlohmann::json j = ParseOptional(layout_json);
    foveapano::FoveatedLayout layout;
    layout.center_fov = j.value("center_fov", layout.center_fov);
    layout.near_fov = j.value("near_fov", layout.near_fov);
    layout.mid_fov = j.value("mid_fov", layout.mid_fov);
    const auto rows =
        foveapano::ResolutionProfile({beta}, layout, r1, step, mid_downscale);
    *csv_out = CopyString(foveapano::ProfileToCsv(rows));
  });
}

fp_status fp_psnr(const fp_image* a, const fp_image* b, double* out,
                  int* is_infinite) {
  return Guard([&] {
    RequireArg(a, "a");
    RequireArg(b, "b");
    RequireArg(out, "out");
    const double v = foveapano::Psnr(a->raster, b->raster);
    *out = v;
    if (is_infinite) *is_infinite = std::isinf(v) ? 1 : 0;
  });
}

fp_status fp_nrmse(const fp_image* a, const fp_image* reference, double* out) {
  return Guard([&] {
    RequireArg(a, "a");
    RequireArg(reference, "reference");
    RequireArg(out, "out");
    *out = foveapano::Nrmse(a->raster, reference->raster);
  });
}

fp_status fp_evaluate(const char* pred_dir, const char* gt_dir,
                      const char* manifest_path, const char* target,
                      const char* out_csv, char** summary_json) {
  return Guard([&] {
    RequireArg(pred_dir, "pred_dir");
    RequireArg(gt_dir, "gt_dir");
    RequireArg(manifest_path, "manifest_path");
    RequireArg(summary_json, "summary_json");
    const auto entries =
        foveapano::ReadEvalManifest(manifest_path, target ? target : "near");
    const auto report = foveapano::Evaluate(pred_dir, gt_dir, entries);
    if (out_csv != nullptr) {
      std::ofstream csv(out_csv);
      foveapano::Require(csv.good(), ErrorCode::kIo,
                         std::string("cannot write ") + out_csv);
      csv << report.ToCsv();
    }
    *summary_json = CopyString(report.ToJson());
  });
}

fp_status fp_mirror_extend(const fp_image* pano180, fp_image** out) {
  return Guard([&] {
    RequireArg(pano180, "pano180");
    RequireArg(out, "out");
    const foveapano::EquirectPanorama pano(pano180->raster, 180.0);
    *out = Wrap(foveapano::MirrorExtend(pano).image());
  });
}

fp_status fp_prepare_dataset(const char* input_dir, const char* output_dir,
                             int native_size, char** summary_json) {
  return Guard([&] {
    RequireArg(input_dir, "input_dir");
    RequireArg(output_dir, "output_dir");
    RequireArg(summary_json, "summary_json");
    foveapano::PairOptions options;
    if (native_size > 0) options.native_size = native_size;
    const auto summary = foveapano::PrepareDataset(input_dir, output_dir, options);
    *summary_json = CopyString(summary.ToJson().dump());
  });
}

fp_status fp_fuse(const fp_image* original, const fp_image* generated,
                  fp_stage stage, const char* options_json, fp_image** out,
                  char** report_json) {
  return Guard([&] {
    RequireArg(original, "original");
    RequireArg(generated, "generated");
    RequireArg(out, "out");
    const nlohmann::json opts = ParseOptional(options_json);
    nlohmann::json fusion_json = opts;
    fusion_json.erase("canvas_height");
    fusion_json.erase("layout");
    nlohmann::json config_json{{"fusion", fusion_json}};
    if (opts.contains("layout")) config_json["layout"] = opts.at("layout");
    const auto config = foveapano::PipelineConfig::FromJson(config_json);

    foveapano::AlignOptions align;
    align.canvas_height = opts.value("canvas_height", 0);
    const auto aligned = foveapano::Align(original->raster, generated->raster,
                                          ToStage(stage), config.layout, align);
    foveapano::BlendStats stats;
    foveapano::RasterImage fused = foveapano::Fuse(aligned, config.fusion, &stats);
    const double before = foveapano::SeamDiscontinuity(aligned.canvas, aligned.mask);
    const double after = foveapano::SeamDiscontinuity(fused, aligned.mask);
    fused.ClampToUnitRange();
    if (report_json != nullptr) {
      nlohmann::json iterations = nlohmann::json::array();
      for (const auto& ch : stats.channels) iterations.push_back(ch.iterations);
      const nlohmann::json report{
          {"method", config.fusion.method == foveapano::FusionMethod::kOverlay
                         ? "overlay"
                         : "poisson"},
          {"seam_before", before},
          {"seam_after", after},
          {"width", fused.width()},
          {"height", fused.height()},
          {"unknowns", stats.unknowns},
          {"cg_iterations", iterations}};
      *report_json = CopyString(report.dump());
    }
    *out = Wrap(std::move(fused));
  });
}

fp_status fp_external_generate(const char* command_template,
                               const char* const* input_paths, size_t count,
                               fp_stage stage, fp_image*** outputs) {
  return Guard([&] {
    RequireArg(command_template, "command_template");
    RequireArg(outputs, "outputs");
    foveapano::Require(count == 0 || input_paths != nullptr,
                       ErrorCode::kInvalidArgument, "input_paths must not be NULL");
    foveapano::GeneratorSpec spec;
    spec.kind = foveapano::GeneratorKind::kExternal;
    spec.external_command = command_template;
    std::vector<std::string> inputs(input_paths, input_paths + count);
    auto images = foveapano::ExternalGenerate(spec, inputs, ToStage(stage));
    auto** array = new fp_image*[images.size() > 0 ? images.size() : 1];
    for (std::size_t i = 0; i < images.size(); ++i) array[i] = Wrap(std::move(images[i]));
    *outputs = array;
  });
}

void fp_image_array_free(fp_image** images, size_t count) {
  if (images == nullptr) return;
  for (size_t i = 0; i < count; ++i) delete images[i];
  delete[] images;
}

fp_status fp_pipeline_create(const char* config_json, fp_pipeline** out) {
  return Guard([&] {
    RequireArg(out, "out");
    *out = new fp_pipeline{
        foveapano::PipelineConfig::FromJson(ParseOptional(config_json))};
  });
}

fp_status fp_pipeline_config_json(const fp_pipeline* pipeline, char** out) {
  return Guard([&] {
    RequireArg(pipeline, "pipeline");
    RequireArg(out, "out");
    *out = CopyString(pipeline->config.ToJson().dump(2));
  });
}

fp_status fp_pipeline_run(const fp_pipeline* pipeline, const char* input_path,
                          const char* out_dir, char** manifest_json) {
  return Guard([&] {
    RequireArg(pipeline, "pipeline");
    RequireArg(input_path, "input_path");
    RequireArg(out_dir, "out_dir");
    const auto input = foveapano::LoadImage(input_path);
    const auto result = foveapano::RunPipeline(pipeline->config, input);
    const auto manifest =
        foveapano::WriteRunOutputs(result, pipeline->config, input_path, out_dir);
    if (manifest_json != nullptr) *manifest_json = CopyString(manifest.dump());
  });
}

fp_status fp_pipeline_run_image(const fp_pipeline* pipeline,
                                const fp_image* input, fp_image** pano180,
                                fp_image** pano360) {
  return Guard([&] {
    RequireArg(pipeline, "pipeline");
    RequireArg(input, "input");
    RequireArg(pano180, "pano180");
    auto result = foveapano::RunPipeline(pipeline->config, input->raster);
    if (pano360 != nullptr) {
      *pano360 = result.pano_360 ? Wrap(result.pano_360->image()) : nullptr;
    }
    *pano180 = Wrap(result.pano_180.image());
  });
}

fp_status fp_pipeline_run_batch(const fp_pipeline* pipeline,
                                const char* manifest_path, const char* out_dir,
                                int max_parallel, char** report_json) {
  return Guard([&] {
    RequireArg(pipeline, "pipeline");
    RequireArg(manifest_path, "manifest_path");
    RequireArg(out_dir, "out_dir");
    const auto items = foveapano::ReadBatchManifest(manifest_path);
    const auto report =
        foveapano::CollectBatch(pipeline->config, items, out_dir, max_parallel);
    if (report_json != nullptr) *report_json = CopyString(report.ToJson().dump());
    foveapano::Require(report.succeeded > 0, ErrorCode::kBatch,
                       "all " + std::to_string(items.size()) +
                           " batch items failed");
  });
}

void fp_pipeline_free(fp_pipeline* pipeline) { delete pipeline; }

}  // extern "C"
