#ifndef FOVEAPANO_PIPELINE_H_
#define FOVEAPANO_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "foveation.h"
#include "fusion.h"
#include "generator.h"
#include "projection.h"

namespace foveapano {

struct PipelineConfig {
  PipelineConfig();

  GeneratorSpec near_generator;
  GeneratorSpec mid_generator;
  FusionConfig fusion;
  FoveatedLayout layout;
  int output_height = 512;  // 180 degree canvas is output_height square
  bool extend_to_360 = false;
  int mid_downscale = 4;  // stage-2 content resolution divisor: 1, 2 or 4
  std::uint64_t seed = 0;

  void Validate() const;
  nlohmann::json ToJson() const;
  // Missing fields keep their defaults.
  static PipelineConfig FromJson(const nlohmann::json& j);
};

struct SeamMetrics {
  double overlay = 0.0;  // before blending
  double fused = 0.0;    // after the configured fusion method
};

struct PipelineResult {
  EquirectPanorama pano_180;
  std::optional<EquirectPanorama> pano_360;

  RasterImage near_input;
  RasterImage near_generated;
  RasterImage fused_90;
  RasterImage mid_input;
  RasterImage mid_generated;
  BlendMask near_mask;
  BlendMask mid_mask;
  SeamMetrics near_seam;
  SeamMetrics mid_seam;
  BlendStats near_stats;
  BlendStats mid_stats;
  std::map<std::string, double> timings_ms;
};

// narrow input -> near generation -> perspective fusion -> mid generation
// -> equirectangular fusion -> optional mirror extension. Errors are
// rethrown with the failing stage prefixed to the message.
PipelineResult RunPipeline(const PipelineConfig& config, const RasterImage& input,
                           const Generator& near_generator,
                           const Generator& mid_generator);

// Builds both generators from the config.
PipelineResult RunPipeline(const PipelineConfig& config, const RasterImage& input);

// Writes pano180.png, optional pano360.png, stage artifacts and
// manifest.json into |out_dir|. Returns the manifest.
nlohmann::json WriteRunOutputs(const PipelineResult& result,
                               const PipelineConfig& config,
                               const std::string& input_path,
                               const std::filesystem::path& out_dir);

struct BatchItem {
  std::string id;
  std::string input;
  std::string ground_truth;  // optional 180 degree reference, any square size
};

// JSON lines with "input" (and optional "id", "gt"), or one bare path per
// line. Ids default to the input file stem.
std::vector<BatchItem> ReadBatchManifest(const std::string& path);

struct BatchItemResult {
  std::string id;
  bool ok = false;
  std::string error;
  std::filesystem::path output_dir;
  std::optional<double> psnr;
  std::optional<double> nrmse;
};

struct BatchReport {
  std::vector<BatchItemResult> items;
  std::size_t succeeded = 0;
  std::size_t failed = 0;
  double wall_ms = 0.0;

  nlohmann::json ToJson() const;
};

// Runs every item into out_dir/<id>/, isolating failures per item, and
// writes out_dir/batch_report.json. |max_parallel| <= 0 uses the hardware
// concurrency. Never throws for item failures.
BatchReport CollectBatch(const PipelineConfig& config,
                         const std::vector<BatchItem>& items,
                         const std::filesystem::path& out_dir,
                         int max_parallel = 0);

// CollectBatch, then throws kBatch when every item failed.
BatchReport RunBatch(const PipelineConfig& config,
                     const std::vector<BatchItem>& items,
                     const std::filesystem::path& out_dir,
                     int max_parallel = 0);

}  // namespace foveapano

#endif  // FOVEAPANO_PIPELINE_H_
