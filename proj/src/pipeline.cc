#include "pipeline.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <thread>

#include "errors.h"
#include "image_io.h"
#include "metrics.h"

namespace foveapano {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double MillisSince(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

template <typename Fn>
auto WithStage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(stage) + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kInternal, std::string(stage) + ": " + e.what());
  }
}

void RequireNetworkOutput(const GeneratedImage& out, GeneratorStage stage,
                          const std::string& name) {
  Require(out.image.width() == kNetworkSize && out.image.height() == kNetworkSize,
          ErrorCode::kExternalGenerator,
          name + " produced a " + std::to_string(out.image.width()) + "x" +
              std::to_string(out.image.height()) + " image for stage " +
              std::string(StageName(stage)));
}

std::string FusionMethodName(FusionMethod m) {
  return m == FusionMethod::kOverlay ? "overlay" : "poisson";
}

std::string PreconditionerName(Preconditioner p) {
  switch (p) {
    case Preconditioner::kNone:
      return "none";
    case Preconditioner::kJacobi:
      return "jacobi";
    case Preconditioner::kMultigrid:
      return "multigrid";
  }
  return "none";
}

nlohmann::json SeamJson(const SeamMetrics& s) {
  return {{"overlay", s.overlay}, {"fused", s.fused}};
}

}  // namespace

PipelineConfig::PipelineConfig() {
  near_generator.kind = GeneratorKind::kPatchExtrapolate;
  mid_generator.kind = GeneratorKind::kPatchExtrapolate;
}

void PipelineConfig::Validate() const {
  near_generator.Validate();
  mid_generator.Validate();
  fusion.Validate();
  layout.Validate();
  Require(output_height >= 64, ErrorCode::kInvalidArgument,
          "output_height must be >= 64");
  Require(output_height % 2 == 0 || !extend_to_360, ErrorCode::kInvalidArgument,
          "mirror extension needs an even output_height");
  Require(mid_downscale == 1 || mid_downscale == 2 || mid_downscale == 4,
          ErrorCode::kInvalidArgument, "mid_downscale must be 1, 2 or 4");
}

nlohmann::json PipelineConfig::ToJson() const {
  return {
      {"near_generator", near_generator.ToJson()},
      {"mid_generator", mid_generator.ToJson()},
      {"fusion",
       {{"method", FusionMethodName(fusion.method)},
        {"cg_tolerance", fusion.cg_tolerance},
        {"cg_max_iters", fusion.cg_max_iters},
        {"preconditioner", PreconditionerName(fusion.preconditioner)},
        {"guidance", "source_gradient"}}},
      {"layout",
       {{"center_fov", layout.center_fov},
        {"near_fov", layout.near_fov},
        {"mid_fov", layout.mid_fov}}},
      {"output_height", output_height},
      {"extend_to_360", extend_to_360},
      {"mid_downscale", mid_downscale},
      {"seed", seed},
  };
}

PipelineConfig PipelineConfig::FromJson(const nlohmann::json& j) {
  PipelineConfig c;
  try {
    if (j.contains("near_generator")) {
      c.near_generator = GeneratorSpec::FromJson(j.at("near_generator"));
    }
    if (j.contains("mid_generator")) {
      c.mid_generator = GeneratorSpec::FromJson(j.at("mid_generator"));
    }
    if (j.contains("fusion")) {
      const auto& f = j.at("fusion");
      const std::string method = f.value("method", std::string("poisson"));
      Require(method == "poisson" || method == "overlay",
              ErrorCode::kInvalidArgument, "unknown fusion method: " + method);
      c.fusion.method = method == "overlay" ? FusionMethod::kOverlay
                                            : FusionMethod::kPoisson;
      c.fusion.cg_tolerance = f.value("cg_tolerance", c.fusion.cg_tolerance);
      c.fusion.cg_max_iters = f.value("cg_max_iters", c.fusion.cg_max_iters);
      const std::string pre = f.value("preconditioner",
                                      PreconditionerName(c.fusion.preconditioner));
      if (pre == "none") {
        c.fusion.preconditioner = Preconditioner::kNone;
      } else if (pre == "jacobi") {
        c.fusion.preconditioner = Preconditioner::kJacobi;
      } else if (pre == "multigrid") {
        c.fusion.preconditioner = Preconditioner::kMultigrid;
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown preconditioner: " + pre);
      }
      const std::string guidance = f.value("guidance", std::string("source_gradient"));
      Require(guidance == "source_gradient", ErrorCode::kInvalidArgument,
              "unsupported guidance: " + guidance);
    }
    if (j.contains("layout")) {
      const auto& l = j.at("layout");
      c.layout.center_fov = l.value("center_fov", c.layout.center_fov);
      c.layout.near_fov = l.value("near_fov", c.layout.near_fov);
      c.layout.mid_fov = l.value("mid_fov", c.layout.mid_fov);
    }
    c.output_height = j.value("output_height", c.output_height);
    c.extend_to_360 = j.value("extend_to_360", c.extend_to_360);
    c.mid_downscale = j.value("mid_downscale", c.mid_downscale);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("invalid pipeline config: ") + e.what());
  }
  c.Validate();
  return c;
}

PipelineResult RunPipeline(const PipelineConfig& config, const RasterImage& input,
                           const Generator& near_generator,
                           const Generator& mid_generator) {
  config.Validate();
  Require(input.width() >= 64 && input.height() >= 64, ErrorCode::kDimension,
          "input must be at least 64x64");
  const auto total_start = Clock::now();
  PipelineResult r;

  auto start = Clock::now();
  r.near_input = PreprocessInput(input, GeneratorStage::kNear);
  GeneratedImage near_out = WithStage("near generation", [&] {
    return near_generator.Generate(r.near_input, GeneratorStage::kNear);
  });
  RequireNetworkOutput(near_out, GeneratorStage::kNear, near_generator.name());
  r.near_generated = near_out.image;
  r.timings_ms["near_generation"] = MillisSince(start);

  start = Clock::now();
  const AlignedCanvas near_aligned = WithStage("near fusion", [&] {
    return Align(input, r.near_generated, GeneratorStage::kNear, config.layout);
  });
  r.fused_90 = WithStage("near fusion", [&] {
    return Fuse(near_aligned, config.fusion, &r.near_stats);
  });
  r.fused_90.ClampToUnitRange();
  r.near_mask = near_aligned.mask;
  r.near_seam = {SeamDiscontinuity(near_aligned.canvas, near_aligned.mask),
                 SeamDiscontinuity(r.fused_90, near_aligned.mask)};
  r.timings_ms["near_fusion"] = MillisSince(start);

  start = Clock::now();
  r.mid_input = PreprocessInput(r.fused_90, GeneratorStage::kMid);
  GeneratedImage mid_out = WithStage("mid generation", [&] {
    return mid_generator.Generate(r.mid_input, GeneratorStage::kMid);
  });
  RequireNetworkOutput(mid_out, GeneratorStage::kMid, mid_generator.name());
  r.mid_generated = mid_out.image;
  r.timings_ms["mid_generation"] = MillisSince(start);

  start = Clock::now();
  // Mid-periphery content carries 1/mid_downscale of the canvas resolution.
  const int content = std::max(1, config.output_height / config.mid_downscale);
  const RasterImage mid_content = Resize(r.mid_generated, content, content);
  AlignOptions mid_options;
  mid_options.canvas_height = config.output_height;
  const AlignedCanvas mid_aligned = WithStage("mid fusion", [&] {
    return Align(r.fused_90, mid_content, GeneratorStage::kMid, config.layout,
                 mid_options);
  });
  RasterImage fused_180 = WithStage("mid fusion", [&] {
    return Fuse(mid_aligned, config.fusion, &r.mid_stats);
  });
  fused_180.ClampToUnitRange();
  r.mid_mask = mid_aligned.mask;
  r.mid_seam = {SeamDiscontinuity(mid_aligned.canvas, mid_aligned.mask),
                SeamDiscontinuity(fused_180, mid_aligned.mask)};
  r.pano_180 = EquirectPanorama(std::move(fused_180), 180.0);
  r.timings_ms["mid_fusion"] = MillisSince(start);

  if (config.extend_to_360) {
    start = Clock::now();
    r.pano_360 = MirrorExtend(r.pano_180);
    r.timings_ms["mirror_extend"] = MillisSince(start);
  }
  r.timings_ms["total"] = MillisSince(total_start);
  return r;
}

PipelineResult RunPipeline(const PipelineConfig& config, const RasterImage& input) {
  config.Validate();
  const auto near = MakeGenerator(config.near_generator, config.seed);
  const auto mid = MakeGenerator(config.mid_generator, config.seed + 1);
  return RunPipeline(config, input, *near, *mid);
}

nlohmann::json WriteRunOutputs(const PipelineResult& result,
                               const PipelineConfig& config,
                               const std::string& input_path,
                               const fs::path& out_dir) {
  fs::create_directories(out_dir);
  nlohmann::json artifacts;
  auto save = [&](const std::string& key, const RasterImage& img,
                  const std::string& file) {
    const fs::path p = out_dir / file;
    SavePng(img, p.string());
    artifacts[key] = p.string();
  };
  save("pano180", result.pano_180.image(), "pano180.png");
  if (result.pano_360) save("pano360", result.pano_360->image(), "pano360.png");
  save("near_input", result.near_input, "stages/near_input.png");
  save("near_generated", result.near_generated, "stages/near_generated.png");
  save("fused90", result.fused_90, "stages/fused90.png");
  save("mid_input", result.mid_input, "stages/mid_input.png");
  save("mid_generated", result.mid_generated, "stages/mid_generated.png");

  nlohmann::json solver;
  for (const auto& [name, stats] :
       {std::pair{"near", &result.near_stats}, std::pair{"mid", &result.mid_stats}}) {
    nlohmann::json channels = nlohmann::json::array();
    for (const auto& ch : stats->channels) {
      channels.push_back({{"iterations", ch.iterations},
                          {"relative_residual", ch.relative_residual}});
    }
    solver[name] = {{"unknowns", stats->unknowns},
                    {"neumann_components", stats->neumann_components},
                    {"channels", channels}};
  }

  nlohmann::json manifest{
      {"input", input_path},
      {"config", config.ToJson()},
      {"artifacts", artifacts},
      {"timings_ms", result.timings_ms},
      {"seams",
       {{"near", SeamJson(result.near_seam)}, {"mid", SeamJson(result.mid_seam)}}},
      {"solver", solver},
  };
  const fs::path manifest_path = out_dir / "manifest.json";
  std::ofstream(manifest_path) << manifest.dump(2) << '\n';
  Require(fs::exists(manifest_path), ErrorCode::kIo,
          "failed to write " + manifest_path.string());
  return manifest;
}

std::vector<BatchItem> ReadBatchManifest(const std::string& path) {
  std::ifstream in(path);
  Require(in.good(), ErrorCode::kIo, "cannot open batch manifest " + path);
  std::vector<BatchItem> items;
  std::set<std::string> used;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    BatchItem item;
    if (line[first] == '{') {
      try {
        const auto j = nlohmann::json::parse(line);
        item.input = j.at("input").get<std::string>();
        item.id = j.value("id", std::string());
        item.ground_truth = j.value("gt", std::string());
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kInvalidArgument,
                    "bad batch manifest line in " + path + ": " + e.what());
      }
    } else {
      const auto last = line.find_last_not_of(" \t\r");
      item.input = line.substr(first, last - first + 1);
    }
    if (item.id.empty()) {
      // Derived ids get a numeric suffix when file stems repeat.
      const std::string stem = fs::path(item.input).stem().string();
      item.id = stem;
      for (int n = 2; used.count(item.id); ++n) item.id = stem + "-" + std::to_string(n);
    } else {
      Require(!used.count(item.id), ErrorCode::kInvalidArgument,
              "duplicate batch id " + item.id);
    }
    Require(!item.id.empty() && item.id.find("..") == std::string::npos &&
                !fs::path(item.id).is_absolute(),
            ErrorCode::kInvalidArgument, "unsafe batch id '" + item.id + "'");
    used.insert(item.id);
    const fs::path base = fs::path(path).parent_path();
    if (fs::path(item.input).is_relative()) item.input = (base / item.input).string();
    if (!item.ground_truth.empty() && fs::path(item.ground_truth).is_relative()) {
      item.ground_truth = (base / item.ground_truth).string();
    }
    items.push_back(std::move(item));
  }
  return items;
}

nlohmann::json BatchReport::ToJson() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& item : items) {
    nlohmann::json row{{"id", item.id}, {"ok", item.ok}};
    if (!item.ok) row["error"] = item.error;
    if (item.ok) row["output_dir"] = item.output_dir.string();
    if (item.psnr) {
      row["psnr"] = std::isinf(*item.psnr) ? nlohmann::json("inf")
                                           : nlohmann::json(*item.psnr);
    }
    if (item.nrmse) row["nrmse"] = *item.nrmse;
    rows.push_back(row);
  }
  return {{"succeeded", succeeded},
          {"failed", failed},
          {"wall_ms", wall_ms},
          {"items", rows}};
}

BatchReport CollectBatch(const PipelineConfig& config,
                         const std::vector<BatchItem>& items,
                         const fs::path& out_dir, int max_parallel) {
  config.Validate();
  Require(!items.empty(), ErrorCode::kInvalidArgument, "batch manifest is empty");
  const auto start = Clock::now();
  BatchReport report;
  report.items.resize(items.size());

  auto process = [&](std::size_t i) {
    const BatchItem& item = items[i];
    BatchItemResult& res = report.items[i];
    res.id = item.id;
    res.output_dir = out_dir / item.id;
    try {
      const RasterImage input = LoadImage(item.input);
      const PipelineResult run = RunPipeline(config, input);
      WriteRunOutputs(run, config, item.input, res.output_dir);
      if (!item.ground_truth.empty()) {
        const RasterImage& out = run.pano_180.image();
        // References at another resolution are compared at the output size.
        const RasterImage gt =
            Resize(LoadImage(item.ground_truth), out.width(), out.height());
        res.psnr = Psnr(out, gt);
        res.nrmse = Nrmse(out, gt);
      }
      res.ok = true;
    } catch (const std::exception& e) {
      res.ok = false;
      res.error = e.what();
    }
  };

  unsigned workers = max_parallel > 0 ? static_cast<unsigned>(max_parallel)
                                      : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(items.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) process(i);
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const auto& item : report.items) {
    (item.ok ? report.succeeded : report.failed)++;
  }
  report.wall_ms = MillisSince(start);
  fs::create_directories(out_dir);
  std::ofstream(out_dir / "batch_report.json") << report.ToJson().dump(2) << '\n';
  return report;
}

BatchReport RunBatch(const PipelineConfig& config,
                     const std::vector<BatchItem>& items, const fs::path& out_dir,
                     int max_parallel) {
  BatchReport report = CollectBatch(config, items, out_dir, max_parallel);
  Require(report.succeeded > 0, ErrorCode::kBatch,
          "all " + std::to_string(items.size()) + " batch items failed");
  return report;
}

}  // namespace foveapano
