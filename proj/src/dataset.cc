#include "dataset.h"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "errors.h"
#include "image_io.h"

namespace foveapano {

namespace fs = std::filesystem;

namespace {

bool IsPanoramaFile(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace

nlohmann::json DatasetSummary::ToJson() const {
  return {{"panoramas", panoramas},
          {"pairs", pairs},
          {"failures", failures},
          {"manifest", manifest.string()}};
}

EquirectPanorama LoadFullSpherePanorama(const std::string& path) {
  RasterImage img = LoadImage(path);
  Require(img.width() == 2 * img.height(), ErrorCode::kCoverage,
          path + " is not a full-sphere (2:1) panorama");
  return EquirectPanorama(std::move(img), 360.0);
}

DatasetSummary PrepareDataset(const fs::path& input_dir,
                              const fs::path& output_dir,
                              const PairOptions& options) {
  Require(fs::is_directory(input_dir), ErrorCode::kIo,
          "input directory not found: " + input_dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(input_dir)) {
    if (entry.is_regular_file() && IsPanoramaFile(entry.path())) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  Require(!files.empty(), ErrorCode::kInvalidArgument,
          "no PNG/JPEG panoramas in " + input_dir.string());

  fs::create_directories(output_dir);
  DatasetSummary summary;
  summary.manifest = output_dir / "manifest.jsonl";
  std::ofstream manifest(summary.manifest);
  Require(manifest.good(), ErrorCode::kIo,
          "cannot write " + summary.manifest.string());

  for (const auto& file : files) {
    const std::string pano_id = file.stem().string();
    std::vector<nlohmann::json> lines;
    try {
      const EquirectPanorama pano = LoadFullSpherePanorama(file.string());
      const auto pairs = MakePairs(pano, options);
      for (const auto& pair : pairs) {
        const std::string dir(DirectionName(pair.direction));
        const fs::path rel = fs::path("pairs") / pano_id / dir;
        const auto write = [&](const RasterImage& img, const char* name) {
          SavePng(img, (output_dir / rel / name).string());
          return (rel / name).generic_string();
        };
        lines.push_back({{"id", pano_id + "/" + dir},
                         {"pano_id", pano_id},
                         {"direction", dir},
                         {"input", write(pair.input_narrow, "input.png")},
                         {"near", write(pair.target_near, "near.png")},
                         {"mid", write(pair.target_mid, "mid.png")}});
      }
    } catch (const Error& e) {
      summary.failures.push_back(file.filename().string() + ": " + e.what());
      continue;
    }
    for (const auto& line : lines) manifest << line.dump() << '\n';
    summary.pairs += lines.size();
    ++summary.panoramas;
  }
  return summary;
}

}  // namespace foveapano
