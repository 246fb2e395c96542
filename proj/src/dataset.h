#ifndef FOVEAPANO_DATASET_H_
#define FOVEAPANO_DATASET_H_

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "projection.h"

namespace foveapano {

struct DatasetSummary {
  std::size_t panoramas = 0;  // successfully converted
  std::size_t pairs = 0;
  std::vector<std::string> failures;  // "file: reason"
  std::filesystem::path manifest;

  nlohmann::json ToJson() const;
};

// Loads |path| as a full-sphere panorama; throws kCoverage unless the image
// is 2:1.
EquirectPanorama LoadFullSpherePanorama(const std::string& path);

// For every PNG/JPEG panorama in |input_dir| (sorted by name) writes
//   pairs/<pano-id>/<direction>/{input,near,mid}.png
// under |output_dir| and appends one JSON line per pair to
// output_dir/manifest.jsonl. Paths in the manifest are relative to
// |output_dir|. Panoramas that fail are listed, not fatal.
DatasetSummary PrepareDataset(const std::filesystem::path& input_dir,
                              const std::filesystem::path& output_dir,
                              const PairOptions& options = {});

}  // namespace foveapano

#endif  // FOVEAPANO_DATASET_H_
