#ifndef FOVEAPANO_STAGE_H_
#define FOVEAPANO_STAGE_H_

#include <optional>
#include <string>
#include <string_view>

namespace foveapano {

// Near: narrow perspective -> 90 degree perspective.
// Mid: 90 degree perspective -> 180 degree equirectangular.
enum class GeneratorStage { kNear, kMid };

inline std::string_view StageName(GeneratorStage stage) {
  return stage == GeneratorStage::kNear ? "near" : "mid";
}

inline std::optional<GeneratorStage> ParseStage(std::string_view name) {
  if (name == "near") return GeneratorStage::kNear;
  if (name == "mid") return GeneratorStage::kMid;
  return std::nullopt;
}

}  // namespace foveapano

#endif  // FOVEAPANO_STAGE_H_
