#ifndef FOVEAPANO_GENERATOR_H_
#define FOVEAPANO_GENERATOR_H_

#include <cstdint>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "patch_extrapolate.h"
#include "projection.h"
#include "raster.h"
#include "stage.h"

namespace foveapano {

// Fixed side of the generator input/output domain.
inline constexpr int kNetworkSize = 256;

// Output of a generation stage. Near outputs are 90 degree perspective
// images, Mid outputs are 180 degree equirectangular images.
struct GeneratedImage {
  RasterImage image;
  GeneratorStage stage = GeneratorStage::kNear;

  bool is_equirect() const { return stage == GeneratorStage::kMid; }
  // Throws kDomain for Near outputs.
  EquirectPanorama AsPanorama() const;
};

enum class GeneratorKind { kResizeBaseline, kMirrorPad, kPatchExtrapolate, kExternal };

std::string GeneratorKindName(GeneratorKind kind);
GeneratorKind ParseGeneratorKind(const std::string& name);

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::kPatchExtrapolate;
  // Kind-specific settings, e.g. patch_size or known_fraction.
  nlohmann::json params = nlohmann::json::object();
  // External kind only: "{input}", "{output}", "{stage}" placeholders, or
  // "{input_list}" for batch invocation.
  std::string external_command;

  void Validate() const;
  PatchParams patch_params() const;
  // Side fraction of the 256 domain occupied by the known input for the
  // image-plane built-ins (default 0.5).
  double known_fraction() const;

  nlohmann::json ToJson() const;
  static GeneratorSpec FromJson(const nlohmann::json& j);
};

class Generator {
 public:
  virtual ~Generator() = default;

  // |input| is the preprocessed kNetworkSize x kNetworkSize stage input.
  virtual GeneratedImage Generate(const RasterImage& input,
                                  GeneratorStage stage) const = 0;
  virtual std::string name() const = 0;
};

std::unique_ptr<Generator> MakeGenerator(const GeneratorSpec& spec,
                                         std::uint64_t seed);

// Resizes (never zero-pads) to the fixed network domain. Breaking pixel
// alignment keeps a generator from copying the input straight through.
RasterImage PreprocessInput(const RasterImage& img, GeneratorStage stage);

// Stretches the input over the whole output domain; no new content.
GeneratedImage ResizeBaseline(const RasterImage& input, GeneratorStage stage);

// Places the input at |known_fraction| scale in the center and fills the
// rest with symmetric reflections of it.
GeneratedImage MirrorPad(const RasterImage& input, GeneratorStage stage,
                         double known_fraction = 0.5);

// Places the input like MirrorPad and fills the ring by coarse-to-fine
// patch synthesis.
GeneratedImage PatchExtrapolateStage(const RasterImage& input,
                                     GeneratorStage stage,
                                     const PatchParams& params,
                                     std::uint64_t seed,
                                     double known_fraction = 0.5);

}  // namespace foveapano

#endif  // FOVEAPANO_GENERATOR_H_
