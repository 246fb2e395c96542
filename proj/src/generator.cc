#include "generator.h"

#include <cmath>

#include "errors.h"
#include "external_generator.h"

namespace foveapano {

namespace {

struct Placement {
  int x0;
  int y0;
  int size;
};

Placement CenteredPlacement(double known_fraction) {
  Require(known_fraction > 0.0 && known_fraction <= 1.0,
          ErrorCode::kInvalidArgument, "known_fraction must lie in (0,1]");
  const int size = std::max(1, static_cast<int>(std::lround(kNetworkSize * known_fraction)));
  const int offset = (kNetworkSize - size) / 2;
  return {offset, offset, size};
}

// Symmetric reflection of an index into [0, n).
int Reflect(int i, int n) {
  const int period = 2 * n;
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

class ResizeBaselineGenerator : public Generator {
 public:
  GeneratedImage Generate(const RasterImage& input,
                          GeneratorStage stage) const override {
    return ResizeBaseline(input, stage);
  }
  std::string name() const override { return "resize_baseline"; }
};

class MirrorPadGenerator : public Generator {
 public:
  explicit MirrorPadGenerator(double known_fraction) : known_fraction_(known_fraction) {}
  GeneratedImage Generate(const RasterImage& input,
                          GeneratorStage stage) const override {
    return MirrorPad(input, stage, known_fraction_);
  }
  std::string name() const override { return "mirror_pad"; }

 private:
  double known_fraction_;
};

class PatchExtrapolateGenerator : public Generator {
 public:
  PatchExtrapolateGenerator(PatchParams params, std::uint64_t seed,
                            double known_fraction)
      : params_(params), seed_(seed), known_fraction_(known_fraction) {}
  GeneratedImage Generate(const RasterImage& input,
                          GeneratorStage stage) const override {
    return PatchExtrapolateStage(input, stage, params_, seed_, known_fraction_);
  }
  std::string name() const override { return "patch_extrapolate"; }

 private:
  PatchParams params_;
  std::uint64_t seed_;
  double known_fraction_;
};

}  // namespace

EquirectPanorama GeneratedImage::AsPanorama() const {
  Require(is_equirect(), ErrorCode::kDomain,
          "near-stage output is a perspective image");
  return EquirectPanorama(image, 180.0);
}

std::string GeneratorKindName(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::kResizeBaseline: return "resize_baseline";
    case GeneratorKind::kMirrorPad: return "mirror_pad";
    case GeneratorKind::kPatchExtrapolate: return "patch_extrapolate";
    case GeneratorKind::kExternal: return "external";
  }
  return "unknown";
}

GeneratorKind ParseGeneratorKind(const std::string& name) {
  for (auto kind : {GeneratorKind::kResizeBaseline, GeneratorKind::kMirrorPad,
                    GeneratorKind::kPatchExtrapolate, GeneratorKind::kExternal}) {
    if (GeneratorKindName(kind) == name) return kind;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown generator kind: " + name);
}

void GeneratorSpec::Validate() const {
  Require(params.is_object(), ErrorCode::kInvalidArgument,
          "generator params must be an object");
  if (kind == GeneratorKind::kExternal) {
    const auto has = [this](const char* p) {
      return external_command.find(p) != std::string::npos;
    };
    Require(!external_command.empty(), ErrorCode::kInvalidArgument,
            "external generator requires a command template");
    Require(has("{input_list}") || (has("{input}") && has("{output}")),
            ErrorCode::kInvalidArgument,
            "external command template needs {input} and {output} "
            "placeholders (or {input_list})");
  }
  try {
    if (kind == GeneratorKind::kPatchExtrapolate) patch_params().Validate();
    known_fraction();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("malformed generator params: ") + e.what());
  }
}

PatchParams GeneratorSpec::patch_params() const {
  PatchParams p;
  p.patch_size = params.value("patch_size", p.patch_size);
  p.pyramid_levels = params.value("pyramid_levels", p.pyramid_levels);
  p.iterations_per_level = params.value("iterations_per_level", p.iterations_per_level);
  p.search_region = params.value("search_region", p.search_region);
  return p;
}

double GeneratorSpec::known_fraction() const {
  const double f = params.value("known_fraction", 0.5);
  Require(f > 0.0 && f <= 1.0, ErrorCode::kInvalidArgument,
          "known_fraction must lie in (0,1]");
  return f;
}

nlohmann::json GeneratorSpec::ToJson() const {
  nlohmann::json j{{"kind", GeneratorKindName(kind)}, {"params", params}};
  if (!external_command.empty()) j["external_command"] = external_command;
  return j;
}

GeneratorSpec GeneratorSpec::FromJson(const nlohmann::json& j) {
  GeneratorSpec spec;
  try {
    if (j.is_string()) {
      spec.kind = ParseGeneratorKind(j.get<std::string>());
      return spec;
    }
    spec.kind = ParseGeneratorKind(j.value("kind", std::string("patch_extrapolate")));
    if (j.contains("params")) spec.params = j.at("params");
    spec.external_command = j.value("external_command", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("invalid generator spec: ") + e.what());
  }
  spec.Validate();
  return spec;
}

std::unique_ptr<Generator> MakeGenerator(const GeneratorSpec& spec,
                                         std::uint64_t seed) {
  spec.Validate();
  switch (spec.kind) {
    case GeneratorKind::kResizeBaseline:
      return std::make_unique<ResizeBaselineGenerator>();
    case GeneratorKind::kMirrorPad:
      return std::make_unique<MirrorPadGenerator>(spec.known_fraction());
    case GeneratorKind::kPatchExtrapolate:
      return std::make_unique<PatchExtrapolateGenerator>(
          spec.patch_params(), seed, spec.known_fraction());
    case GeneratorKind::kExternal:
      return std::make_unique<ExternalGenerator>(spec);
  }
  throw Error(ErrorCode::kInternal, "unhandled generator kind");
}

RasterImage PreprocessInput(const RasterImage& img, GeneratorStage /*stage*/) {
  Require(!img.empty(), ErrorCode::kDimension, "generator input is empty");
  return Resize(img, kNetworkSize, kNetworkSize);
}

GeneratedImage ResizeBaseline(const RasterImage& input, GeneratorStage stage) {
  Require(!input.empty(), ErrorCode::kDimension, "generator input is empty");
  return {Resize(input, kNetworkSize, kNetworkSize), stage};
}

GeneratedImage MirrorPad(const RasterImage& input, GeneratorStage stage,
                         double known_fraction) {
  const Placement place = CenteredPlacement(known_fraction);
  const RasterImage small = Resize(input, place.size, place.size);
  RasterImage out(kNetworkSize, kNetworkSize);
  for (int y = 0; y < kNetworkSize; ++y) {
    const int sy = Reflect(y - place.y0, place.size);
    for (int x = 0; x < kNetworkSize; ++x) {
      out.set_pixel(x, y, small.pixel(Reflect(x - place.x0, place.size), sy));
    }
  }
  return {std::move(out), stage};
}

GeneratedImage PatchExtrapolateStage(const RasterImage& input,
                                     GeneratorStage stage,
                                     const PatchParams& params,
                                     std::uint64_t seed,
                                     double known_fraction) {
  const Placement place = CenteredPlacement(known_fraction);
  RasterImage canvas(kNetworkSize, kNetworkSize);
  Paste(Resize(input, place.size, place.size), place.x0, place.y0, &canvas);
  Mask known(kNetworkSize, kNetworkSize, 0);
  for (int y = 0; y < place.size; ++y) {
    for (int x = 0; x < place.size; ++x) known.at(place.x0 + x, place.y0 + y) = 1;
  }
  return {PatchExtrapolate(canvas, known, params, seed), stage};
}

}  // namespace foveapano
