#ifndef FOVEAPANO_FUSION_H_
#define FOVEAPANO_FUSION_H_

#include <array>
#include <cstddef>
#include <cstdint>

#include "foveation.h"
#include "raster.h"
#include "stage.h"

// Alignment of generated content with the original and gradient-domain
// fusion of the two.
namespace foveapano {

enum class BlendLabel : std::uint8_t {
  kOutside = 0,  // not part of the linear system
  kKeep = 1,     // fixed (Dirichlet) value
  kFill = 2,     // unknown
};

using BlendMask = Grid<BlendLabel>;

enum class FusionMethod { kOverlay, kPoisson };
// kMultigrid: one symmetric V-cycle over 2x2 Galerkin aggregates per
// iteration. Keeps iteration counts flat as the canvas grows.
enum class Preconditioner { kNone, kJacobi, kMultigrid };

struct FusionConfig {
  FusionMethod method = FusionMethod::kPoisson;
  double cg_tolerance = 1e-6;  // relative residual ||r|| / ||b||
  int cg_max_iters = 0;        // 0 selects 10 * sqrt(unknowns) + 1000
  Preconditioner preconditioner = Preconditioner::kMultigrid;
  bool parallel_channels = true;

  void Validate() const;
  int MaxItersFor(std::size_t unknowns) const;
};

struct ChannelSolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

struct BlendStats {
  std::size_t unknowns = 0;
  // Fill components with no Keep neighbor anywhere; their solution is the
  // guidance itself (the system fixes them only up to a constant).
  int neumann_components = 0;
  std::array<ChannelSolveStats, 3> channels{};
};

struct AlignedCanvas {
  RasterImage canvas;    // generated content with the original placed on top
  RasterImage guidance;  // generated content alone; source of gradients
  BlendMask mask;
};

struct AlignOptions {
  // Near: canvas size; 0 derives it from the layout's linear ratio.
  // Mid: equirectangular canvas height; 0 uses the generated height.
  int canvas_width = 0;
  int canvas_height = 0;
};

// Near: the original sits centered at native scale on the generated 90
// degree image. Mid: the 90 degree result is projected into the generated
// 180 degree equirectangular image. Throws kGeometry if the original's
// footprint exceeds the canvas.
AlignedCanvas Align(const RasterImage& original, const RasterImage& generated,
                    GeneratorStage stage, const FoveatedLayout& layout,
                    const AlignOptions& options = {});

// Solves, per channel and for every Fill pixel p,
//   sum_{q in N4(p), q in system} (f_p - f_q) = (g_p - g_q)
// with f_q = canvas_q for Keep neighbors and g the guidance. Keep and
// Outside pixels are returned bit-identical. Throws kSolver when CG does
// not reach the tolerance.
RasterImage PoissonBlend(const RasterImage& canvas, const RasterImage& guidance,
                         const BlendMask& mask, const FusionConfig& config,
                         BlendStats* stats = nullptr);

// Guidance taken from the canvas itself.
RasterImage PoissonBlend(const RasterImage& canvas, const BlendMask& mask,
                         const FusionConfig& config,
                         BlendStats* stats = nullptr);

RasterImage Overlay(const RasterImage& canvas, const BlendMask& mask);

// Dispatches on config.method.
RasterImage Fuse(const AlignedCanvas& aligned, const FusionConfig& config,
                 BlendStats* stats = nullptr);

// Mean absolute difference across all 4-neighbor (Keep, Fill) pairs,
// averaged over channels. Throws kDomain if there is no such pair.
double SeamDiscontinuity(const RasterImage& img, const BlendMask& mask);

// Fill -> Keep boundary check helper: number of Fill components with no
// Keep neighbor.
int CountNeumannComponents(const BlendMask& mask);

}  // namespace foveapano

#endif  // FOVEAPANO_FUSION_H_
