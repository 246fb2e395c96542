#ifndef FOVEAPANO_PATCH_EXTRAPOLATE_H_
#define FOVEAPANO_PATCH_EXTRAPOLATE_H_

#include <cstdint>

#include "raster.h"

namespace foveapano {

struct PatchParams {
  int patch_size = 7;
  int pyramid_levels = 4;
  int iterations_per_level = 5;
  int search_region = 0;  // max random-search radius in pixels; 0 = unbounded

  void Validate() const;
};

// Fills pixels where |known| is 0 from patches of the known region.
//
// A masked image pyramid is built; the coarsest level starts from an
// onion-peel diffusion of the boundary. Each level then alternates a
// randomized correspondence search (propagation plus shrinking-radius
// random probes) with voting of overlapping source patches, and the
// correspondence field is upsampled to seed the next level. Known pixels
// are returned unchanged and the result is a deterministic function of
// |seed|.
//
// Throws kInvalidArgument when the known region is empty.
RasterImage PatchExtrapolate(const RasterImage& input, const Mask& known,
                             const PatchParams& params, std::uint64_t seed);

}  // namespace foveapano

#endif  // FOVEAPANO_PATCH_EXTRAPOLATE_H_
