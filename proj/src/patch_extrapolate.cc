#include "patch_extrapolate.h"

#include <algorithm>
#include <limits>
#include <random>
#include <vector>

#include "errors.h"

namespace foveapano {

namespace {

struct Level {
  RasterImage image;  // known pixels fixed, unknown pixels hold estimates
  Mask known;
  Mask valid_source;  // patch window fully inside and fully known
  std::vector<int> sources;
  std::vector<int> targets;
  std::vector<int> nnf;  // per pixel: linear index of matched source center

  int width() const { return image.width(); }
  int height() const { return image.height(); }
};

void IndexLevel(Level& level, int radius) {
  const int w = level.width();
  const int h = level.height();
  level.valid_source = Mask(w, h, 0);
  level.sources.clear();
  level.targets.clear();
  // Row-wise count of known pixels for fast window tests.
  std::vector<int> prefix(static_cast<std::size_t>(w + 1) * h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      prefix[y * (w + 1) + x + 1] = prefix[y * (w + 1) + x] + level.known.at(x, y);
    }
  }
  const int side = 2 * radius + 1;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!level.known.at(x, y)) level.targets.push_back(y * w + x);
      if (x < radius || y < radius || x + radius >= w || y + radius >= h) continue;
      bool full = true;
      for (int yy = y - radius; yy <= y + radius && full; ++yy) {
        full = prefix[yy * (w + 1) + x + radius + 1] -
                   prefix[yy * (w + 1) + x - radius] == side;
      }
      if (full) {
        level.valid_source.at(x, y) = 1;
        level.sources.push_back(y * w + x);
      }
    }
  }
  level.nnf.assign(static_cast<std::size_t>(w) * h, -1);
}

// Average of the known children of each 2x2 block; a coarse pixel is known
// when any child is.
Level Downsample(const Level& fine) {
  const int w = (fine.width() + 1) / 2;
  const int h = (fine.height() + 1) / 2;
  Level coarse{RasterImage(w, h), Mask(w, h, 0), {}, {}, {}, {}};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Color acc{0.0, 0.0, 0.0};
      int n = 0;
      for (int v = 0; v < 2; ++v) {
        for (int u = 0; u < 2; ++u) {
          const int fx = 2 * x + u;
          const int fy = 2 * y + v;
          if (!fine.known.Contains(fx, fy) || !fine.known.at(fx, fy)) continue;
          for (int c = 0; c < 3; ++c) acc[c] += fine.image.at(fx, fy, c);
          ++n;
        }
      }
      if (n > 0) {
        for (double& a : acc) a /= n;
        coarse.image.set_pixel(x, y, acc);
        coarse.known.at(x, y) = 1;
      }
    }
  }
  return coarse;
}

// Onion-peel fill: each ring of unknown pixels takes the mean of its
// already-filled 8-neighbors.
void DiffuseFromBoundary(Level& level) {
  const int w = level.width();
  const int h = level.height();
  Mask filled = level.known;
  std::vector<std::pair<int, Color>> ring;
  std::size_t remaining = level.targets.size();
  while (remaining > 0) {
    ring.clear();
    for (int t : level.targets) {
      const int x = t % w;
      const int y = t / w;
      if (filled.at(x, y)) continue;
      Color acc{0.0, 0.0, 0.0};
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx;
          const int ny = y + dy;
          if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= w || ny >= h ||
              !filled.at(nx, ny)) {
            continue;
          }
          for (int c = 0; c < 3; ++c) acc[c] += level.image.at(nx, ny, c);
          ++n;
        }
      }
      if (n == 0) continue;
      for (double& a : acc) a /= n;
      ring.emplace_back(t, acc);
    }
    if (ring.empty()) break;  // unreachable pixels keep their value
    for (const auto& [t, color] : ring) {
      level.image.set_pixel(t % w, t / w, color);
      filled.at(t % w, t / w) = 1;
    }
    remaining -= ring.size();
  }
}

class Synthesizer {
 public:
  Synthesizer(Level& level, int radius, int search_region, std::mt19937_64& rng)
      : level_(level), radius_(radius), rng_(rng),
        w_(level.width()), h_(level.height()),
        max_radius_(search_region > 0 ? search_region : std::max(w_, h_)) {}

  void RandomInit() {
    std::uniform_int_distribution<std::size_t> pick(0, level_.sources.size() - 1);
    for (int t : level_.targets) level_.nnf[t] = level_.sources[pick(rng_)];
  }

  void SearchPass(bool forward) {
    const auto& targets = level_.targets;
    const int n = static_cast<int>(targets.size());
    const int step = forward ? -1 : 1;  // neighbor offset to look back at
    for (int k = 0; k < n; ++k) {
      const int t = targets[forward ? k : n - 1 - k];
      const int tx = t % w_;
      const int ty = t / w_;
      int best = level_.nnf[t];
      double best_d = Distance(tx, ty, best);

      // Propagation from the horizontal and vertical predecessors.
      for (const auto& [dx, dy] : {std::pair{step, 0}, std::pair{0, step}}) {
        const int nx = tx + dx;
        const int ny = ty + dy;
        if (nx < 0 || ny < 0 || nx >= w_ || ny >= h_) continue;
        const int ns = level_.nnf[ny * w_ + nx];
        if (ns < 0) continue;
        TryCandidate(tx, ty, ns % w_ - dx, ns / w_ - dy, best, best_d);
      }

      // Random search with exponentially shrinking radius.
      for (int r = max_radius_; r >= 1; r /= 2) {
        std::uniform_int_distribution<int> offset(-r, r);
        const int cx = best % w_ + offset(rng_);
        const int cy = best / w_ + offset(rng_);
        TryCandidate(tx, ty, cx, cy, best, best_d);
      }
      level_.nnf[t] = best;
    }
  }

  // Every unknown pixel becomes the mean of the source pixels that the
  // overlapping target patches map onto it.
  void Vote() {
    const std::size_t count = static_cast<std::size_t>(w_) * h_;
    std::vector<double> sum(count * 3, 0.0);
    std::vector<int> weight(count, 0);
    const auto src = level_.image.samples();
    for (int t : level_.targets) {
      const int tx = t % w_;
      const int ty = t / w_;
      const int s = level_.nnf[t];
      const int sx = s % w_;
      const int sy = s / w_;
      for (int dy = -radius_; dy <= radius_; ++dy) {
        const int uy = ty + dy;
        if (uy < 0 || uy >= h_) continue;
        for (int dx = -radius_; dx <= radius_; ++dx) {
          const int ux = tx + dx;
          if (ux < 0 || ux >= w_ || level_.known.at(ux, uy)) continue;
          const std::size_t u = static_cast<std::size_t>(uy) * w_ + ux;
          const std::size_t v =
              (static_cast<std::size_t>(sy + dy) * w_ + sx + dx) * 3;
          sum[u * 3] += src[v];
          sum[u * 3 + 1] += src[v + 1];
          sum[u * 3 + 2] += src[v + 2];
          ++weight[u];
        }
      }
    }
    for (int t : level_.targets) {
      if (weight[t] == 0) continue;
      for (int c = 0; c < 3; ++c) {
        level_.image.at(t % w_, t / w_, c) = sum[t * 3 + c] / weight[t];
      }
    }
  }

 private:
  void TryCandidate(int tx, int ty, int cx, int cy, int& best, double& best_d) {
    if (cx < 0 || cy < 0 || cx >= w_ || cy >= h_ || !level_.valid_source.at(cx, cy)) {
      return;
    }
    const int cand = cy * w_ + cx;
    if (cand == best) return;
    const double d = Distance(tx, ty, cand);
    if (d < best_d) {
      best = cand;
      best_d = d;
    }
  }

  // Mean squared color difference over the in-bounds part of the target
  // patch. Source windows are always fully inside.
  double Distance(int tx, int ty, int s) const {
    const int sx = s % w_;
    const int sy = s / w_;
    const auto px = level_.image.samples();
    double sum = 0.0;
    int n = 0;
    const int x_lo = std::max(-radius_, -tx);
    const int x_hi = std::min(radius_, w_ - 1 - tx);
    const int y_lo = std::max(-radius_, -ty);
    const int y_hi = std::min(radius_, h_ - 1 - ty);
    for (int dy = y_lo; dy <= y_hi; ++dy) {
      const double* trow = &px[(static_cast<std::size_t>(ty + dy) * w_ + tx) * 3];
      const double* srow = &px[(static_cast<std::size_t>(sy + dy) * w_ + sx) * 3];
      for (int dx = x_lo; dx <= x_hi; ++dx) {
        const double d0 = trow[dx * 3] - srow[dx * 3];
        const double d1 = trow[dx * 3 + 1] - srow[dx * 3 + 1];
        const double d2 = trow[dx * 3 + 2] - srow[dx * 3 + 2];
        sum += d0 * d0 + d1 * d1 + d2 * d2;
      }
      n += x_hi - x_lo + 1;
    }
    return sum / n;
  }

  Level& level_;
  int radius_;
  std::mt19937_64& rng_;
  int w_;
  int h_;
  int max_radius_;
};

// Seeds |fine|'s correspondence field from |coarse| by doubling offsets.
void UpsampleField(const Level& coarse, Level& fine, std::mt19937_64& rng) {
  const int fw = fine.width();
  const int cw = coarse.width();
  std::uniform_int_distribution<std::size_t> pick(0, fine.sources.size() - 1);
  for (int t : fine.targets) {
    const int x = t % fw;
    const int y = t / fw;
    int candidate = -1;
    const int ct = (y / 2) * cw + x / 2;
    if (coarse.nnf[ct] >= 0) {
      const int sx = 2 * (coarse.nnf[ct] % cw) + x % 2;
      const int sy = 2 * (coarse.nnf[ct] / cw) + y % 2;
      if (fine.valid_source.Contains(sx, sy) && fine.valid_source.at(sx, sy)) {
        candidate = sy * fw + sx;
      }
    }
    fine.nnf[t] = candidate >= 0 ? candidate : fine.sources[pick(rng)];
  }
}

}  // namespace

void PatchParams::Validate() const {
  Require(patch_size >= 3 && patch_size % 2 == 1, ErrorCode::kInvalidArgument,
          "patch_size must be odd and >= 3");
  Require(pyramid_levels >= 1, ErrorCode::kInvalidArgument,
          "pyramid_levels must be >= 1");
  Require(iterations_per_level >= 1, ErrorCode::kInvalidArgument,
          "iterations_per_level must be >= 1");
  Require(search_region >= 0, ErrorCode::kInvalidArgument,
          "search_region must be >= 0");
}

RasterImage PatchExtrapolate(const RasterImage& input, const Mask& known,
                             const PatchParams& params, std::uint64_t seed) {
  params.Validate();
  Require(known.width() == input.width() && known.height() == input.height(),
          ErrorCode::kDimension, "known mask and input dimensions differ");
  const bool any_known = std::any_of(known.values().begin(), known.values().end(),
                                     [](std::uint8_t v) { return v != 0; });
  Require(any_known, ErrorCode::kInvalidArgument, "known region is empty");

  const int radius = params.patch_size / 2;
  std::vector<Level> pyramid;
  pyramid.push_back({input, known, {}, {}, {}, {}});
  for (auto& v : pyramid[0].known.values()) v = v ? 1 : 0;
  IndexLevel(pyramid[0], radius);
  if (pyramid[0].targets.empty()) return input;
  if (pyramid[0].sources.empty()) {
    // No patch fits in the known region; diffusion is all there is.
    DiffuseFromBoundary(pyramid[0]);
    return pyramid[0].image;
  }

  while (static_cast<int>(pyramid.size()) < params.pyramid_levels) {
    const Level& fine = pyramid.back();
    if (fine.width() < 2 * params.patch_size || fine.height() < 2 * params.patch_size) {
      break;
    }
    Level coarse = Downsample(fine);
    IndexLevel(coarse, radius);
    if (coarse.sources.empty() || coarse.targets.empty()) break;
    pyramid.push_back(std::move(coarse));
  }

  std::mt19937_64 rng(seed);
  Level& coarsest = pyramid.back();
  DiffuseFromBoundary(coarsest);

  for (int l = static_cast<int>(pyramid.size()) - 1; l >= 0; --l) {
    Level& level = pyramid[l];
    Synthesizer synth(level, radius, params.search_region, rng);
    if (l == static_cast<int>(pyramid.size()) - 1) {
      synth.RandomInit();
    } else {
      UpsampleField(pyramid[l + 1], level, rng);
      synth.Vote();
    }
    for (int it = 0; it < params.iterations_per_level; ++it) {
      synth.SearchPass(it % 2 == 0);
      synth.Vote();
    }
  }
  return pyramid[0].image;
}

}  // namespace foveapano
