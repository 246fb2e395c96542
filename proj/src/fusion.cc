#include "fusion.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "errors.h"
#include "projection.h"

namespace foveapano {

namespace {

constexpr std::array<std::array<int, 2>, 4> kNeighborOffsets = {
    {{0, -1}, {-1, 0}, {1, 0}, {0, 1}}};

// Per Fill pixel: id of its 4-connected Fill component, and per component
// whether any pixel has a Keep neighbor.
struct FillComponents {
  std::vector<int> id;  // -1 for non-Fill pixels
  std::vector<bool> touches_keep;
};

FillComponents LabelFillComponents(const BlendMask& mask) {
  FillComponents out;
  out.id.assign(mask.values().size(), -1);
  std::vector<int> stack;
  const int w = mask.width();
  for (int start = 0; start < static_cast<int>(out.id.size()); ++start) {
    if (mask.values()[start] != BlendLabel::kFill || out.id[start] >= 0) continue;
    const int label = static_cast<int>(out.touches_keep.size());
    bool touches_keep = false;
    stack.assign(1, start);
    out.id[start] = label;
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      for (const auto& off : kNeighborOffsets) {
        const int nx = p % w + off[0];
        const int ny = p / w + off[1];
        if (!mask.Contains(nx, ny)) continue;
        const int q = ny * w + nx;
        const BlendLabel l = mask.values()[q];
        if (l == BlendLabel::kKeep) touches_keep = true;
        if (l == BlendLabel::kFill && out.id[q] < 0) {
          out.id[q] = label;
          stack.push_back(q);
        }
      }
    }
    out.touches_keep.push_back(touches_keep);
  }
  return out;
}

// Matrix-free discrete Laplacian over the Fill pixels that belong to a
// component with a Keep neighbor. Pure-Neumann components have b = A g
// exactly, so their solution is the guidance and they are left out.
struct PoissonSystem {
  struct Row {
    std::array<int, 4> fill{-1, -1, -1, -1};  // unknown index per neighbor slot
    std::array<bool, 4> keep{};               // neighbor slot is Keep
    int diagonal = 0;
  };

  int width = 0;
  int height = 0;
  std::vector<int> pixel;  // linear pixel index of each unknown
  std::vector<Row> rows;

  // y = A x, accumulated in neighbor order so that it matches the
  // right-hand side bit for bit on constant data.
  void Apply(const std::vector<double>& x, std::vector<double>& y) const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Row& row = rows[i];
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) {
        if (row.fill[k] >= 0) {
          acc += x[i] - x[row.fill[k]];
        } else if (row.keep[k]) {
          acc += x[i];
        }
      }
      y[i] = acc;
    }
  }
};

PoissonSystem BuildSystem(const BlendMask& mask) {
  const FillComponents components = LabelFillComponents(mask);
  PoissonSystem system;
  system.width = mask.width();
  system.height = mask.height();
  std::vector<int> index(mask.values().size(), -1);
  for (std::size_t p = 0; p < index.size(); ++p) {
    const int c = components.id[p];
    if (c >= 0 && components.touches_keep[c]) {
      index[p] = static_cast<int>(system.pixel.size());
      system.pixel.push_back(static_cast<int>(p));
    }
  }
  system.rows.resize(system.pixel.size());
  for (std::size_t i = 0; i < system.pixel.size(); ++i) {
    const int x = system.pixel[i] % mask.width();
    const int y = system.pixel[i] / mask.width();
    auto& row = system.rows[i];
    for (int k = 0; k < 4; ++k) {
      const int nx = x + kNeighborOffsets[k][0];
      const int ny = y + kNeighborOffsets[k][1];
      if (!mask.Contains(nx, ny)) continue;
      const BlendLabel label = mask.at(nx, ny);
      if (label == BlendLabel::kOutside) continue;
      ++row.diagonal;
      if (label == BlendLabel::kFill) {
        row.fill[k] = index[static_cast<std::size_t>(ny) * mask.width() + nx];
      } else {
        row.keep[k] = true;
      }
    }
  }
  return system;
}

// One level of the aggregation hierarchy: a weighted 5-point operator
// diag_i x_i - sum_k weight_ik x_nbr(i,k) on a grid of cells.
struct MultigridLevel {
  int width = 0;
  int height = 0;
  std::vector<int> cell;  // cell index of each unknown
  std::vector<std::array<int, 4>> neighbor;
  std::vector<std::array<double, 4>> weight;
  std::vector<double> diagonal;
  std::vector<int> parent;  // unknown index on the next coarser level

  std::size_t size() const { return cell.size(); }
};

// Galerkin coarsening P^T A P with P the piecewise-constant injection from
// 2x2 cell blocks. SPD in, SPD out.
MultigridLevel Coarsen(MultigridLevel& fine) {
  MultigridLevel coarse;
  coarse.width = (fine.width + 1) / 2;
  coarse.height = (fine.height + 1) / 2;
  std::vector<int> index(static_cast<std::size_t>(coarse.width) * coarse.height, -1);
  for (int c : fine.cell) {
    index[static_cast<std::size_t>(c / fine.width / 2) * coarse.width +
          c % fine.width / 2] = 0;
  }
  for (std::size_t c = 0; c < index.size(); ++c) {
    if (index[c] < 0) continue;
    index[c] = static_cast<int>(coarse.cell.size());
    coarse.cell.push_back(static_cast<int>(c));
  }
  const std::size_t n = coarse.cell.size();
  coarse.neighbor.assign(n, {-1, -1, -1, -1});
  coarse.weight.assign(n, {0.0, 0.0, 0.0, 0.0});
  coarse.diagonal.assign(n, 0.0);
  fine.parent.resize(fine.size());
  for (std::size_t i = 0; i < fine.size(); ++i) {
    const int c = fine.cell[i];
    fine.parent[i] = index[static_cast<std::size_t>(c / fine.width / 2) * coarse.width +
                           c % fine.width / 2];
  }
  for (std::size_t i = 0; i < fine.size(); ++i) {
    const int ci = fine.parent[i];
    coarse.diagonal[ci] += fine.diagonal[i];
    for (int k = 0; k < 4; ++k) {
      const int j = fine.neighbor[i][k];
      if (j < 0) continue;
      const int cj = fine.parent[j];
      if (cj == ci) {
        coarse.diagonal[ci] -= fine.weight[i][k];
      } else {
        // Blocks are 2x2, so a crossing edge keeps its direction.
        coarse.neighbor[ci][k] = cj;
        coarse.weight[ci][k] += fine.weight[i][k];
      }
    }
  }
  return coarse;
}

class MultigridPreconditioner {
 public:
  explicit MultigridPreconditioner(const PoissonSystem& system) {
    MultigridLevel fine;
    fine.width = system.width;
    fine.height = system.height;
    fine.cell = system.pixel;
    const std::size_t n = system.pixel.size();
    fine.neighbor.resize(n);
    fine.weight.resize(n);
    fine.diagonal.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& row = system.rows[i];
      fine.neighbor[i] = row.fill;
      for (int k = 0; k < 4; ++k) fine.weight[i][k] = row.fill[k] >= 0 ? 1.0 : 0.0;
      fine.diagonal[i] = row.diagonal;
    }
    levels_.push_back(std::move(fine));
    while (levels_.back().size() > kDirectSize &&
           (levels_.back().width > 1 || levels_.back().height > 1)) {
      levels_.push_back(Coarsen(levels_.back()));
    }
    const MultigridLevel& last = levels_.back();
    const int m = static_cast<int>(last.size());
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      dense(i, i) = last.diagonal[i];
      for (int k = 0; k < 4; ++k) {
        if (last.neighbor[i][k] >= 0) dense(i, last.neighbor[i][k]) -= last.weight[i][k];
      }
    }
    coarse_solver_.compute(dense);
    Require(coarse_solver_.info() == Eigen::Success, ErrorCode::kSolver,
            "multigrid coarse operator is not positive definite");
  }

  // result = M^{-1} in for one symmetric V-cycle M.
  void Apply(const std::vector<double>& in, std::vector<double>& result) const {
    Cycle(0, in, result);
  }

 private:
  static constexpr std::size_t kDirectSize = 256;

  void Cycle(std::size_t l, const std::vector<double>& rhs,
             std::vector<double>& x) const {
    const MultigridLevel& level = levels_[l];
    const std::size_t n = level.size();
    x.assign(n, 0.0);
    if (l + 1 == levels_.size()) {
      const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(n));
      Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(n)) =
          coarse_solver_.solve(b);
      return;
    }
    auto relax = [&](std::size_t i) {
      double acc = rhs[i];
      for (int k = 0; k < 4; ++k) {
        const int j = level.neighbor[i][k];
        if (j >= 0) acc += level.weight[i][k] * x[j];
      }
      x[i] = acc / level.diagonal[i];
    };
    for (std::size_t i = 0; i < n; ++i) relax(i);

    const std::size_t nc = levels_[l + 1].size();
    std::vector<double> coarse_rhs(nc, 0.0), coarse_x;
    for (std::size_t i = 0; i < n; ++i) {
      double r = rhs[i] - level.diagonal[i] * x[i];
      for (int k = 0; k < 4; ++k) {
        const int j = level.neighbor[i][k];
        if (j >= 0) r += level.weight[i][k] * x[j];
      }
      coarse_rhs[level.parent[i]] += r;
    }
    Cycle(l + 1, coarse_rhs, coarse_x);
    for (std::size_t i = 0; i < n; ++i) x[i] += coarse_x[level.parent[i]];

    for (std::size_t i = n; i-- > 0;) relax(i);
  }

  std::vector<MultigridLevel> levels_;
  Eigen::LLT<Eigen::MatrixXd> coarse_solver_;
};

double Dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Solves one channel in place in |out|.
ChannelSolveStats SolveChannel(const PoissonSystem& system,
                               const MultigridPreconditioner* multigrid,
                               const RasterImage& canvas,
                               const RasterImage& guidance, int channel,
                               const FusionConfig& config, RasterImage& out) {
  const std::size_t n = system.pixel.size();
  const int w = system.width;
  auto value = [w, channel](const RasterImage& img, int linear) {
    return img.at(linear % w, linear / w, channel);
  };

  std::vector<double> b(n), x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int p = system.pixel[i];
    const int px = p % w;
    const int py = p / w;
    const double gp = value(guidance, p);
    const auto& row = system.rows[i];
    double acc = 0.0;
    for (int k = 0; k < 4; ++k) {
      if (row.fill[k] < 0 && !row.keep[k]) continue;
      const int q = (py + kNeighborOffsets[k][1]) * w + px + kNeighborOffsets[k][0];
      double term = gp - value(guidance, q);
      if (row.keep[k]) term += value(canvas, q);
      acc += term;
    }
    b[i] = acc;
    x[i] = gp;
  }

  std::vector<double> r(n), z(n), p(n), ap(n);
  system.Apply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];

  const double b_norm = std::sqrt(Dot(b, b));
  double r_norm = std::sqrt(Dot(r, r));
  const double threshold =
      config.cg_tolerance * (b_norm > 0.0 ? b_norm : r_norm);
  const double reference = b_norm > 0.0 ? b_norm : (r_norm > 0.0 ? r_norm : 1.0);
  const int max_iters = config.MaxItersFor(n);

  auto precondition = [&](const std::vector<double>& in,
                          std::vector<double>& result) {
    switch (config.preconditioner) {
      case Preconditioner::kNone:
        result = in;
        break;
      case Preconditioner::kJacobi:
        for (std::size_t i = 0; i < n; ++i) result[i] = in[i] / system.rows[i].diagonal;
        break;
      case Preconditioner::kMultigrid:
        multigrid->Apply(in, result);
        break;
    }
  };

  ChannelSolveStats stats;
  if (r_norm > threshold) {
    precondition(r, z);
    p = z;
    double rz = Dot(r, z);
    while (true) {
      if (stats.iterations >= max_iters) {
        std::ostringstream msg;
        msg << "conjugate gradient did not converge on channel " << channel
            << " after " << stats.iterations
            << " iterations; relative residual " << r_norm / reference
            << " > tolerance " << config.cg_tolerance;
        throw Error(ErrorCode::kSolver, msg.str());
      }
      system.Apply(p, ap);
      const double alpha = rz / Dot(p, ap);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * ap[i];
      }
      ++stats.iterations;
      r_norm = std::sqrt(Dot(r, r));
      if (r_norm <= threshold) break;
      precondition(r, z);
      const double rz_next = Dot(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
  }
  stats.relative_residual = r_norm / reference;
  for (std::size_t i = 0; i < n; ++i) {
    const int q = system.pixel[i];
    out.at(q % w, q / w, channel) = x[i];
  }
  return stats;
}

void RequireSameShape(const RasterImage& img, const BlendMask& mask,
                      const char* what) {
  Require(img.width() == mask.width() && img.height() == mask.height(),
          ErrorCode::kDimension,
          std::string(what) + " and mask dimensions differ");
}

}  // namespace

void FusionConfig::Validate() const {
  Require(cg_tolerance > 0.0 && cg_tolerance < 1.0, ErrorCode::kInvalidArgument,
          "cg_tolerance must lie in (0,1)");
  Require(cg_max_iters >= 0, ErrorCode::kInvalidArgument,
          "cg_max_iters must be >= 1 (or 0 for automatic)");
}

int FusionConfig::MaxItersFor(std::size_t unknowns) const {
  if (cg_max_iters > 0) return cg_max_iters;
  return static_cast<int>(10.0 * std::sqrt(static_cast<double>(unknowns))) +
         1000;
}

AlignedCanvas Align(const RasterImage& original, const RasterImage& generated,
                    GeneratorStage stage, const FoveatedLayout& layout,
                    const AlignOptions& options) {
  layout.Validate();
  Require(!original.empty() && !generated.empty(), ErrorCode::kDimension,
          "align needs non-empty rasters");
  AlignedCanvas out;
  if (stage == GeneratorStage::kNear) {
    const double ratio = LinearRatio(layout.center_fov, layout.near_fov);
    const int cw = options.canvas_width > 0
                       ? options.canvas_width
                       : static_cast<int>(std::lround(original.width() / ratio));
    const int ch = options.canvas_height > 0
                       ? options.canvas_height
                       : static_cast<int>(std::lround(original.height() / ratio));
    Require(original.width() <= cw && original.height() <= ch,
            ErrorCode::kGeometry, "original footprint exceeds the canvas");
    out.guidance = Resize(generated, cw, ch);
    out.canvas = out.guidance;
    const int x0 = (cw - original.width()) / 2;
    const int y0 = (ch - original.height()) / 2;
    Paste(original, x0, y0, &out.canvas);
    out.mask = BlendMask(cw, ch, BlendLabel::kFill);
    for (int y = 0; y < original.height(); ++y) {
      for (int x = 0; x < original.width(); ++x) {
        out.mask.at(x0 + x, y0 + y) = BlendLabel::kKeep;
      }
    }
    return out;
  }

  const int ch = options.canvas_height > 0 ? options.canvas_height
                                           : generated.height();
  const double half = layout.near_half() * std::numbers::pi / 180.0;
  ViewSpec view;
  view.fov_h = layout.near_fov;
  view.fov_v = 2.0 * std::atan(static_cast<double>(original.height()) /
                               original.width() * std::tan(half)) *
               180.0 / std::numbers::pi;
  Require(view.fov_v < layout.mid_fov, ErrorCode::kGeometry,
          "original footprint exceeds the canvas");
  const EquirectPanorama base(Resize(generated, ch, ch), 180.0);
  InsertResult inserted = InsertView(base, original, view);
  out.guidance = base.image();
  out.canvas = std::move(inserted.pano.mutable_image());
  out.mask = BlendMask(ch, ch, BlendLabel::kFill);
  for (int y = 0; y < ch; ++y) {
    for (int x = 0; x < ch; ++x) {
      if (inserted.mask.at(x, y)) out.mask.at(x, y) = BlendLabel::kKeep;
    }
  }
  return out;
}

RasterImage PoissonBlend(const RasterImage& canvas, const RasterImage& guidance,
                         const BlendMask& mask, const FusionConfig& config,
                         BlendStats* stats) {
  config.Validate();
  RequireSameShape(canvas, mask, "canvas");
  RequireSameShape(guidance, mask, "guidance");
  for (double v : canvas.samples()) {
    Require(std::isfinite(v), ErrorCode::kInvalidArgument,
            "canvas has non-finite samples");
  }

  const PoissonSystem system = BuildSystem(mask);
  RasterImage out = canvas;
  BlendStats local;
  local.neumann_components = CountNeumannComponents(mask);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.at(x, y) != BlendLabel::kFill) continue;
      ++local.unknowns;
      // Overwritten below unless the pixel sits in a pure-Neumann component.
      out.set_pixel(x, y, guidance.pixel(x, y));
    }
  }
  std::optional<MultigridPreconditioner> multigrid;
  if (!system.pixel.empty() && config.preconditioner == Preconditioner::kMultigrid) {
    multigrid.emplace(system);
  }
  const MultigridPreconditioner* mg = multigrid ? &*multigrid : nullptr;
  if (!system.pixel.empty()) {
    if (config.parallel_channels) {
      std::array<std::exception_ptr, 3> errors;
      std::vector<std::thread> workers;
      for (int c = 0; c < 3; ++c) {
        workers.emplace_back([&, c] {
          try {
            local.channels[c] =
                SolveChannel(system, mg, canvas, guidance, c, config, out);
          } catch (...) {
            errors[c] = std::current_exception();
          }
        });
      }
      for (auto& t : workers) t.join();
      for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    } else {
      for (int c = 0; c < 3; ++c) {
        local.channels[c] = SolveChannel(system, mg, canvas, guidance, c, config, out);
      }
    }
  }
  if (stats) *stats = local;
  return out;
}

RasterImage PoissonBlend(const RasterImage& canvas, const BlendMask& mask,
                         const FusionConfig& config, BlendStats* stats) {
  return PoissonBlend(canvas, canvas, mask, config, stats);
}

RasterImage Overlay(const RasterImage& canvas, const BlendMask& mask) {
  RequireSameShape(canvas, mask, "canvas");
  return canvas;
}

RasterImage Fuse(const AlignedCanvas& aligned, const FusionConfig& config,
                 BlendStats* stats) {
  if (config.method == FusionMethod::kOverlay) {
    return Overlay(aligned.canvas, aligned.mask);
  }
  return PoissonBlend(aligned.canvas, aligned.guidance, aligned.mask, config,
                      stats);
}

double SeamDiscontinuity(const RasterImage& img, const BlendMask& mask) {
  RequireSameShape(img, mask, "image");
  double total = 0.0;
  std::size_t pairs = 0;
  auto visit = [&](int x0, int y0, int x1, int y1) {
    const BlendLabel a = mask.at(x0, y0);
    const BlendLabel b = mask.at(x1, y1);
    const bool seam = (a == BlendLabel::kKeep && b == BlendLabel::kFill) ||
                      (a == BlendLabel::kFill && b == BlendLabel::kKeep);
    if (!seam) return;
    double d = 0.0;
    for (int c = 0; c < 3; ++c) d += std::abs(img.at(x0, y0, c) - img.at(x1, y1, c));
    total += d / 3.0;
    ++pairs;
  };
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (x + 1 < mask.width()) visit(x, y, x + 1, y);
      if (y + 1 < mask.height()) visit(x, y, x, y + 1);
    }
  }
  Require(pairs > 0, ErrorCode::kDomain, "mask has no Keep/Fill boundary");
  return total / static_cast<double>(pairs);
}

int CountNeumannComponents(const BlendMask& mask) {
  const FillComponents components = LabelFillComponents(mask);
  return static_cast<int>(std::count(components.touches_keep.begin(),
                                     components.touches_keep.end(), false));
}

}  // namespace foveapano
