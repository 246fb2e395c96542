#include "fusion.h"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "errors.h"
#include "projection.h"
#include "test_util.h"

namespace foveapano {
namespace {

FusionConfig Tight(Preconditioner pre = Preconditioner::kNone) {
  FusionConfig c;
  c.cg_tolerance = 1e-13;
  c.preconditioner = pre;
  return c;
}

double MaxAbsDiff(const RasterImage& a, const RasterImage& b) {
  double worst = 0;
  for (std::size_t i = 0; i < a.samples().size(); ++i) {
    worst = std::max(worst, std::abs(a.samples()[i] - b.samples()[i]));
  }
  return worst;
}

void ExpectKeepIdentical(const RasterImage& out, const RasterImage& canvas,
                         const BlendMask& mask) {
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.at(x, y) != BlendLabel::kFill) {
        ASSERT_EQ(out.pixel(x, y), canvas.pixel(x, y)) << x << "," << y;
      }
    }
  }
}

BlendMask RandomMask(int w, int h, std::mt19937_64& rng, bool with_outside) {
  std::uniform_int_distribution<int> label(0, with_outside ? 5 : 3);
  BlendMask mask(w, h);
  for (auto& v : mask.values()) {
    const int l = label(rng);
    v = l == 0 ? BlendLabel::kKeep : (l >= 4 ? BlendLabel::kOutside : BlendLabel::kFill);
  }
  return mask;
}

class PoissonOracleTest : public ::testing::TestWithParam<Preconditioner> {};

TEST_P(PoissonOracleTest, MatchesDenseSolveOnRandomMasks) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const int w = 3 + trial % 6, h = 3 + (trial / 6) % 6;
    const BlendMask mask = RandomMask(w, h, rng, trial % 2 == 1);
    const RasterImage canvas = testing::RandomImage(w, h, rng);
    const RasterImage guidance = testing::RandomImage(w, h, rng);
    const RasterImage want = testing::DensePoissonOracle(canvas, guidance, mask);
    const RasterImage got = PoissonBlend(canvas, guidance, mask, Tight(GetParam()));
    ASSERT_LT(MaxAbsDiff(got, want), 1e-8) << "trial " << trial;
    ExpectKeepIdentical(got, canvas, mask);
  }
}

INSTANTIATE_TEST_SUITE_P(Preconditioners, PoissonOracleTest,
                         ::testing::Values(Preconditioner::kNone,
                                           Preconditioner::kJacobi,
                                           Preconditioner::kMultigrid),
                         [](const auto& info) {
                           switch (info.param) {
                             case Preconditioner::kNone: return std::string("None");
                             case Preconditioner::kJacobi: return std::string("Jacobi");
                             default: return std::string("Multigrid");
                           }
                         });

TEST(PoissonTest, FourByFourWithTwoByTwoFill) {
  std::mt19937_64 rng(32);
  BlendMask mask(4, 4, BlendLabel::kKeep);
  for (int y = 1; y < 3; ++y)
    for (int x = 1; x < 3; ++x) mask.at(x, y) = BlendLabel::kFill;
  const RasterImage canvas = testing::RandomImage(4, 4, rng);
  const RasterImage got = PoissonBlend(canvas, mask, Tight());
  EXPECT_LT(MaxAbsDiff(got, testing::DensePoissonOracle(canvas, canvas, mask)), 1e-8);
}

TEST(PoissonTest, ConstantCanvasIsReturnedExactly) {
  for (double c : {0.0, 0.3, 1.0 / 3.0, 0.9}) {
    const RasterImage canvas(40, 30, {c, c / 2, 1 - c});
    std::mt19937_64 rng(33);
    const BlendMask mask = RandomMask(40, 30, rng, true);
    EXPECT_EQ(PoissonBlend(canvas, mask, FusionConfig{}), canvas);
  }
}

TEST(PoissonTest, ConsistentGroundTruthIsAFixedPoint) {
  // Canvas and guidance both equal one image: f = canvas solves the system.
  const RasterImage img = testing::SmoothImage(64, 48);
  BlendMask mask(64, 48, BlendLabel::kFill);
  for (int y = 16; y < 32; ++y)
    for (int x = 20; x < 44; ++x) mask.at(x, y) = BlendLabel::kKeep;
  EXPECT_LT(MaxAbsDiff(PoissonBlend(img, mask, FusionConfig{}), img), 1e-12);
}

TEST(PoissonTest, MaximumPrincipleWithFlatGuidance) {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 20; ++trial) {
    const BlendMask mask = RandomMask(24, 24, rng, true);
    const RasterImage canvas = testing::RandomImage(24, 24, rng);
    const RasterImage flat(24, 24, {0.5, 0.5, 0.5});
    const RasterImage out = PoissonBlend(canvas, flat, mask, Tight());
    double lo[3] = {1, 1, 1}, hi[3] = {0, 0, 0};
    bool any_keep = false;
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 24; ++x)
        if (mask.at(x, y) == BlendLabel::kKeep) {
          any_keep = true;
          for (int c = 0; c < 3; ++c) {
            lo[c] = std::min(lo[c], canvas.at(x, y, c));
            hi[c] = std::max(hi[c], canvas.at(x, y, c));
          }
        }
    if (!any_keep) continue;
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 24; ++x)
        if (mask.at(x, y) == BlendLabel::kFill)
          for (int c = 0; c < 3; ++c) {
            // Pure-Neumann islands keep the flat guidance, 0.5, which may lie
            // outside the Keep range; only anchored pixels are bounded.
            const double v = out.at(x, y, c);
            if (v == 0.5) continue;
            EXPECT_GE(v, lo[c] - 1e-9);
            EXPECT_LE(v, hi[c] + 1e-9);
          }
  }
}

TEST(PoissonTest, Linearity) {
  std::mt19937_64 rng(35);
  const BlendMask mask = RandomMask(32, 32, rng, true);
  const RasterImage canvas = testing::RandomImage(32, 32, rng);
  const RasterImage guidance = testing::RandomImage(32, 32, rng);
  const RasterImage base = PoissonBlend(canvas, guidance, mask, Tight());
  for (double a : {0.0, 0.25, 0.7, 1.0}) {
    const RasterImage scaled =
        PoissonBlend(Scale(canvas, a), Scale(guidance, a), mask, Tight());
    EXPECT_LT(MaxAbsDiff(scaled, Scale(base, a)), 1e-9) << a;
  }
}

TEST(PoissonTest, PreconditionersAgreeToTolerance) {
  const RasterImage guidance = testing::SmoothImage(120, 90, 0.4);
  RasterImage canvas = guidance;
  BlendMask mask(120, 90, BlendLabel::kFill);
  for (int y = 20; y < 70; ++y)
    for (int x = 30; x < 90; ++x) {
      mask.at(x, y) = BlendLabel::kKeep;
      for (int c = 0; c < 3; ++c) canvas.at(x, y, c) += 0.2;
    }
  FusionConfig cfg;
  cfg.cg_tolerance = 1e-10;
  cfg.preconditioner = Preconditioner::kNone;
  const RasterImage plain = PoissonBlend(canvas, guidance, mask, cfg);
  for (Preconditioner p : {Preconditioner::kJacobi, Preconditioner::kMultigrid}) {
    cfg.preconditioner = p;
    BlendStats stats;
    const RasterImage other = PoissonBlend(canvas, guidance, mask, cfg, &stats);
    EXPECT_LT(MaxAbsDiff(plain, other), 1e-7);
    EXPECT_LE(stats.channels[0].relative_residual, 1e-10);
  }
}

TEST(PoissonTest, ParallelChannelsMatchSerialBitForBit) {
  std::mt19937_64 rng(36);
  const BlendMask mask = RandomMask(50, 40, rng, true);
  const RasterImage canvas = testing::RandomImage(50, 40, rng);
  FusionConfig cfg;
  cfg.parallel_channels = true;
  const RasterImage a = PoissonBlend(canvas, mask, cfg);
  cfg.parallel_channels = false;
  EXPECT_EQ(a, PoissonBlend(canvas, mask, cfg));
  EXPECT_EQ(a, PoissonBlend(canvas, mask, cfg));
}

TEST(PoissonTest, PureNeumannComponentReturnsGuidance) {
  std::mt19937_64 rng(37);
  BlendMask mask(8, 8, BlendLabel::kKeep);
  // Island of Fill walled off by Outside.
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) mask.at(x, y) = BlendLabel::kOutside;
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x) mask.at(x, y) = BlendLabel::kFill;
  mask.at(6, 6) = BlendLabel::kFill;
  const RasterImage canvas = testing::RandomImage(8, 8, rng);
  const RasterImage guidance = testing::RandomImage(8, 8, rng);
  BlendStats stats;
  const RasterImage out = PoissonBlend(canvas, guidance, mask, FusionConfig{}, &stats);
  EXPECT_EQ(stats.neumann_components, 1);
  EXPECT_EQ(CountNeumannComponents(mask), 1);
  EXPECT_EQ(stats.unknowns, 10u);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x) EXPECT_EQ(out.pixel(x, y), guidance.pixel(x, y));
}

TEST(PoissonTest, NonConvergenceReportsResidual) {
  const RasterImage guidance = testing::SmoothImage(64, 64);
  RasterImage canvas = guidance;
  BlendMask mask(64, 64, BlendLabel::kFill);
  for (int x = 0; x < 64; ++x) {
    mask.at(x, 0) = BlendLabel::kKeep;
    canvas.set_pixel(x, 0, {1, 1, 1});
  }
  FusionConfig cfg;
  cfg.preconditioner = Preconditioner::kNone;
  cfg.cg_max_iters = 2;
  try {
    PoissonBlend(canvas, guidance, mask, cfg);
    FAIL() << "expected a solver error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSolver);
    EXPECT_NE(std::string(e.what()).find("relative residual"), std::string::npos);
  }
}

TEST(PoissonTest, RejectsBadInput) {
  RasterImage canvas(4, 4);
  EXPECT_THROW(PoissonBlend(canvas, BlendMask(5, 4), FusionConfig{}), Error);
  canvas.at(1, 1, 1) = std::nan("");
  EXPECT_THROW(PoissonBlend(canvas, BlendMask(4, 4), FusionConfig{}), Error);
  FusionConfig bad;
  bad.cg_tolerance = 0.0;
  EXPECT_THROW(bad.Validate(), Error);
}

// Generated content g with the original equal to g + step on a centered
// rectangle: the classic mismatched-exposure fixture.
AlignedCanvas BrightnessStep(double step, int w = 96, int h = 80) {
  AlignedCanvas a;
  a.guidance = Scale(testing::SmoothImage(w, h, step), 0.5);
  a.canvas = a.guidance;
  a.mask = BlendMask(w, h, BlendLabel::kFill);
  for (int y = h / 4; y < 3 * h / 4; ++y)
    for (int x = w / 4; x < 3 * w / 4; ++x) {
      a.mask.at(x, y) = BlendLabel::kKeep;
      for (int c = 0; c < 3; ++c) a.canvas.at(x, y, c) = a.guidance.at(x, y, c) + step;
    }
  return a;
}

TEST(SeamTest, PoissonRemovesBrightnessSteps) {
  for (double step : {0.1, 0.2, 0.3, 0.4, 0.5}) {
    const AlignedCanvas a = BrightnessStep(step);
    const double before = SeamDiscontinuity(Overlay(a.canvas, a.mask), a.mask);
    const double after = SeamDiscontinuity(Fuse(a, FusionConfig{}), a.mask);
    EXPECT_LE(after, before);
    EXPECT_LE(after, 0.2 * before) << step;
  }
}

TEST(SeamTest, StepOfPointThreeMeasuresPointThree) {
  BlendMask mask(10, 10, BlendLabel::kFill);
  RasterImage img(10, 10, {0.2, 0.2, 0.2});
  for (int y = 3; y < 7; ++y)
    for (int x = 3; x < 7; ++x) {
      mask.at(x, y) = BlendLabel::kKeep;
      img.set_pixel(x, y, {0.5, 0.5, 0.5});
    }
  EXPECT_NEAR(SeamDiscontinuity(img, mask), 0.3, 1e-12);
}

TEST(SeamTest, LinearRampGivesPerPixelStep) {
  RasterImage img(20, 20);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 20; ++x) img.set_pixel(x, y, {0.01 * x, 0.01 * x, 0.01 * x});
  BlendMask mask(20, 20, BlendLabel::kFill);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 10; ++x) mask.at(x, y) = BlendLabel::kKeep;
  EXPECT_NEAR(SeamDiscontinuity(img, mask), 0.01, 1e-12);
  EXPECT_THROW(SeamDiscontinuity(img, BlendMask(20, 20, BlendLabel::kFill)), Error);
}

TEST(AlignTest, NearPlacesOriginalInCentralHalf) {
  std::mt19937_64 rng(38);
  const RasterImage original = testing::RandomImage(128, 128, rng);
  const RasterImage generated = testing::RandomImage(256, 256, rng);
  const AlignedCanvas a = Align(original, generated, GeneratorStage::kNear,
                                FoveatedLayout{}, AlignOptions{});
  ASSERT_EQ(a.canvas.width(), 256);
  EXPECT_EQ(a.guidance, generated);
  for (int y = 0; y < 256; ++y)
    for (int x = 0; x < 256; ++x) {
      const bool inside = x >= 64 && x < 192 && y >= 64 && y < 192;
      ASSERT_EQ(a.mask.at(x, y), inside ? BlendLabel::kKeep : BlendLabel::kFill);
      if (inside) ASSERT_EQ(a.canvas.pixel(x, y), original.pixel(x - 64, y - 64));
    }
  AlignOptions small;
  small.canvas_width = small.canvas_height = 100;
  EXPECT_THROW(Align(original, generated, GeneratorStage::kNear, FoveatedLayout{}, small),
               Error);
}

TEST(AlignTest, MidKeepMatchesInsertMask) {
  const RasterImage fused90 = testing::SmoothImage(200, 200);
  const RasterImage generated = testing::SmoothImage(256, 256, 1.0);
  AlignOptions opts;
  opts.canvas_height = 300;
  const AlignedCanvas a =
      Align(fused90, generated, GeneratorStage::kMid, FoveatedLayout{}, opts);
  const EquirectPanorama base(Resize(generated, 300, 300), 180.0);
  const InsertResult ins = InsertView(base, fused90, ViewSpec{});
  long keep = 0, inserted = 0;
  for (int y = 0; y < 300; ++y)
    for (int x = 0; x < 300; ++x) {
      keep += a.mask.at(x, y) == BlendLabel::kKeep;
      inserted += ins.mask.at(x, y);
    }
  EXPECT_EQ(keep, inserted);
  EXPECT_GT(keep, 0);
  EXPECT_EQ(a.canvas, ins.pano.image());
}

}  // namespace
}  // namespace foveapano
