#include "foveapano/foveapano.h"

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "image_io.h"
#include "test_util.h"

namespace {

using foveapano::RasterImage;

fp_image* FromRaster(const RasterImage& r) {
  fp_image* img = nullptr;
  EXPECT_EQ(fp_image_create(r.width(), r.height(), r.samples().data(), &img), FP_OK);
  return img;
}

nlohmann::json TakeJson(char* s) {
  nlohmann::json j = nlohmann::json::parse(s);
  fp_string_free(s);
  return j;
}

TEST(CApiTest, StatusAndErrors) {
  EXPECT_STREQ(fp_version(), "1.0.0");
  EXPECT_STREQ(fp_status_name(FP_ERR_SOLVER), "solver_error");
  double v = 0;
  EXPECT_EQ(fp_relative_resolution(2.5, 2.5, &v), FP_OK);
  EXPECT_EQ(v, 0.5);
  EXPECT_STREQ(fp_last_error(), "");
  EXPECT_EQ(fp_relative_resolution(2.5, -1, &v), FP_ERR_DOMAIN);
  EXPECT_NE(std::string(fp_last_error()), "");
  EXPECT_EQ(fp_relative_resolution(2.5, 1, nullptr), FP_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(fp_input_fov(0.5, 90, &v), FP_OK);
  EXPECT_NEAR(v, 53.1301, 1e-4);
  EXPECT_EQ(fp_required_resolution(2.5, 26.565, 45, 1, &v), FP_OK);
  EXPECT_NEAR(v, 0.1195, 5e-4);
}

TEST(CApiTest, ImagesAndMetrics) {
  EXPECT_EQ(fp_image_create(0, 4, nullptr, nullptr), FP_ERR_INVALID_ARGUMENT);
  fp_image* bad = nullptr;
  EXPECT_EQ(fp_image_create(0, 4, nullptr, &bad), FP_ERR_DIMENSION);
  fp_image* a = FromRaster(foveapano::testing::SmoothImage(16, 16));
  EXPECT_EQ(fp_image_width(a), 16);
  double p = 0;
  int inf = 0;
  EXPECT_EQ(fp_psnr(a, a, &p, &inf), FP_OK);
  EXPECT_EQ(inf, 1);
  fp_image* flat = FromRaster(RasterImage(16, 16, {0.5, 0.5, 0.5}));
  EXPECT_EQ(fp_nrmse(a, flat, &p), FP_ERR_NORMALIZATION);
  fp_image* small = FromRaster(RasterImage(8, 8));
  EXPECT_EQ(fp_psnr(a, small, &p, &inf), FP_ERR_INVALID_ARGUMENT);
  fp_image_free(a);
  fp_image_free(flat);
  fp_image_free(small);
  EXPECT_EQ(fp_image_load("/nonexistent.png", &a), FP_ERR_IO);
}

TEST(CApiTest, ProfileCsv) {
  char* csv = nullptr;
  ASSERT_EQ(fp_resolution_profile_csv(2.5, 1.0, 1.0, 4, nullptr, &csv), FP_OK);
  const std::string text(csv);
  fp_string_free(csv);
  EXPECT_EQ(text.rfind("theta_deg,required,system\n0,1,1\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 92);
  EXPECT_EQ(fp_resolution_profile_csv(2.5, 1.0, 1.0, 4, "{\"near_fov\": 10}", &csv),
            FP_ERR_DOMAIN);
  EXPECT_EQ(fp_resolution_profile_csv(2.5, 1.0, 1.0, 4, "{", &csv),
            FP_ERR_INVALID_ARGUMENT);
}

TEST(CApiTest, FuseReportsSeams) {
  const RasterImage gen = foveapano::Scale(foveapano::testing::SmoothImage(256, 256), 0.5);
  RasterImage orig = foveapano::Crop(gen, 64, 64, 128, 128);
  for (double& s : orig.samples()) s += 0.3;
  fp_image* o = FromRaster(orig);
  fp_image* g = FromRaster(gen);
  fp_image* fused = nullptr;
  char* report = nullptr;
  ASSERT_EQ(fp_fuse(o, g, FP_STAGE_NEAR, "{\"method\": \"poisson\"}", &fused, &report), FP_OK)
      << fp_last_error();
  const auto j = TakeJson(report);
  EXPECT_NEAR(j["seam_before"].get<double>(), 0.3, 0.02);
  EXPECT_LT(j["seam_after"].get<double>(), 0.2 * j["seam_before"].get<double>());
  EXPECT_EQ(fp_image_width(fused), 256);
  fp_image_free(fused);

  ASSERT_EQ(fp_fuse(o, g, FP_STAGE_MID, "{\"canvas_height\": 300}", &fused, nullptr), FP_OK)
      << fp_last_error();
  EXPECT_EQ(fp_image_width(fused), 300);
  fp_image_free(fused);
  EXPECT_EQ(fp_fuse(o, g, FP_STAGE_NEAR, "{not json", &fused, nullptr), FP_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(fp_fuse(o, g, FP_STAGE_NEAR, "{\"method\": \"blur\"}", &fused, nullptr),
            FP_ERR_INVALID_ARGUMENT);
  fp_image_free(o);
  fp_image_free(g);
}

TEST(CApiTest, MirrorExtend) {
  fp_image* half = FromRaster(foveapano::testing::SmoothImage(64, 64));
  fp_image* full = nullptr;
  ASSERT_EQ(fp_mirror_extend(half, &full), FP_OK);
  EXPECT_EQ(fp_image_width(full), 128);
  EXPECT_EQ(fp_image_data(full)[(32 * 128 + 32) * 3], fp_image_data(half)[32 * 64 * 3]);
  fp_image_free(full);
  fp_image* odd = FromRaster(RasterImage(64, 32));
  EXPECT_EQ(fp_mirror_extend(odd, &full), FP_ERR_DIMENSION);
  fp_image_free(odd);
  fp_image_free(half);
}

TEST(CApiTest, ExternalGenerate) {
  const auto dir = foveapano::testing::ScratchDir("capi_external");
  const std::string in = (dir / "in.png").string();
  foveapano::SavePng(foveapano::testing::SmoothImage(256, 256), in);
  const char* paths[] = {in.c_str(), in.c_str()};
  const std::string cmd = std::string(FAKE_GENERATOR) + " identity {input} {output} {stage}";
  fp_image** outs = nullptr;
  ASSERT_EQ(fp_external_generate(cmd.c_str(), paths, 2, FP_STAGE_NEAR, &outs), FP_OK)
      << fp_last_error();
  EXPECT_EQ(fp_image_width(outs[1]), 256);
  fp_image_array_free(outs, 2);
  const std::string small = std::string(FAKE_GENERATOR) + " small {input} {output} {stage}";
  EXPECT_EQ(fp_external_generate(small.c_str(), paths, 1, FP_STAGE_MID, &outs),
            FP_ERR_EXTERNAL_GENERATOR);
}

TEST(CApiTest, PipelineLifecycle) {
  fp_pipeline* p = nullptr;
  EXPECT_EQ(fp_pipeline_create("{\"mid_downscale\": 3}", &p), FP_ERR_INVALID_ARGUMENT);
  ASSERT_EQ(fp_pipeline_create(
                R"({"output_height": 128, "extend_to_360": true,
                    "near_generator": "mirror_pad", "mid_generator": {"kind": "mirror_pad"}})",
                &p),
            FP_OK)
      << fp_last_error();
  char* cfg = nullptr;
  ASSERT_EQ(fp_pipeline_config_json(p, &cfg), FP_OK);
  EXPECT_EQ(TakeJson(cfg)["near_generator"]["kind"], "mirror_pad");

  fp_image* input = FromRaster(foveapano::testing::SmoothImage(80, 80));
  fp_image* pano = nullptr;
  fp_image* pano360 = nullptr;
  ASSERT_EQ(fp_pipeline_run_image(p, input, &pano, &pano360), FP_OK) << fp_last_error();
  EXPECT_EQ(fp_image_width(pano), 128);
  EXPECT_EQ(fp_image_width(pano360), 256);
  fp_image_free(pano);
  fp_image_free(pano360);
  fp_image_free(input);

  const auto dir = foveapano::testing::ScratchDir("capi_pipeline");
  foveapano::SavePng(foveapano::testing::SmoothImage(80, 80), (dir / "a.png").string());
  char* manifest = nullptr;
  ASSERT_EQ(fp_pipeline_run(p, (dir / "a.png").c_str(), (dir / "run").c_str(), &manifest),
            FP_OK);
  EXPECT_TRUE(TakeJson(manifest).contains("timings_ms"));

  std::ofstream(dir / "batch.txt") << "missing1.png\nmissing2.png\n";
  char* report = nullptr;
  EXPECT_EQ(fp_pipeline_run_batch(p, (dir / "batch.txt").c_str(), (dir / "b").c_str(), 1,
                                  &report),
            FP_ERR_BATCH);
  ASSERT_NE(report, nullptr);
  EXPECT_EQ(TakeJson(report)["failed"], 2);
  fp_pipeline_free(p);
}

}  // namespace
