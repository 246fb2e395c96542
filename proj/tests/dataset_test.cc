#include "dataset.h"

#include <fstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "errors.h"
#include "image_io.h"
#include "test_util.h"

namespace foveapano {
namespace {

std::vector<nlohmann::json> ReadLines(const std::filesystem::path& path) {
  std::vector<nlohmann::json> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  }
  return out;
}

TEST(DatasetTest, OnePanoramaGivesFourTriples) {
  const auto root = testing::ScratchDir("dataset_one");
  std::filesystem::create_directories(root / "in");
  SavePng(testing::SmoothPanorama(128).image(), (root / "in/room.png").string());
  const DatasetSummary s = PrepareDataset(root / "in", root / "out", PairOptions{256, 256});
  EXPECT_EQ(s.panoramas, 1u);
  EXPECT_EQ(s.pairs, 4u);
  EXPECT_TRUE(s.failures.empty());
  const auto lines = ReadLines(s.manifest);
  ASSERT_EQ(lines.size(), 4u);
  const char* dirs[] = {"front", "right", "back", "left"};
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(lines[i]["pano_id"], "room");
    EXPECT_EQ(lines[i]["direction"], dirs[i]);
    EXPECT_EQ(lines[i]["id"], std::string("room/") + dirs[i]);
    for (const char* key : {"input", "near", "mid"}) {
      const auto path = root / "out" / lines[i][key].get<std::string>();
      ASSERT_TRUE(std::filesystem::exists(path)) << path;
      const RasterImage img = LoadRgbPngStrict(path.string());
      EXPECT_EQ(img.width(), 256);
      EXPECT_EQ(img.height(), 256);
    }
  }
  EXPECT_TRUE(std::filesystem::exists(root / "out/pairs/room/back/mid.png"));
}

TEST(DatasetTest, ManifestHoldsFourEntriesPerPanorama) {
  const auto root = testing::ScratchDir("dataset_many");
  std::filesystem::create_directories(root / "in");
  for (int i = 0; i < 3; ++i) {
    SavePng(testing::SmoothPanorama(64 + 16 * i).image(),
            (root / "in" / ("p" + std::to_string(i) + ".png")).string());
  }
  // Not 2:1, so it is listed as a failure without stopping the run.
  SavePng(RasterImage(100, 100), (root / "in/square.png").string());
  std::ofstream(root / "in/notes.txt") << "ignored";
  const DatasetSummary s = PrepareDataset(root / "in", root / "out", PairOptions{128, 256});
  EXPECT_EQ(s.panoramas, 3u);
  EXPECT_EQ(ReadLines(s.manifest).size(), 4u * 3u);
  ASSERT_EQ(s.failures.size(), 1u);
  EXPECT_NE(s.failures[0].find("square"), std::string::npos);
  EXPECT_EQ(s.ToJson()["pairs"], 12);
}

TEST(DatasetTest, RejectsNonFullSphere) {
  const auto root = testing::ScratchDir("dataset_bad");
  SavePng(RasterImage(90, 60), (root / "x.png").string());
  try {
    LoadFullSpherePanorama((root / "x.png").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCoverage);
  }
  EXPECT_THROW(PrepareDataset(root / "missing", root / "out"), Error);
}

}  // namespace
}  // namespace foveapano
