#include "external_generator.h"

#include <random>

#include <gtest/gtest.h>

#include "errors.h"
#include "image_io.h"
#include "test_util.h"

namespace foveapano {
namespace {

GeneratorSpec Command(const std::string& mode) {
  GeneratorSpec s;
  s.kind = GeneratorKind::kExternal;
  s.external_command = std::string(FAKE_GENERATOR) + " " + mode + " {input} {output} {stage}";
  return s;
}

class ExternalGeneratorTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = testing::ScratchDir("external");
    std::mt19937_64 rng(71);
    for (int i = 0; i < 4; ++i) {
      // A space in the path exercises quoting.
      const auto path = dir_ / ("in put " + std::to_string(i) + ".png");
      SavePng(testing::RandomImage(256, 256, rng), path.string());
      inputs_.push_back(path.string());
    }
  }

  ErrorCode CodeOf(const GeneratorSpec& spec, std::string* what = nullptr) {
    try {
      ExternalGenerate(spec, inputs_, GeneratorStage::kNear, dir_ / "work");
    } catch (const Error& e) {
      if (what) *what = e.what();
      return e.code();
    }
    return ErrorCode::kInternal;
  }

  std::filesystem::path dir_;
  std::vector<std::string> inputs_;
};

TEST_F(ExternalGeneratorTest, IdentityReturnsInputs) {
  const auto out = ExternalGenerate(Command("identity"), inputs_, GeneratorStage::kNear);
  ASSERT_EQ(out.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(out[i], LoadImage(inputs_[i]));
}

TEST_F(ExternalGeneratorTest, ChannelRotationFixture) {
  const auto out = ExternalGenerate(Command("rotate"), inputs_, GeneratorStage::kMid);
  ASSERT_EQ(out.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    const RasterImage in = LoadImage(inputs_[i]);
    for (int y = 0; y < 256; y += 7)
      for (int x = 0; x < 256; x += 5) {
        const Color c = in.pixel(x, y);
        ASSERT_EQ(out[i].pixel(x, y), (Color{c[1], c[2], c[0]}));
      }
  }
}

TEST_F(ExternalGeneratorTest, BatchModeWithInputList) {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::kExternal;
  spec.external_command = std::string(FAKE_GENERATOR) + " list rotate {input_list} {stage}";
  const auto out = ExternalGenerate(spec, inputs_, GeneratorStage::kNear);
  ASSERT_EQ(out.size(), 4u);
  const Color c = LoadImage(inputs_[2]).pixel(3, 4);
  EXPECT_EQ(out[2].pixel(3, 4), (Color{c[1], c[2], c[0]}));
}

TEST_F(ExternalGeneratorTest, WrongSizeIsRejected) {
  std::string what;
  EXPECT_EQ(CodeOf(Command("small"), &what), ErrorCode::kExternalGenerator);
  EXPECT_NE(what.find("100x100"), std::string::npos) << what;
}

TEST_F(ExternalGeneratorTest, NonzeroExitCarriesTranscript) {
  std::string what;
  EXPECT_EQ(CodeOf(Command("fail"), &what), ErrorCode::kExternalGenerator);
  EXPECT_NE(what.find("failing on request"), std::string::npos) << what;
}

TEST_F(ExternalGeneratorTest, MissingOutputIsRejected) {
  EXPECT_EQ(CodeOf(Command("silent")), ErrorCode::kExternalGenerator);
}

TEST_F(ExternalGeneratorTest, GeneratorInterface) {
  const auto gen = MakeGenerator(Command("rotate"), 0);
  const RasterImage in = LoadImage(inputs_[0]);
  const GeneratedImage out = gen->Generate(in, GeneratorStage::kNear);
  const Color c = in.pixel(10, 10);
  EXPECT_EQ(out.image.pixel(10, 10), (Color{c[1], c[2], c[0]}));
}

TEST(ShellTest, QuoteAndSubstitute) {
  EXPECT_EQ(ShellQuote("a b"), "'a b'");
  EXPECT_EQ(ShellQuote("it's"), "'it'\\''s'");
  EXPECT_EQ(SubstitutePlaceholders("g {input} {output} {stage} {input}", "x y", "o", "mid"),
            "g 'x y' 'o' mid 'x y'");
  EXPECT_EQ(RunShellCommand("exit 7").exit_code, 7);
  EXPECT_EQ(RunShellCommand("echo hi").output, "hi\n");
}

}  // namespace
}  // namespace foveapano
