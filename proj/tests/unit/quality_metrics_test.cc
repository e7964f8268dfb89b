#include "vcm/quality_metrics.h"

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "support.h"
#include "vcm/error.h"

namespace vcm {
namespace {

TEST(PsnrTest, BlackVersusWhiteIsZero) {
  EXPECT_EQ(Psnr(Image(16, 16, 3, 0), Image(16, 16, 3, 255)), 0.0);
  EXPECT_EQ(Psnr(Image(5, 3, 1, 255), Image(5, 3, 1, 0)), 0.0);
}

TEST(PsnrTest, ConstantOffsetOfSixteen) {
  Image a(8, 8, 3, 100);
  Image b(8, 8, 3, 116);
  EXPECT_EQ(MeanSquaredError(a, b), 256.0);
  EXPECT_NEAR(Psnr(a, b), 24.049, 1e-3);
}

TEST(PsnrTest, IdenticalIsInfinite) {
  Image a(4, 4, 1, 42);
  EXPECT_EQ(Psnr(a, a), kPsnrInfinity);
}

TEST(PsnrTest, MatchesOracleOnRandomImages) {
  std::mt19937 rng(6);
  for (int i = 0; i < 20; ++i) {
    Image a = testing::RandomImage(rng, 13, 7, 3);
    Image b = testing::RandomImage(rng, 13, 7, 3);
    ASSERT_NEAR(Psnr(a, b), oracle::Psnr(a, b), 1e-12);
  }
}

TEST(PsnrTest, LumaModeWeightsChannels) {
  Image a(2, 2, 3, 0);
  Image b(2, 2, 3, 0);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 2; ++x) b.at(x, y, 1) = 100;
  }
  EXPECT_NEAR(MeanSquaredError(a, b, PsnrColor::kLuma), 58.7 * 58.7, 1e-9);
  EXPECT_NEAR(MeanSquaredError(a, b, PsnrColor::kRaster), 10000.0 / 3.0, 1e-9);
}

TEST(PsnrTest, ShapeMismatchThrows) {
  EXPECT_THROW(Psnr(Image(2, 2, 3), Image(2, 2, 1)), InputError);
  EXPECT_THROW(Psnr(Image(2, 2, 1), Image(2, 3, 1)), InputError);
  EXPECT_THROW(ParsePsnrColor("rgba"), ConfigError);
}

TEST(PoolPsnrTest, MeanOfFiniteFramesAndPooledMse) {
  const std::vector<double> mse = {0.0, 65025.0 / 100.0, 65025.0 / 1000.0};
  SequencePsnr s = PoolPsnr(mse);
  EXPECT_EQ(s.infinite_frames, 1);
  EXPECT_NEAR(s.mean_psnr, 25.0, 1e-12);
  EXPECT_NEAR(s.pooled_psnr, 10 * std::log10(65025.0 / ((650.25 + 65.025) / 3)), 1e-12);
  EXPECT_EQ(s.warnings.size(), 1u);
}

TEST(PoolPsnrTest, AllIdenticalFrames) {
  const std::vector<double> mse = {0.0, 0.0};
  SequencePsnr s = PoolPsnr(mse);
  EXPECT_EQ(s.mean_psnr, kPsnrInfinity);
  EXPECT_EQ(s.pooled_psnr, kPsnrInfinity);
  EXPECT_THROW(PoolPsnr(std::vector<double>{}), UndefinedMetricError);
}

TEST(VmafTest, ParsesBothLogLayouts) {
  VmafScores a = ParseVmaf(R"({"frames": [
      {"frameNum": 0, "metrics": {"vmaf": 90.5, "psnr": 40}},
      {"frameNum": 1, "metrics": {"vmaf": 80.5}}]})");
  EXPECT_EQ(a.per_frame.size(), 2u);
  EXPECT_DOUBLE_EQ(a.Mean(), 85.5);
  VmafScores b = ParseVmaf(R"({"frames": [{"vmaf": 10}, {"vmaf": 20}, {"vmaf": 60}]})");
  EXPECT_EQ(b.per_frame.at(2), 60.0);
  EXPECT_DOUBLE_EQ(b.Mean(), 30.0);
}

TEST(VmafTest, RejectsMalformedLogs) {
  EXPECT_THROW(ParseVmaf("{"), InputError);
  EXPECT_THROW(ParseVmaf(R"({"pooled": 3})"), InputError);
  EXPECT_THROW(ParseVmaf(R"({"frames": []})"), InputError);
  EXPECT_THROW(ParseVmaf(R"({"frames": [{"vmaf": 101}]})"), InputError);
  EXPECT_THROW(ParseVmaf(R"({"frames": [{"psnr": 30}]})"), InputError);
  EXPECT_THROW(ParseVmaf(R"({"frames": [{"frameNum": 1, "vmaf": 1},
                                        {"frameNum": 1, "vmaf": 2}]})"),
               InputError);
}

TEST(VmafTest, IngestNamesTheFile) {
  testing::TempDir tmp;
  testing::WriteText(tmp.path() / "v.json", R"({"frames": []})");
  try {
    IngestVmaf(tmp.path() / "v.json");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("v.json"), std::string::npos);
  }
}

}  // namespace
}  // namespace vcm
