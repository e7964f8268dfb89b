#include "vcm/pseudo_gt.h"

#include <random>

#include <gtest/gtest.h>

#include "support.h"
#include "vcm/det_metrics.h"
#include "vcm/error.h"
#include "vcm/seg_metrics.h"

namespace vcm {
namespace {

using vcm::testing::MakeFrame;

TEST(SemanticPseudoGtTest, IsThePredictionUnchanged) {
  std::mt19937 rng(1);
  LabelMap p = testing::RandomLabelMap(rng, 9, 7, 19, 0.05);
  std::vector<std::string> warnings;
  EXPECT_EQ(SemanticPseudoGt(p, &warnings), p);
  EXPECT_TRUE(warnings.empty());
}

TEST(SemanticPseudoGtTest, WarnsWhenEverythingIsIgnore) {
  LabelMap p(2, 2, 19, 255, {255, 255, 255, 255});
  std::vector<std::string> warnings;
  SemanticPseudoGt(p, &warnings);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(InstancePseudoGtTest, KeepsDetectionsAtOrAboveThreshold) {
  FrameRef f = MakeFrame("s", 2, 10, 10);
  DetectionSet d{f,
                 {{0, 0.49, {0, 0, 1, 1}, {}},
                  {1, 0.5, {1, 1, 2, 2}, {}},
                  {2, 0.9, {2, 2, 3, 3}, testing::BoxMask(2, 2, 3, 3, 10, 10)}},
                 {}};
  InstanceSet gt = InstancePseudoGt(d, 0.5);
  ASSERT_EQ(gt.instances.size(), 2u);
  EXPECT_EQ(gt.instances[0].class_id, 1);
  EXPECT_EQ(gt.instances[1].bbox, (BBox{2, 2, 3, 3}));
  EXPECT_TRUE(gt.instances[1].mask.has_value());
  EXPECT_EQ(gt.frame, f);
}

TEST(InstancePseudoGtTest, EmptyResultWarnsAndBadThresholdThrows) {
  DetectionSet d{MakeFrame("s", 0, 4, 4), {{0, 0.2, {0, 0, 1, 1}, {}}}, {}};
  std::vector<std::string> warnings;
  EXPECT_TRUE(InstancePseudoGt(d, 0.5, &warnings).instances.empty());
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_THROW(InstancePseudoGt(d, 1.5), ConfigError);
  EXPECT_THROW(InstancePseudoGt(d, -0.1), ConfigError);
}

TEST(PseudoGtCeilingTest, SegmentationScoresOne) {
  std::mt19937 rng(99);
  for (int i = 0; i < 50; ++i) {
    LabelMap p = testing::RandomLabelMap(rng, 16, 12, 5, 0.1);
    ConfusionMatrix cm(5);
    cm.Accumulate(SemanticPseudoGt(p), p);
    ASSERT_EQ(MeanIoU(cm), 1.0);
    ASSERT_EQ(OverallAccuracy(cm), 1.0);
    ASSERT_EQ(FrequencyWeightedAccuracy(cm), 1.0);
  }
}

TEST(PseudoGtCeilingTest, DetectionScoresOne) {
  std::mt19937 rng(98);
  const auto t = DefaultIouThresholds();
  for (int i = 0; i < 50; ++i) {
    DetectionSet p = testing::RandomDetections(rng, MakeFrame("s", i, 24, 20), 6, 3);
    p.detections.push_back({0, 0.95, {0, 0, 4, 4}, testing::BoxMask(0, 0, 4, 4, 24, 20)});
    InstanceSet gt = InstancePseudoGt(p, 0.5);
    for (MatchKind kind : {MatchKind::kBox, MatchKind::kMask}) {
      std::vector<std::vector<MatchResult>> frames = {MatchAtThresholds(p, gt, t, kind)};
      APResult ap = EvaluateAp(frames);
      for (const auto& [cls, per] : ap.per_threshold) {
        for (double v : per) ASSERT_EQ(v, 1.0);
      }
      std::vector<InstanceSet> refs = {gt};
      ASSERT_EQ(WeightedAp(ap, ClassWeights(refs)), 1.0);
      ASSERT_EQ(MeanAp(ap), 1.0);
    }
  }
}

TEST(PseudoGtPathTest, Layout) {
  EXPECT_EQ(PseudoGtPath("root", "m", MakeFrame("seq", 4, 1, 1), ".png"),
            std::filesystem::path("root/m/seq/4.png"));
}

}  // namespace
}  // namespace vcm
