#include "vcm/plan.h"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "support.h"
#include "vcm/error.h"
#include "vcm/image.h"

namespace vcm {
namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;
using nlohmann::json;
using vcm::testing::TempDir;

json MinimalPlan() {
  return json::parse(R"({
    "name": "unit",
    "dataset": {"id": "ds", "frames": [
      {"sequence_id": "a", "frame_index": 0, "image": "img/a0.png", "width": 8, "height": 6},
      {"sequence_id": "a", "frame_index": 1, "image": "img/a1.png", "width": 8, "height": 6},
      {"sequence_id": "b", "frame_index": 0, "image": "img/b0.png", "width": 8, "height": 6}
    ]},
    "codecs": [{"codec_id": "m1", "kind": "mock"},
               {"codec_id": "m2", "kind": "mock", "qp_shift": -2}],
    "qp_ladder": [22, 27, 32, 37],
    "models": [{"model_id": "seg", "task": "semantic", "predictions": "pred/seg",
                "true_gt": "gt/seg"}]
  })");
}

std::string ConfigErrorOf(const json& j) {
  try {
    ParsePlan(j, "/base");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(PlanTest, ParsesWithDefaults) {
  ExperimentPlan p = ParsePlan(MinimalPlan(), "/base");
  EXPECT_EQ(p.name, "unit");
  ASSERT_EQ(p.frames.size(), 3u);
  EXPECT_EQ(p.frames[0].dataset_id, "ds");
  EXPECT_EQ(p.frames[0].image_path, fs::path("/base/img/a0.png"));
  EXPECT_EQ(p.codecs[1].mock_qp_shift, -2);
  EXPECT_EQ(p.quality_metrics, std::vector<std::string>{"psnr"});
  EXPECT_TRUE(p.HasMode(GtMode::kTrueGt));
  EXPECT_TRUE(p.HasMode(GtMode::kPseudoGt));
  const ModelSpec& m = p.model("seg");
  EXPECT_EQ(m.class_count, 19);
  EXPECT_EQ(m.metrics, (std::vector<std::string>{"miou", "oacc", "frwacc"}));
  EXPECT_EQ(m.predictions, fs::path("/base/pred/seg"));
  EXPECT_EQ(m.extension(), ".png");
  EXPECT_EQ(p.options.score_threshold, 0.5);
  EXPECT_EQ(p.options.iou_thresholds.size(), 10u);
  EXPECT_FALSE(p.options.fit.has_value());
  EXPECT_EQ(p.Sequences().at("a").size(), 2u);
  EXPECT_THROW(p.codec("nope"), ConfigError);
}

TEST(PlanTest, InstanceModelsMatchMasks) {
  json j = MinimalPlan();
  j["models"].push_back({{"model_id", "inst"}, {"task", "instance"}, {"predictions", "p"},
                         {"true_gt", "g"}});
  ExperimentPlan p = ParsePlan(j, "/base");
  EXPECT_EQ(p.model("inst").match_kind(), MatchKind::kMask);
  EXPECT_EQ(p.model("inst").metrics, (std::vector<std::string>{"wap", "map"}));
  EXPECT_EQ(p.model("inst").class_count, kDefaultInstanceClasses);
}

TEST(PlanTest, ReadsImageSizeWhenOmitted) {
  TempDir tmp;
  WritePng(tmp.path() / "f.png", Image(10, 4, 3));
  json j = MinimalPlan();
  j["dataset"]["frames"] = json::array({{{"sequence_id", "a"}, {"frame_index", 0},
                                         {"image", "f.png"}}});
  ExperimentPlan p = ParsePlan(j, tmp.path());
  EXPECT_EQ(p.frames[0].width, 10);
  EXPECT_EQ(p.frames[0].height, 4);
}

TEST(PlanTest, WindowSelectsFrames) {
  json j = MinimalPlan();
  j["dataset"]["window"] = {{"start", 1}, {"count", 1}, {"labeled_index", 1}};
  ExperimentPlan p = ParsePlan(j, "/base");
  ASSERT_EQ(p.frames.size(), 1u);
  EXPECT_EQ(p.frames[0].frame_index, 1);
  j["dataset"]["window"]["labeled_index"] = 5;
  EXPECT_THAT(ConfigErrorOf(j), HasSubstr("labeled_index"));
}

TEST(PlanTest, RejectsInvalidPlans) {
  json j = MinimalPlan();
  j["bogus"] = 1;
  EXPECT_THAT(ConfigErrorOf(j), HasSubstr("unknown key 'bogus'"));

  j = MinimalPlan();
  j["qp_ladder"] = {22, 22, 27};
  EXPECT_THAT(ConfigErrorOf(j), HasSubstr("strictly increasing"));

  j = MinimalPlan();
  j["qp_ladder"] = json::array();
  EXPECT_THAT(ConfigErrorOf(j), HasSubstr("qp_ladder"));

  j = MinimalPlan();
  j["dataset"]["frames"].push_back(j["dataset"]["frames"][0]);
  EXPECT_THAT(ConfigErrorOf(j), HasSubstr("duplicate frame"));

  j = MinimalPlan();
  j["codecs"].push_back(j["codecs"][0]);
  EXPECT_THAT(ConfigErrorOf(j), HasSubstr("duplicate codec_id"));

  j = MinimalPlan();
  j["models"][0].erase("true_gt");
  EXPECT_THAT(ConfigErrorOf(j), HasSubstr("no true_gt"));
  j["gt_modes"] = {"pseudo_gt"};
  EXPECT_EQ(ConfigErrorOf(j), "");

  j = MinimalPlan();
  j["models"][0]["metrics"] = {"wap"};
  EXPECT_THAT(ConfigErrorOf(j), HasSubstr("not produced by task"));

  j = MinimalPlan();
  j["options"] = {{"score_threshold", 2}};
  EXPECT_THAT(ConfigErrorOf(j), HasSubstr("score_threshold"));

  j = MinimalPlan();
  j["options"] = {{"color", "luma"}};
  EXPECT_THAT(ConfigErrorOf(j), HasSubstr("unknown key 'color'"));

  j = MinimalPlan();
  j["schema_version"] = 9;
  EXPECT_THAT(ConfigErrorOf(j), HasSubstr("schema_version"));

  j = MinimalPlan();
  j["quality_metrics"] = {"ssim"};
  EXPECT_THAT(ConfigErrorOf(j), HasSubstr("ssim"));
}

TEST(PlanTest, HashIgnoresReportOnlySettings) {
  json a = MinimalPlan();
  json b = a;
  b["name"] = "renamed";
  b["gt_modes"] = {"true_gt"};
  b["options"] = {{"fit", "pchip"}, {"monotonicity", "prune"}};
  EXPECT_EQ(PlanHash(a), PlanHash(b));
  json c = a;
  c["options"] = {{"score_threshold", 0.7}};
  EXPECT_NE(PlanHash(a), PlanHash(c));
  json d = a;
  d["qp_ladder"] = {12, 17, 22, 27};
  EXPECT_NE(PlanHash(a), PlanHash(d));
}

TEST(PlanTest, OverridesEditTheDocument) {
  json j = MinimalPlan();
  ApplyOverride(j, "score_threshold=0.7");
  ApplyOverride(j, "fit=pchip");
  ApplyOverride(j, "gt_modes=pseudo");
  ApplyOverride(j, "qp_ladder=12,17,22,27");
  ApplyOverride(j, "iou_thresholds=0.5,0.75");
  ExperimentPlan p = ParsePlan(j, "/base");
  EXPECT_EQ(p.options.score_threshold, 0.7);
  EXPECT_EQ(p.options.fit, FitKind::kPchip);
  EXPECT_EQ(p.gt_modes, std::vector<GtMode>{GtMode::kPseudoGt});
  EXPECT_EQ(p.qp_ladder, kHighRateQpLadder);
  EXPECT_EQ(p.options.iou_thresholds, (std::vector<double>{0.5, 0.75}));

  EXPECT_THROW(ApplyOverride(j, "colour=luma"), ConfigError);
  EXPECT_THROW(ApplyOverride(j, "score_threshold"), ConfigError);
  EXPECT_THROW(ApplyOverride(j, "score_threshold=high"), ConfigError);
  EXPECT_THROW(ApplyOverride(j, "gt_modes=both"), ConfigError);
}

TEST(PlanTest, LoadPlanReportsPathOnErrors) {
  TempDir tmp;
  try {
    LoadPlan(tmp.path() / "missing.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_THAT(e.what(), HasSubstr("plan file not found"));
    EXPECT_THAT(e.what(), HasSubstr("missing.json"));
  }
  testing::WriteText(tmp.path() / "bad.json", "{");
  EXPECT_THROW(LoadPlan(tmp.path() / "bad.json"), ConfigError);
  json j = MinimalPlan();
  j["qp_ladder"] = {30, 20};
  testing::WriteText(tmp.path() / "p.json", j.dump());
  try {
    LoadPlan(tmp.path() / "p.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_THAT(e.what(), HasSubstr("p.json"));
  }
  ExperimentPlan p = LoadPlan(tmp.path() / "p.json", {"qp_ladder=22,27"});
  EXPECT_EQ(p.frames[0].image_path, tmp.path() / "img" / "a0.png");
}

}  // namespace
}  // namespace vcm
