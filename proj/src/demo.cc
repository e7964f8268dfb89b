#include "vcm/demo.h"

#include "vcm/image.h"
#include "vcm/log.h"
#include "vcm/toy.h"

namespace vcm {

namespace fs = std::filesystem;
using nlohmann::json;

json DemoPlanJson(const std::vector<FrameRef>& frames, const fs::path& plan_dir) {
  json frame_list = json::array();
  for (const auto& f : frames) {
    frame_list.push_back({{"sequence_id", f.sequence_id},
                          {"frame_index", f.frame_index},
                          {"image", f.image_path.lexically_relative(plan_dir).generic_string()},
                          {"width", f.width},
                          {"height", f.height}});
  }
  return {
      {"schema_version", kPlanSchemaVersion},
      {"name", "toy-demo"},
      {"dataset", {{"id", "toy"}, {"frames", frame_list}}},
      {"codecs",
       {{{"codec_id", "mock-a"}, {"kind", "mock"}, {"qp_shift", 0}, {"version", "builtin"}},
        {{"codec_id", "mock-b"}, {"kind", "mock"}, {"qp_shift", -2}, {"version", "builtin"}}}},
      {"qp_ladder", kCtcQpLadder},
      {"quality_metrics", json::array({"psnr"})},
      {"models",
       {{{"model_id", "toy-seg"},
         {"label", "ToySeg"},
         {"task", "semantic"},
         {"class_count", kToySemanticClasses},
         {"metrics", json::array({"miou", "oacc", "frwacc"})},
         {"predictions", "predictions/toy-seg"},
         {"true_gt", "data/gt/semantic"}},
        {{"model_id", "toy-inst"},
         {"label", "ToyInst"},
         {"task", "instance"},
         {"class_count", kToyInstanceClasses},
         {"metrics", json::array({"wap", "map"})},
         {"predictions", "predictions/toy-inst"},
         {"true_gt", "data/gt/instances"}}}},
      {"gt_modes", json::array({"true_gt", "pseudo_gt"})},
      {"options", json::object()},
  };
}

DemoResult RunDemo(const DemoOptions& options) {
  const fs::path workdir = fs::absolute(options.workdir);
  const auto frames = WriteToyDataset(workdir / "data", options.sequences,
                                      options.frames_per_sequence, options.width,
                                      options.height);
  const fs::path plan_path = workdir / "plan.json";
  WriteFileAtomic(plan_path, DemoPlanJson(frames, workdir).dump(2) + "\n");

  ToyPredictor predictor;
  OpTrace trace;
  RunOptions run;
  run.workdir = workdir;
  run.jobs = options.jobs;
  run.use_cache = options.use_cache;
  run.predictor = &predictor;
  run.trace = &trace;

  DemoResult result{LoadPlan(plan_path), {}, {}, false, {}};
  RunOutput out = Run(result.plan, run);
  result.summary = out.summary;
  result.report = WriteReport(out.store, result.plan, workdir / "report");
  // A fully cached rerun evaluates nothing, so there is nothing to compare.
  result.modes_symmetric =
      trace.cells() == 0 ? out.summary.computed == 0 : trace.ModesSymmetric(&result.asymmetric_cells);
  log::Info("demo report written to {}", (workdir / "report").string());
  return result;
}

}  // namespace vcm
