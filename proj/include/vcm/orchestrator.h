#ifndef VCM_ORCHESTRATOR_H_
#define VCM_ORCHESTRATOR_H_

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vcm/bd_metrics.h"
#include "vcm/datamodel.h"
#include "vcm/image.h"
#include "vcm/plan.h"
#include "vcm/result_store.h"

namespace vcm {

// In-process prediction backend, for when predictions are not on disk.
class Predictor {
 public:
  virtual ~Predictor() = default;
  // Writes the model's output for `image` to `output`: a label-map PNG for
  // semantic models, a detection JSON otherwise.
  virtual void Predict(const ModelSpec& model, const Image& image, const FrameRef& frame,
                       const std::filesystem::path& output) const = 0;
};

// Records the evaluation steps run per (cell, GT mode) so tests can check
// both modes walk the same path.
class OpTrace {
 public:
  void Record(const std::string& cell, GtMode mode, std::vector<std::string> ops);
  std::size_t cells() const;
  // Cells evaluated in only one mode count as asymmetric.
  bool ModesSymmetric(std::vector<std::string>* mismatches = nullptr) const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::map<GtMode, std::vector<std::string>>> ops_;
};

struct RunOptions {
  std::filesystem::path workdir = "work";
  int jobs = 1;
  bool use_cache = true;
  const Predictor* predictor = nullptr;
  OpTrace* trace = nullptr;
};

struct CellFailure {
  std::string codec_id;
  int qp = 0;
  std::string message;
};

struct RunSummary {
  std::string plan_hash;
  std::filesystem::path results_dir;
  std::size_t expected_records = 0;
  std::size_t computed = 0;
  std::size_t cache_hits = 0;
  std::vector<CellFailure> failures;

  bool ok() const { return failures.empty(); }
};

struct RunOutput {
  ResultStore store;
  RunSummary summary;
};

// Layout helpers. Prediction variants are "pristine" or "<codec_id>/qp<qp>".
std::filesystem::path ResultsDir(const std::filesystem::path& workdir,
                                 const ExperimentPlan& plan);
std::filesystem::path PredictionPath(const ModelSpec& model, const std::string& variant,
                                     const FrameRef& frame);
std::string CompressedVariant(const std::string& codec_id, int qp);
std::filesystem::path DecodedDir(const std::filesystem::path& workdir,
                                 const CodecSpec& codec, int qp);
std::filesystem::path DecodedImagePath(const std::filesystem::path& workdir,
                                       const CodecSpec& codec, int qp,
                                       const FrameRef& frame);
std::filesystem::path ReferencePath(const std::filesystem::path& workdir,
                                    const ModelSpec& model, GtMode mode,
                                    const FrameRef& frame);

StoreLayout LayoutFor(const ExperimentPlan& plan);

// Every missing input the plan depends on, as readable messages.
std::vector<std::string> MissingInputs(const ExperimentPlan& plan, const RunOptions& options);

// Writes predictions on pristine frames (when a predictor is given and the
// file is absent) and derives pseudo-GT for every model. Returns the number
// of pseudo-GT files written.
std::size_t GeneratePseudoGt(const ExperimentPlan& plan, const RunOptions& options);

// Encodes and decodes every (codec, qp, sequence) without evaluating.
RunSummary EncodeAll(const ExperimentPlan& plan, const RunOptions& options);

// Full matrix. Throws ConfigError listing every missing input before any
// codec runs; codec or evaluation failures mark the cell and the run goes on.
RunOutput Run(const ExperimentPlan& plan, const RunOptions& options);

struct FrameEvaluation {
  nlohmann::json payload;
  std::map<std::string, std::optional<double>> values;
};

// Scores one prediction file against one reference file. GT mode only
// decides which reference file is passed in.
FrameEvaluation EvaluateModelFrame(const ModelSpec& model,
                                   const std::filesystem::path& reference,
                                   const std::filesystem::path& prediction,
                                   const FrameRef& frame, const PlanOptions& options,
                                   std::vector<std::string>* ops = nullptr);

// Dataset-level value of one QP from its per-frame records: global confusion
// matrix for segmentation, pooled AP for detection, mean of finite per-frame
// PSNR, mean VMAF.
double AggregateMetric(const std::string& metric_id, std::vector<EvalRecord> records,
                       const StoreLayout& layout);

// One point per ladder QP, sorted by rate. Throws InputError when any
// (qp, frame) record is missing and ConfigError for pixel-fidelity metrics
// queried in pseudo-GT mode.
RdCurve AssembleCurve(const ResultStore& store, const std::string& codec_id,
                      const std::string& metric_id, GtMode gt_mode,
                      const std::string& model_id = "");

struct PocPoint {
  int poc = 0;
  double value = 0;
  bool operator==(const PocPoint&) const = default;
};

// Per-frame values averaged across sequences for each frame index. Throws
// InputError when sequences cover different frame indices.
std::vector<PocPoint> PerPocCurve(const ResultStore& store, const std::string& codec_id,
                                  int qp, const std::string& metric_id,
                                  const std::string& model_id = "",
                                  GtMode gt_mode = GtMode::kTrueGt);

}  // namespace vcm

#endif  // VCM_ORCHESTRATOR_H_
