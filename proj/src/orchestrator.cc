#include "vcm/orchestrator.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <functional>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "vcm/codec_adapter.h"
#include "vcm/det_metrics.h"
#include "vcm/error.h"
#include "vcm/hash.h"
#include "vcm/log.h"
#include "vcm/pseudo_gt.h"
#include "vcm/quality_metrics.h"
#include "vcm/seg_metrics.h"
#include "vcm/subprocess.h"

namespace vcm {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr char kHarnessVersion[] = "0.1.0";

void OpTrace::Record(const std::string& cell, GtMode mode, std::vector<std::string> ops) {
  std::lock_guard lock(mu_);
  ops_[cell][mode] = std::move(ops);
}

std::size_t OpTrace::cells() const {
  std::lock_guard lock(mu_);
  return ops_.size();
}

bool OpTrace::ModesSymmetric(std::vector<std::string>* mismatches) const {
  std::lock_guard lock(mu_);
  bool ok = !ops_.empty();
  for (const auto& [cell, per_mode] : ops_) {
    const auto t = per_mode.find(GtMode::kTrueGt);
    const auto p = per_mode.find(GtMode::kPseudoGt);
    if (t == per_mode.end() || p == per_mode.end() || t->second != p->second) {
      ok = false;
      if (mismatches) mismatches->push_back(cell);
    }
  }
  return ok;
}

fs::path ResultsDir(const fs::path& workdir, const ExperimentPlan& plan) {
  return workdir / "results" / plan.hash;
}

std::string CompressedVariant(const std::string& codec_id, int qp) {
  return fmt::format("{}/qp{}", codec_id, qp);
}

fs::path PredictionPath(const ModelSpec& model, const std::string& variant,
                        const FrameRef& frame) {
  return model.predictions / variant / frame.sequence_id /
         (std::to_string(frame.frame_index) + model.extension());
}

fs::path DecodedDir(const fs::path& workdir, const CodecSpec& codec, int qp) {
  return workdir / "decoded" / codec.codec_id / codec.config_id / fmt::format("qp{}", qp);
}

fs::path DecodedImagePath(const fs::path& workdir, const CodecSpec& codec, int qp,
                          const FrameRef& frame) {
  return DecodedDir(workdir, codec, qp) / "images" / frame.sequence_id /
         (std::to_string(frame.frame_index) + ".png");
}

fs::path ReferencePath(const fs::path& workdir, const ModelSpec& model, GtMode mode,
                       const FrameRef& frame) {
  if (mode == GtMode::kPseudoGt) {
    return PseudoGtPath(workdir / "pseudo_gt", model.model_id, frame, model.extension());
  }
  if (!model.true_gt) {
    throw ConfigError(fmt::format("model {} has no true_gt directory", model.model_id));
  }
  return *model.true_gt / frame.sequence_id /
         (std::to_string(frame.frame_index) + model.extension());
}

namespace {

std::string UtcNow() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void ParallelFor(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

bool NeedsFilesForCompressed(const ModelSpec& model, const RunOptions& options) {
  return options.predictor == nullptr && model.infer_command.empty();
}

struct Cell {
  const CodecSpec* codec;
  int qp;
};

std::vector<Cell> Cells(const ExperimentPlan& plan) {
  std::vector<Cell> cells;
  for (const auto& c : plan.codecs) {
    for (int qp : plan.qp_ladder) cells.push_back({&c, qp});
  }
  return cells;
}

// Every record key a cell produces.
std::vector<std::string> CellKeys(const ExperimentPlan& plan, const Cell& cell) {
  std::vector<std::string> keys;
  const auto& c = *cell.codec;
  for (const auto& f : plan.frames) {
    for (const auto& m : plan.quality_metrics) {
      keys.push_back(RecordKey(c.codec_id, c.config_id, cell.qp, f, m, GtMode::kTrueGt, ""));
    }
    for (const auto& model : plan.models) {
      for (GtMode mode : plan.gt_modes) {
        for (const auto& m : model.metrics) {
          keys.push_back(
              RecordKey(c.codec_id, c.config_id, cell.qp, f, m, mode, model.model_id));
        }
      }
    }
  }
  return keys;
}

EncodeResult LoadOrEncode(const CodecSpec& spec, const std::vector<FrameRef>& frames, int qp,
                          const fs::path& workdir, bool use_cache) {
  const fs::path dir = DecodedDir(workdir, spec, qp);
  const std::string& seq = frames.front().sequence_id;
  const fs::path work = dir / "work" / seq;
  const fs::path record = work / "encode.json";
  const std::string spec_hash = Sha256Hex(ToJson(spec).dump());
  if (use_cache && fs::exists(record)) {
    const json j = json::parse(ReadTextFile(record));
    if (j.value("spec_hash", "") == spec_hash) {
      EncodeResult r = EncodeResult::FromJson(j.at("result"));
      const bool complete =
          r.decoded_paths.size() == frames.size() &&
          std::all_of(r.decoded_paths.begin(), r.decoded_paths.end(),
                      [](const fs::path& p) { return fs::exists(p); });
      if (complete) {
        log::Debug("reusing encode of {} qp{} {}", spec.codec_id, qp, seq);
        return r;
      }
    }
  }
  log::Info("encoding {} qp{} sequence {} ({} frames)", spec.codec_id, qp, seq,
            frames.size());
  EncodeResult r = EncodeDecode(spec, frames, qp, work, dir / "images" / seq);
  WriteFileAtomic(record, json{{"spec_hash", spec_hash}, {"result", r.ToJson()}}.dump(1) + "\n");
  return r;
}

void EnsureCompressedPredictions(const ExperimentPlan& plan, const ModelSpec& model,
                                 const Cell& cell, const RunOptions& options) {
  const std::string variant = CompressedVariant(cell.codec->codec_id, cell.qp);
  auto missing = [&] {
    std::vector<FrameRef> out;
    for (const auto& f : plan.frames) {
      if (!fs::exists(PredictionPath(model, variant, f))) out.push_back(f);
    }
    return out;
  };
  std::vector<FrameRef> absent = missing();
  if (absent.empty()) return;
  if (options.predictor) {
    for (const auto& f : absent) {
      const Image decoded = ReadPng(DecodedImagePath(options.workdir, *cell.codec, cell.qp, f));
      options.predictor->Predict(model, decoded, f, PredictionPath(model, variant, f));
    }
  } else if (!model.infer_command.empty()) {
    const fs::path out_dir = model.predictions / variant;
    fs::create_directories(out_dir);
    const fs::path logs = DecodedDir(options.workdir, *cell.codec, cell.qp) / "logs";
    fs::create_directories(logs);
    const std::string command = ExpandTemplate(
        model.infer_command,
        {{"input_dir", ShellQuote((DecodedDir(options.workdir, *cell.codec, cell.qp) / "images").string())},
         {"output_dir", ShellQuote(out_dir.string())},
         {"model_id", ShellQuote(model.model_id)},
         {"variant", ShellQuote(variant)}});
    const auto result =
        RunShellCommand(command, logs / ("infer_" + model.model_id + ".stdout.log"),
                        logs / ("infer_" + model.model_id + ".stderr.log"),
                        model.env_passthrough);
    if (result.exit_status != 0) {
      throw InputError(fmt::format("inference hook for {} on {} exited with {}: {}",
                                   model.model_id, variant, result.exit_status,
                                   result.stderr_tail));
    }
  }
  absent = missing();
  if (!absent.empty()) {
    throw InputError(fmt::format("{} predictions missing for {} on {}, first: {}",
                                 absent.size(), model.model_id, variant,
                                 PredictionPath(model, variant, absent.front()).string()));
  }
}

std::map<int, double> FrameClassWeights(const json& payload, ClassWeighting weighting) {
  std::map<int, double> raw;
  if (weighting == ClassWeighting::kPixels) {
    for (const auto& [cls, area] : payload.at("ref_pixels").items()) {
      raw[std::stoi(cls)] += area.get<double>();
    }
  } else {
    const auto matches = MatchesFromJson(payload.at("matches"));
    if (!matches.empty()) {
      for (const auto& [cls, n] : matches.front().ref_counts) raw[cls] += n;
    }
  }
  return raw;
}

double DetectionScore(const std::string& metric_id, const APResult& ap,
                      const std::map<int, double>& raw_weights) {
  if (metric_id == "map") return MeanAp(ap);
  return WeightedAp(ap, NormalizeWeights(raw_weights));
}

}  // namespace

StoreLayout LayoutFor(const ExperimentPlan& plan) {
  StoreLayout layout;
  layout.qp_ladder = plan.qp_ladder;
  layout.frames = plan.frames;
  layout.fps = plan.options.fps;
  layout.class_weighting = plan.options.class_weighting;
  return layout;
}

std::vector<std::string> MissingInputs(const ExperimentPlan& plan, const RunOptions& options) {
  std::vector<std::string> missing;
  auto need = [&](const fs::path& p, std::string_view what) {
    if (!fs::exists(p)) missing.push_back(fmt::format("{}: {}", what, p.string()));
  };
  for (const auto& f : plan.frames) need(f.image_path, "pristine frame");
  for (const auto& model : plan.models) {
    for (const auto& f : plan.frames) {
      if (plan.HasMode(GtMode::kTrueGt)) {
        need(ReferencePath(options.workdir, model, GtMode::kTrueGt, f),
             "true GT for " + model.model_id);
      }
      if (plan.HasMode(GtMode::kPseudoGt) && options.predictor == nullptr) {
        need(PredictionPath(model, "pristine", f), "pristine prediction for " + model.model_id);
      }
      if (NeedsFilesForCompressed(model, options)) {
        for (const auto& c : plan.codecs) {
          for (int qp : plan.qp_ladder) {
            need(PredictionPath(model, CompressedVariant(c.codec_id, qp), f),
                 "prediction for " + model.model_id);
          }
        }
      }
    }
  }
  if (std::find(plan.quality_metrics.begin(), plan.quality_metrics.end(), "vmaf") !=
      plan.quality_metrics.end()) {
    for (const auto& c : plan.codecs) {
      for (int qp : plan.qp_ladder) {
        for (const auto& [seq, frames] : plan.Sequences()) {
          const auto ci = plan.vmaf.find(c.codec_id);
          if (ci == plan.vmaf.end() || !ci->second.count(qp) || !ci->second.at(qp).count(seq)) {
            missing.push_back(
                fmt::format("VMAF log for {} qp{} {}: not listed in plan", c.codec_id, qp, seq));
          } else {
            need(ci->second.at(qp).at(seq), "VMAF log");
          }
        }
      }
    }
  }
  return missing;
}

std::size_t GeneratePseudoGt(const ExperimentPlan& plan, const RunOptions& options) {
  std::size_t written = 0;
  for (const auto& model : plan.models) {
    for (const auto& f : plan.frames) {
      const fs::path pristine = PredictionPath(model, "pristine", f);
      if (!fs::exists(pristine)) {
        if (!options.predictor) {
          throw InputError(fmt::format("pristine prediction missing: {}", pristine.string()));
        }
        options.predictor->Predict(model, ReadPng(f.image_path), f, pristine);
      }
      const fs::path out = ReferencePath(options.workdir, model, GtMode::kPseudoGt, f);
      std::vector<std::string> warnings;
      if (model.task == Task::kSemantic) {
        SaveLabelMap(out, SemanticPseudoGt(
                              LoadLabelMap(pristine, model.class_count, model.ignore_id),
                              &warnings));
      } else {
        SaveAnnotations(out, InstancePseudoGt(LoadDetections(pristine, f),
                                              plan.options.score_threshold, &warnings));
      }
      for (const auto& w : warnings) log::Warn("{} {}: {}", model.model_id, f.Key(), w);
      ++written;
    }
  }
  return written;
}

RunSummary EncodeAll(const ExperimentPlan& plan, const RunOptions& options) {
  RunSummary summary;
  summary.plan_hash = plan.hash;
  const auto cells = Cells(plan);
  const auto sequences = plan.Sequences();
  std::mutex mu;
  ParallelFor(cells.size(), options.jobs, [&](std::size_t i) {
    const Cell& cell = cells[i];
    try {
      for (const auto& [seq, frames] : sequences) {
        LoadOrEncode(*cell.codec, frames, cell.qp, options.workdir, options.use_cache);
      }
    } catch (const std::exception& e) {
      log::Error("{} qp{} failed: {}", cell.codec->codec_id, cell.qp, e.what());
      std::lock_guard lock(mu);
      summary.failures.push_back({cell.codec->codec_id, cell.qp, e.what()});
    }
  });
  return summary;
}

FrameEvaluation EvaluateModelFrame(const ModelSpec& model, const fs::path& reference,
                                   const fs::path& prediction, const FrameRef& frame,
                                   const PlanOptions& options, std::vector<std::string>* ops) {
  auto op = [&](std::string name) {
    if (ops) ops->push_back(std::move(name));
  };
  FrameEvaluation out;
  if (model.task == Task::kSemantic) {
    op("load_reference:label_map");
    const LabelMap gt = LoadLabelMap(reference, model.class_count, model.ignore_id);
    op("load_prediction:label_map");
    const LabelMap pred = LoadLabelMap(prediction, model.class_count, model.ignore_id);
    op("accumulate:confusion_matrix");
    ConfusionMatrix cm(model.class_count);
    cm.Accumulate(gt, pred);
    out.payload = {{"confusion", cm.ToJson()}};
    for (const auto& m : model.metrics) {
      op("score:" + m);
      try {
        if (m == "miou") out.values[m] = MeanIoU(cm);
        if (m == "oacc") out.values[m] = OverallAccuracy(cm);
        if (m == "frwacc") out.values[m] = FrequencyWeightedAccuracy(cm);
      } catch (const UndefinedMetricError&) {
        out.values[m] = std::nullopt;
      }
    }
    return out;
  }
  op("load_reference:instances");
  const InstanceSet refs = LoadAnnotations(reference, frame);
  op("load_prediction:detections");
  const DetectionSet dets = LoadDetections(prediction, frame);
  const MatchKind kind = model.match_kind();
  op(kind == MatchKind::kMask ? "match:mask" : "match:box");
  std::vector<MatchResult> matches =
      MatchAtThresholds(dets, refs, options.iou_thresholds, kind);
  json ref_pixels = json::object();
  for (const auto& inst : refs.instances) {
    const double area = (kind == MatchKind::kMask && inst.mask)
                            ? static_cast<double>(inst.mask->Area())
                            : inst.bbox.Area();
    const std::string key = std::to_string(inst.class_id);
    ref_pixels[key] = ref_pixels.value(key, 0.0) + area;
  }
  out.payload = {{"matches", ToJson(matches)}, {"ref_pixels", ref_pixels}};
  const std::vector<std::vector<MatchResult>> one{std::move(matches)};
  const APResult ap = EvaluateAp(one);
  const auto weights = FrameClassWeights(out.payload, options.class_weighting);
  for (const auto& m : model.metrics) {
    op("score:" + m);
    try {
      out.values[m] = DetectionScore(m, ap, weights);
    } catch (const UndefinedMetricError&) {
      out.values[m] = std::nullopt;
    }
  }
  return out;
}

RunOutput Run(const ExperimentPlan& plan, const RunOptions& options) {
  const auto missing = MissingInputs(plan, options);
  if (!missing.empty()) {
    std::string msg = fmt::format("{} missing input(s):", missing.size());
    for (const auto& m : missing) msg += "\n  " + m;
    throw ConfigError(msg);
  }
  const std::string started = UtcNow();
  const fs::path results = ResultsDir(options.workdir, plan);
  ResultStore store = ResultStore::Open(results);
  store.SetLayout(LayoutFor(plan));

  if (plan.HasMode(GtMode::kPseudoGt)) GeneratePseudoGt(plan, options);

  RunSummary summary;
  summary.plan_hash = plan.hash;
  summary.results_dir = results;
  const auto cells = Cells(plan);
  const auto sequences = plan.Sequences();
  std::mutex mu;

  ParallelFor(cells.size(), options.jobs, [&](std::size_t i) {
    const Cell& cell = cells[i];
    const CodecSpec& codec = *cell.codec;
    const auto keys = CellKeys(plan, cell);
    std::size_t hits = 0;
    for (const auto& k : keys) hits += store.Contains(k) ? 1 : 0;
    {
      std::lock_guard lock(mu);
      summary.expected_records += keys.size();
    }
    if (options.use_cache && hits == keys.size()) {
      std::lock_guard lock(mu);
      summary.cache_hits += hits;
      return;
    }
    std::size_t added = 0;
    try {
      std::map<std::string, std::uint64_t> frame_bits;
      for (const auto& [seq, frames] : sequences) {
        const EncodeResult enc =
            LoadOrEncode(codec, frames, cell.qp, options.workdir, options.use_cache);
        const auto shares = enc.FrameShares();
        for (std::size_t k = 0; k < frames.size(); ++k) frame_bits[frames[k].Key()] = shares[k];
      }
      for (const auto& model : plan.models) {
        EnsureCompressedPredictions(plan, model, cell, options);
      }
      auto base_record = [&](const FrameRef& f) {
        EvalRecord r;
        r.codec_id = codec.codec_id;
        r.config_id = codec.config_id;
        r.qp = cell.qp;
        r.frame = f;
        r.rate_bits = frame_bits.at(f.Key());
        return r;
      };
      for (const auto& [seq, frames] : sequences) {
        std::optional<VmafScores> vmaf;
        for (std::size_t k = 0; k < frames.size(); ++k) {
          const FrameRef& f = frames[k];
          const fs::path decoded = DecodedImagePath(options.workdir, codec, cell.qp, f);
          for (const auto& metric : plan.quality_metrics) {
            EvalRecord r = base_record(f);
            r.metric_id = metric;
            r.gt_mode = GtMode::kTrueGt;
            if (metric == "psnr") {
              const double mse =
                  MeanSquaredError(ReadPng(f.image_path), ReadPng(decoded), plan.options.psnr_color);
              const double psnr = PsnrFromMse(mse);
              if (std::isfinite(psnr)) r.value = psnr;
              r.payload = {{"mse", mse}};
            } else {
              if (!vmaf) vmaf = IngestVmaf(plan.vmaf.at(codec.codec_id).at(cell.qp).at(seq));
              const auto it = vmaf->per_frame.find(static_cast<int>(k));
              if (it == vmaf->per_frame.end()) {
                throw InputError(fmt::format("VMAF log for {} has no frame {}", seq, k));
              }
              r.value = it->second;
              r.payload = {{"vmaf", it->second}};
            }
            added += store.Put(r) ? 1 : 0;
          }
          for (const auto& model : plan.models) {
            const fs::path prediction =
                PredictionPath(model, CompressedVariant(codec.codec_id, cell.qp), f);
            for (GtMode mode : plan.gt_modes) {
              std::vector<std::string> ops;
              const FrameEvaluation ev = EvaluateModelFrame(
                  model, ReferencePath(options.workdir, model, mode, f), prediction, f,
                  plan.options, &ops);
              if (options.trace) {
                options.trace->Record(fmt::format("{}|{}|{}|{}", codec.codec_id, cell.qp,
                                                  f.Key(), model.model_id),
                                      mode, std::move(ops));
              }
              for (const auto& metric : model.metrics) {
                EvalRecord r = base_record(f);
                r.metric_id = metric;
                r.model_id = model.model_id;
                r.gt_mode = mode;
                r.value = ev.values.at(metric);
                r.payload = ev.payload;
                added += store.Put(r) ? 1 : 0;
              }
            }
          }
        }
      }
    } catch (const std::exception& e) {
      log::Error("{} qp{} failed: {}", codec.codec_id, cell.qp, e.what());
      std::lock_guard lock(mu);
      summary.failures.push_back({codec.codec_id, cell.qp, e.what()});
    }
    std::lock_guard lock(mu);
    summary.computed += added;
    summary.cache_hits += options.use_cache ? hits : 0;
  });

  std::sort(summary.failures.begin(), summary.failures.end(),
            [](const CellFailure& a, const CellFailure& b) {
              return std::tie(a.codec_id, a.qp) < std::tie(b.codec_id, b.qp);
            });
  json tools = json::object();
  for (const auto& c : plan.codecs) {
    tools[c.codec_id] = {{"kind", c.kind == CodecKind::kMock ? "mock" : "external"},
                         {"config_id", c.config_id},
                         {"version", c.version}};
  }
  json failures = json::array();
  for (const auto& f : summary.failures) {
    failures.push_back({{"codec_id", f.codec_id}, {"qp", f.qp}, {"message", f.message}});
  }
  store.WriteManifest({{"plan_hash", plan.hash},
                       {"plan", plan.canonical},
                       {"harness_version", kHarnessVersion},
                       {"tools", tools},
                       {"started_at", started},
                       {"finished_at", UtcNow()},
                       {"records", store.size()},
                       {"computed", summary.computed},
                       {"cache_hits", summary.cache_hits},
                       {"failures", failures}});
  log::Info("run {}: {} computed, {} cached, {} failed cell(s)", plan.hash.substr(0, 12),
            summary.computed, summary.cache_hits, summary.failures.size());
  return {std::move(store), std::move(summary)};
}

double AggregateMetric(const std::string& metric_id, std::vector<EvalRecord> records,
                       const StoreLayout& layout) {
  if (records.empty()) throw InputError(fmt::format("no {} records to aggregate", metric_id));
  std::sort(records.begin(), records.end(), [](const EvalRecord& a, const EvalRecord& b) {
    return a.frame.Key() < b.frame.Key();
  });
  if (IsSegmentationMetric(metric_id)) {
    ConfusionMatrix cm = ConfusionMatrix::FromJson(records.front().payload.at("confusion"));
    for (std::size_t i = 1; i < records.size(); ++i) {
      cm.Add(ConfusionMatrix::FromJson(records[i].payload.at("confusion")));
    }
    if (metric_id == "miou") return MeanIoU(cm);
    if (metric_id == "oacc") return OverallAccuracy(cm);
    return FrequencyWeightedAccuracy(cm);
  }
  if (IsDetectionMetric(metric_id)) {
    std::vector<std::vector<MatchResult>> frames;
    std::map<int, double> raw;
    for (const auto& r : records) {
      frames.push_back(MatchesFromJson(r.payload.at("matches")));
      for (const auto& [cls, w] : FrameClassWeights(r.payload, layout.class_weighting)) {
        raw[cls] += w;
      }
    }
    return DetectionScore(metric_id, EvaluateAp(frames), raw);
  }
  if (metric_id == "psnr") {
    std::vector<double> mse;
    for (const auto& r : records) mse.push_back(r.payload.at("mse").get<double>());
    return PoolPsnr(mse).mean_psnr;
  }
  if (metric_id == "vmaf") {
    double sum = 0;
    for (const auto& r : records) sum += r.payload.at("vmaf").get<double>();
    return sum / static_cast<double>(records.size());
  }
  throw ConfigError(fmt::format("unknown metric '{}'", metric_id));
}

RdCurve AssembleCurve(const ResultStore& store, const std::string& codec_id,
                      const std::string& metric_id, GtMode gt_mode,
                      const std::string& model_id) {
  const StoreLayout& layout = store.layout();
  if (IsQualityMetric(metric_id) && gt_mode == GtMode::kPseudoGt) {
    throw ConfigError(fmt::format("{} compares against the pristine frame and has no {} curve",
                                  metric_id, ToString(gt_mode)));
  }
  if (!IsQualityMetric(metric_id) && model_id.empty()) {
    throw ConfigError(fmt::format("metric {} needs a model_id", metric_id));
  }
  std::map<int, std::map<std::string, EvalRecord>> by_qp;
  for (auto& r : store.Records()) {
    if (r.codec_id != codec_id || r.metric_id != metric_id || r.model_id != model_id) continue;
    if (r.gt_mode != gt_mode) continue;
    by_qp[r.qp].emplace(r.frame.Key(), std::move(r));
  }
  std::vector<RdPoint> points;
  for (int qp : layout.qp_ladder) {
    std::vector<EvalRecord> records;
    std::uint64_t bits = 0;
    std::uint64_t pixels = 0;
    for (const auto& f : layout.frames) {
      const auto qi = by_qp.find(qp);
      const EvalRecord* r = nullptr;
      if (qi != by_qp.end()) {
        const auto fi = qi->second.find(f.Key());
        if (fi != qi->second.end()) r = &fi->second;
      }
      if (!r) {
        throw InputError(fmt::format("incomplete ladder: no {} record for {} qp{} frame {}",
                                     metric_id, codec_id, qp, f.Key()));
      }
      bits += r->rate_bits;
      pixels += static_cast<std::uint64_t>(f.width) * static_cast<std::uint64_t>(f.height);
      records.push_back(*r);
    }
    const double value = AggregateMetric(metric_id, std::move(records), layout);
    const double rate = RateFromBits(bits, pixels, static_cast<int>(layout.frames.size()),
                                     layout.fps);
    points.push_back({qp, rate, value});
  }
  return RdCurve(codec_id, metric_id, gt_mode, std::move(points));
}

std::vector<PocPoint> PerPocCurve(const ResultStore& store, const std::string& codec_id,
                                  int qp, const std::string& metric_id,
                                  const std::string& model_id, GtMode gt_mode) {
  std::map<std::string, std::map<int, std::optional<double>>> by_seq;
  for (const auto& r : store.Records()) {
    if (r.codec_id != codec_id || r.qp != qp || r.metric_id != metric_id ||
        r.model_id != model_id || r.gt_mode != gt_mode) {
      continue;
    }
    by_seq[r.frame.sequence_id][r.frame.frame_index] = r.value;
  }
  if (by_seq.empty()) {
    throw InputError(fmt::format("no {} records for {} qp{}", metric_id, codec_id, qp));
  }
  std::set<int> indices;
  for (const auto& [poc, v] : by_seq.begin()->second) indices.insert(poc);
  for (const auto& [seq, values] : by_seq) {
    std::set<int> mine;
    for (const auto& [poc, v] : values) mine.insert(poc);
    if (mine != indices) {
      throw InputError(fmt::format("ragged windows: sequence {} covers different frame indices "
                                   "than {}",
                                   seq, by_seq.begin()->first));
    }
  }
  std::vector<PocPoint> curve;
  for (int poc : indices) {
    double sum = 0;
    int n = 0;
    for (const auto& [seq, values] : by_seq) {
      const auto& v = values.at(poc);
      if (v) {
        sum += *v;
        ++n;
      }
    }
    if (n > 0) curve.push_back({poc, sum / n});
  }
  return curve;
}

}  // namespace vcm
