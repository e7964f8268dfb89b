#include "vcm/plan.h"

#include <algorithm>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "vcm/error.h"
#include "vcm/hash.h"
#include "vcm/image.h"

namespace vcm {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view ToString(Task task) {
  switch (task) {
    case Task::kSemantic: return "semantic";
    case Task::kInstance: return "instance";
    case Task::kDetection: return "detection";
  }
  return "";
}

Task ParseTask(std::string_view s) {
  if (s == "semantic") return Task::kSemantic;
  if (s == "instance") return Task::kInstance;
  if (s == "detection") return Task::kDetection;
  throw ConfigError(fmt::format("unknown task '{}'", s));
}

const std::vector<std::string>& TaskMetrics(Task task) {
  static const std::vector<std::string> kSeg = {"miou", "oacc", "frwacc"};
  static const std::vector<std::string> kDet = {"wap", "map"};
  return task == Task::kSemantic ? kSeg : kDet;
}

bool IsQualityMetric(std::string_view m) { return m == "psnr" || m == "vmaf"; }
bool IsSegmentationMetric(std::string_view m) {
  return m == "miou" || m == "oacc" || m == "frwacc";
}
bool IsDetectionMetric(std::string_view m) { return m == "wap" || m == "map"; }

const CodecSpec& ExperimentPlan::codec(const std::string& codec_id) const {
  for (const auto& c : codecs) {
    if (c.codec_id == codec_id) return c;
  }
  throw ConfigError(fmt::format("unknown codec '{}'", codec_id));
}

const ModelSpec& ExperimentPlan::model(const std::string& model_id) const {
  for (const auto& m : models) {
    if (m.model_id == model_id) return m;
  }
  throw ConfigError(fmt::format("unknown model '{}'", model_id));
}

bool ExperimentPlan::HasMode(GtMode mode) const {
  return std::find(gt_modes.begin(), gt_modes.end(), mode) != gt_modes.end();
}

std::map<std::string, std::vector<FrameRef>> ExperimentPlan::Sequences() const {
  std::map<std::string, std::vector<FrameRef>> seqs;
  for (const auto& f : frames) seqs[f.sequence_id].push_back(f);
  for (auto& [id, list] : seqs) {
    std::sort(list.begin(), list.end(), [](const FrameRef& a, const FrameRef& b) {
      return a.frame_index < b.frame_index;
    });
  }
  return seqs;
}

namespace {

fs::path Resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

template <typename T>
T Get(const json& j, const char* key, std::string_view context) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: field '{}': {}", context, key, e.what()));
  }
}

void CheckKnownKeys(const json& j, std::initializer_list<std::string_view> keys,
                    std::string_view context) {
  for (const auto& [k, v] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw ConfigError(fmt::format("{}: unknown key '{}'", context, k));
    }
  }
}

ModelSpec ParseModel(const json& j, const fs::path& base) {
  CheckKnownKeys(j,
                 {"model_id", "label", "task", "class_count", "ignore_id", "metrics",
                  "predictions", "true_gt", "infer_command", "env"},
                 "model");
  ModelSpec m;
  m.model_id = Get<std::string>(j, "model_id", "model");
  const std::string ctx = "model " + m.model_id;
  m.label = j.value("label", m.model_id);
  m.task = ParseTask(Get<std::string>(j, "task", ctx));
  m.class_count = j.value("class_count", m.task == Task::kSemantic
                                             ? kDefaultSemanticClasses
                                             : kDefaultInstanceClasses);
  m.ignore_id = j.value("ignore_id", kDefaultIgnoreId);
  m.metrics = j.value("metrics", TaskMetrics(m.task));
  for (const auto& metric : m.metrics) {
    const auto& allowed = TaskMetrics(m.task);
    if (std::find(allowed.begin(), allowed.end(), metric) == allowed.end()) {
      throw ConfigError(fmt::format("{}: metric '{}' is not produced by task {}", ctx,
                                    metric, ToString(m.task)));
    }
  }
  m.predictions = Resolve(base, Get<std::string>(j, "predictions", ctx));
  if (j.contains("true_gt")) m.true_gt = Resolve(base, Get<std::string>(j, "true_gt", ctx));
  m.infer_command = j.value("infer_command", "");
  m.env_passthrough = j.value("env", std::vector<std::string>{});
  if (m.class_count <= 0 || m.class_count > 255) {
    throw ConfigError(fmt::format("{}: class_count {} outside [1, 255]", ctx, m.class_count));
  }
  return m;
}

PlanOptions ParseOptions(const json& j) {
  CheckKnownKeys(j,
                 {"score_threshold", "iou_thresholds", "psnr_color", "fps",
                  "class_weighting", "fit", "monotonicity"},
                 "options");
  PlanOptions o;
  o.score_threshold = j.value("score_threshold", o.score_threshold);
  if (!(o.score_threshold >= 0 && o.score_threshold <= 1)) {
    throw ConfigError(fmt::format("score_threshold {} outside [0, 1]", o.score_threshold));
  }
  o.iou_thresholds = j.value("iou_thresholds", o.iou_thresholds);
  if (o.iou_thresholds.empty()) throw ConfigError("iou_thresholds must not be empty");
  for (double t : o.iou_thresholds) {
    if (!(t > 0 && t <= 1)) throw ConfigError(fmt::format("IoU threshold {} outside (0, 1]", t));
  }
  if (j.contains("psnr_color")) o.psnr_color = ParsePsnrColor(j["psnr_color"].get<std::string>());
  if (j.contains("fps") && !j["fps"].is_null()) {
    o.fps = j["fps"].get<double>();
    if (!(*o.fps > 0)) throw ConfigError("fps must be positive");
  }
  if (j.contains("class_weighting")) {
    o.class_weighting = ParseClassWeighting(j["class_weighting"].get<std::string>());
  }
  if (j.contains("fit") && !j["fit"].is_null()) o.fit = ParseFitKind(j["fit"].get<std::string>());
  if (j.contains("monotonicity")) {
    o.monotonicity = ParseMonotonicityPolicy(j["monotonicity"].get<std::string>());
  }
  return o;
}

}  // namespace

std::string PlanHash(const json& plan) {
  // Settings that only change how stored records are selected or turned
  // into BD-rates stay out of the hash, so they can vary between evaluate
  // and report without orphaning the results.
  json hashed = plan;
  hashed.erase("name");
  hashed.erase("gt_modes");
  if (hashed.contains("options") && hashed["options"].is_object()) {
    for (const char* k : {"fit", "monotonicity", "fps"}) hashed["options"].erase(k);
    if (hashed["options"].empty()) hashed.erase("options");
  }
  return Sha256Hex(hashed.dump());
}

ExperimentPlan ParsePlan(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("plan must be a JSON object");
  CheckKnownKeys(j,
                 {"schema_version", "name", "dataset", "codecs", "qp_ladder",
                  "quality_metrics", "vmaf", "models", "gt_modes", "options"},
                 "plan");
  const int version = j.value("schema_version", kPlanSchemaVersion);
  if (version != kPlanSchemaVersion) {
    throw ConfigError(fmt::format("unsupported plan schema_version {} (expected {})",
                                  version, kPlanSchemaVersion));
  }
  ExperimentPlan plan;
  plan.canonical = j;
  plan.hash = PlanHash(j);
  plan.name = j.value("name", "experiment");

  const json& ds = j.contains("dataset") ? j["dataset"] : throw ConfigError("plan lacks 'dataset'");
  CheckKnownKeys(ds, {"id", "frames", "window"}, "dataset");
  plan.dataset_id = ds.value("id", "dataset");
  if (ds.contains("window")) {
    const json& w = ds["window"];
    FrameWindow win;
    win.start = Get<int>(w, "start", "dataset.window");
    win.count = Get<int>(w, "count", "dataset.window");
    if (w.contains("labeled_index")) win.labeled_index = w["labeled_index"].get<int>();
    if (win.count <= 0) throw ConfigError("dataset.window.count must be positive");
    if (win.labeled_index &&
        (*win.labeled_index < win.start || *win.labeled_index >= win.start + win.count)) {
      throw ConfigError("dataset.window.labeled_index lies outside the window");
    }
    plan.window = win;
  }
  std::set<std::pair<std::string, int>> seen;
  for (const auto& f : Get<json>(ds, "frames", "dataset")) {
    FrameRef ref;
    ref.dataset_id = plan.dataset_id;
    ref.sequence_id = Get<std::string>(f, "sequence_id", "frame");
    ref.frame_index = Get<int>(f, "frame_index", "frame");
    if (ref.frame_index < 0) throw ConfigError("frame_index must be non-negative");
    ref.image_path = Resolve(base_dir, Get<std::string>(f, "image", "frame"));
    ref.width = f.value("width", 0);
    ref.height = f.value("height", 0);
    if ((ref.width == 0 || ref.height == 0) && fs::exists(ref.image_path)) {
      std::tie(ref.width, ref.height) = ReadPngSize(ref.image_path);
    }
    if (plan.window && (ref.frame_index < plan.window->start ||
                        ref.frame_index >= plan.window->start + plan.window->count)) {
      continue;
    }
    if (!seen.emplace(ref.sequence_id, ref.frame_index).second) {
      throw ConfigError(fmt::format("duplicate frame {}/{}", ref.sequence_id,
                                    ref.frame_index));
    }
    plan.frames.push_back(std::move(ref));
  }
  if (plan.frames.empty()) throw ConfigError("plan selects no frames");

  std::set<std::string> codec_ids;
  for (const auto& c : Get<json>(j, "codecs", "plan")) {
    plan.codecs.push_back(CodecSpecFromJson(c));
    if (!codec_ids.insert(plan.codecs.back().codec_id).second) {
      throw ConfigError(fmt::format("duplicate codec_id '{}'", plan.codecs.back().codec_id));
    }
  }
  if (plan.codecs.empty()) throw ConfigError("plan lists no codecs");

  plan.qp_ladder = Get<std::vector<int>>(j, "qp_ladder", "plan");
  if (plan.qp_ladder.empty()) throw ConfigError("qp_ladder must not be empty");
  for (std::size_t i = 1; i < plan.qp_ladder.size(); ++i) {
    if (plan.qp_ladder[i] <= plan.qp_ladder[i - 1]) {
      throw ConfigError("qp_ladder must be strictly increasing");
    }
  }

  plan.quality_metrics = j.value("quality_metrics", std::vector<std::string>{"psnr"});
  for (const auto& m : plan.quality_metrics) {
    if (!IsQualityMetric(m)) throw ConfigError(fmt::format("unknown quality metric '{}'", m));
  }
  if (j.contains("vmaf")) {
    for (const auto& [codec, per_qp] : j["vmaf"].items()) {
      for (const auto& [qp, per_seq] : per_qp.items()) {
        for (const auto& [seq, path] : per_seq.items()) {
          plan.vmaf[codec][std::stoi(qp)][seq] = Resolve(base_dir, path.get<std::string>());
        }
      }
    }
  }

  std::set<std::string> model_ids;
  for (const auto& m : j.value("models", json::array())) {
    plan.models.push_back(ParseModel(m, base_dir));
    if (!model_ids.insert(plan.models.back().model_id).second) {
      throw ConfigError(fmt::format("duplicate model_id '{}'", plan.models.back().model_id));
    }
  }

  for (const auto& s : j.value("gt_modes", std::vector<std::string>{"true_gt", "pseudo_gt"})) {
    plan.gt_modes.push_back(ParseGtMode(s));
  }
  if (plan.gt_modes.empty()) throw ConfigError("gt_modes must not be empty");
  if (plan.HasMode(GtMode::kTrueGt)) {
    for (const auto& m : plan.models) {
      if (!m.true_gt) {
        throw ConfigError(fmt::format(
            "model {} has no true_gt directory but true_gt mode is requested",
            m.model_id));
      }
    }
  }
  plan.options = ParseOptions(j.value("options", json::object()));
  return plan;
}

ExperimentPlan LoadPlan(const fs::path& path, const std::vector<std::string>& overrides) {
  if (!fs::exists(path)) {
    throw ConfigError(fmt::format("plan file not found: {}", path.string()));
  }
  json j;
  try {
    j = json::parse(ReadTextFile(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: malformed plan JSON: {}", path.string(), e.what()));
  }
  for (const auto& o : overrides) ApplyOverride(j, o);
  try {
    return ParsePlan(j, fs::absolute(path).parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

const std::vector<std::string>& OverrideKeys() {
  static const std::vector<std::string> keys = {
      "score_threshold", "fit",       "monotonicity", "psnr_color",    "fps",
      "class_weighting", "gt_modes",  "qp_ladder",    "iou_thresholds"};
  return keys;
}

namespace {

std::vector<std::string> SplitList(std::string_view s) {
  std::vector<std::string> out;
  std::stringstream ss{std::string(s)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double ParseDouble(std::string_view key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("override {}: '{}' is not a number", key, v));
  }
}

}  // namespace

void ApplyOverride(json& plan, std::string_view key_value) {
  const auto eq = key_value.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError(fmt::format("override '{}' is not key=value", key_value));
  }
  const std::string key(key_value.substr(0, eq));
  const std::string value(key_value.substr(eq + 1));
  const auto& keys = OverrideKeys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
    throw ConfigError(fmt::format("unknown override key '{}'", key));
  }
  json& options = plan["options"];
  if (!options.is_object()) options = json::object();
  if (key == "score_threshold" || key == "fps") {
    options[key] = ParseDouble(key, value);
  } else if (key == "fit" || key == "monotonicity" || key == "psnr_color" ||
             key == "class_weighting") {
    options[key] = value;
  } else if (key == "iou_thresholds") {
    json list = json::array();
    for (const auto& item : SplitList(value)) list.push_back(ParseDouble(key, item));
    options[key] = list;
  } else if (key == "gt_modes") {
    json list = json::array();
    for (const auto& item : SplitList(value)) {
      list.push_back(std::string(ToString(ParseGtMode(item))));
    }
    plan[key] = list;
  } else if (key == "qp_ladder") {
    json list = json::array();
    for (const auto& item : SplitList(value)) {
      list.push_back(static_cast<int>(ParseDouble(key, item)));
    }
    plan[key] = list;
  }
}

}  // namespace vcm
