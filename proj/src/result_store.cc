#include "vcm/result_store.h"

#include <fmt/format.h>

#include "vcm/error.h"
#include "vcm/hash.h"
#include "vcm/image.h"
#include "vcm/log.h"

namespace vcm {

namespace fs = std::filesystem;
using nlohmann::json;

json StoreLayout::ToJson() const {
  json frames_json = json::array();
  for (const auto& f : frames) frames_json.push_back(vcm::ToJson(f));
  return {{"qp_ladder", qp_ladder},
          {"frames", frames_json},
          {"fps", fps ? json(*fps) : json(nullptr)},
          {"class_weighting",
           class_weighting == ClassWeighting::kPixels ? "pixels" : "instances"}};
}

StoreLayout StoreLayout::FromJson(const json& j) {
  StoreLayout layout;
  layout.qp_ladder = j.at("qp_ladder").get<std::vector<int>>();
  for (const auto& f : j.at("frames")) layout.frames.push_back(FrameRefFromJson(f));
  if (j.contains("fps") && !j["fps"].is_null()) layout.fps = j["fps"].get<double>();
  layout.class_weighting =
      ParseClassWeighting(j.value("class_weighting", std::string("instances")));
  return layout;
}

std::string RecordKey(const std::string& codec_id, const std::string& config_id, int qp,
                      const FrameRef& frame, const std::string& metric_id,
                      GtMode gt_mode, const std::string& model_id) {
  return fmt::format("{}|{}|{}|{}|{}|{}|{}", codec_id, config_id, qp, frame.Key(),
                     metric_id, ToString(gt_mode), model_id);
}

std::string RecordKey(const EvalRecord& r) {
  return RecordKey(r.codec_id, r.config_id, r.qp, r.frame, r.metric_id, r.gt_mode,
                   r.model_id);
}

ResultStore::ResultStore() : mu_(std::make_unique<std::mutex>()) {}

ResultStore::ResultStore(ResultStore&& other) noexcept
    : mu_(std::move(other.mu_)),
      records_(std::move(other.records_)),
      dir_(std::move(other.dir_)),
      layout_(std::move(other.layout_)) {
  other.mu_ = std::make_unique<std::mutex>();
}

ResultStore& ResultStore::operator=(ResultStore&& other) noexcept {
  if (this != &other) {
    mu_ = std::move(other.mu_);
    records_ = std::move(other.records_);
    dir_ = std::move(other.dir_);
    layout_ = std::move(other.layout_);
    other.mu_ = std::make_unique<std::mutex>();
  }
  return *this;
}

ResultStore ResultStore::Open(const fs::path& dir) {
  ResultStore store;
  store.dir_ = dir;
  fs::create_directories(dir / "records");
  for (const auto& entry : fs::directory_iterator(dir / "records")) {
    if (entry.path().extension() != ".json") continue;
    try {
      EvalRecord r = EvalRecordFromJson(json::parse(ReadTextFile(entry.path())));
      store.records_.emplace(RecordKey(r), std::move(r));
    } catch (const std::exception& e) {
      // A torn or foreign file is recomputed rather than trusted.
      log::Warn("skipping unreadable record {}: {}", entry.path().string(), e.what());
    }
  }
  const fs::path manifest = dir / "manifest.json";
  if (fs::exists(manifest)) {
    const json m = json::parse(ReadTextFile(manifest));
    if (m.contains("layout")) store.layout_ = StoreLayout::FromJson(m["layout"]);
  }
  return store;
}

bool ResultStore::Put(const EvalRecord& record) {
  const std::string key = RecordKey(record);
  std::lock_guard lock(*mu_);
  auto it = records_.find(key);
  if (it != records_.end()) {
    if (!(it->second == record)) {
      log::Warn("record {} recomputed with a different value; keeping the stored one",
                key);
    }
    return false;
  }
  if (dir_) {
    WriteFileAtomic(*dir_ / "records" / (Sha256Hex(key) + ".json"),
                    vcm::ToJson(record).dump() + "\n");
  }
  records_.emplace(key, record);
  return true;
}

bool ResultStore::Contains(const std::string& key) const {
  std::lock_guard lock(*mu_);
  return records_.count(key) > 0;
}

std::optional<EvalRecord> ResultStore::Get(const std::string& key) const {
  std::lock_guard lock(*mu_);
  auto it = records_.find(key);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

std::vector<EvalRecord> ResultStore::Records() const {
  std::lock_guard lock(*mu_);
  std::vector<EvalRecord> out;
  out.reserve(records_.size());
  for (const auto& [key, r] : records_) out.push_back(r);
  return out;
}

std::size_t ResultStore::size() const {
  std::lock_guard lock(*mu_);
  return records_.size();
}

void ResultStore::SetLayout(StoreLayout layout) { layout_ = std::move(layout); }

const StoreLayout& ResultStore::layout() const {
  if (!layout_) throw ConfigError("result store has no run layout (was the plan run?)");
  return *layout_;
}

void ResultStore::WriteManifest(json manifest) const {
  if (!dir_) return;
  if (layout_) manifest["layout"] = layout_->ToJson();
  WriteFileAtomic(*dir_ / "manifest.json", manifest.dump(2) + "\n");
}

json ResultStore::ReadManifest() const {
  if (!dir_ || !fs::exists(*dir_ / "manifest.json")) return json::object();
  return json::parse(ReadTextFile(*dir_ / "manifest.json"));
}

}  // namespace vcm
