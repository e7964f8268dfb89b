#ifndef VCM_RESULT_STORE_H_
#define VCM_RESULT_STORE_H_

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vcm/datamodel.h"
#include "vcm/det_metrics.h"

namespace vcm {

// What a complete run is expected to contain; curve assembly checks against
// it and needs the aggregation settings.
struct StoreLayout {
  std::vector<int> qp_ladder;
  std::vector<FrameRef> frames;
  std::optional<double> fps;
  ClassWeighting class_weighting = ClassWeighting::kInstances;

  nlohmann::json ToJson() const;
  static StoreLayout FromJson(const nlohmann::json& j);
};

std::string RecordKey(const std::string& codec_id, const std::string& config_id, int qp,
                      const FrameRef& frame, const std::string& metric_id,
                      GtMode gt_mode, const std::string& model_id);
std::string RecordKey(const EvalRecord& record);

// Keyed EvalRecord collection. With a directory, each record is persisted as
// <dir>/records/<sha256(key)>.json via atomic rename. Thread-safe.
class ResultStore {
 public:
  ResultStore();
  // Loads whatever records and manifest the directory already holds.
  static ResultStore Open(const std::filesystem::path& dir);

  ResultStore(ResultStore&& other) noexcept;
  ResultStore& operator=(ResultStore&& other) noexcept;
  ResultStore(const ResultStore&) = delete;
  ResultStore& operator=(const ResultStore&) = delete;

  // Returns false when the key already exists; the stored value is kept.
  bool Put(const EvalRecord& record);
  bool Contains(const std::string& key) const;
  std::optional<EvalRecord> Get(const std::string& key) const;
  // Sorted by key.
  std::vector<EvalRecord> Records() const;
  std::size_t size() const;

  const std::optional<std::filesystem::path>& dir() const { return dir_; }

  void SetLayout(StoreLayout layout);
  // Throws ConfigError when unset.
  const StoreLayout& layout() const;
  bool has_layout() const { return layout_.has_value(); }

  // manifest.json next to the records; merged with the layout on write.
  void WriteManifest(nlohmann::json manifest) const;
  nlohmann::json ReadManifest() const;

 private:
  std::unique_ptr<std::mutex> mu_;
  std::map<std::string, EvalRecord> records_;
  std::optional<std::filesystem::path> dir_;
  std::optional<StoreLayout> layout_;
};

}  // namespace vcm

#endif  // VCM_RESULT_STORE_H_
