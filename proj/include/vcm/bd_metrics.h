#ifndef VCM_BD_METRICS_H_
#define VCM_BD_METRICS_H_

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vcm/datamodel.h"

namespace vcm {

enum class FitKind { kCubicPoly, kPchip };
enum class MonotonicityPolicy { kStrict, kPrune };

std::string_view ToString(FitKind kind);
std::string_view ToString(MonotonicityPolicy policy);
FitKind ParseFitKind(std::string_view s);
MonotonicityPolicy ParseMonotonicityPolicy(std::string_view s);

struct RdPoint {
  int qp = 0;
  // Bits per pixel or kbit/s; must be > 0.
  double rate = 0;
  double value = 0;

  bool operator==(const RdPoint&) const = default;
};

// Rate/metric points of one (codec, metric, GT mode) triple, sorted by
// ascending rate.
class RdCurve {
 public:
  // Throws InputError for fewer than 2 points or a non-positive rate.
  RdCurve(std::string codec_id, std::string metric_id, GtMode gt_mode,
          std::vector<RdPoint> points);

  const std::string& codec_id() const { return codec_id_; }
  const std::string& metric_id() const { return metric_id_; }
  GtMode gt_mode() const { return gt_mode_; }
  const std::vector<RdPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }

 private:
  std::string codec_id_;
  std::string metric_id_;
  GtMode gt_mode_;
  std::vector<RdPoint> points_;
};

// Maps a metric value to log10(rate).
class LogRateInterpolant {
 public:
  // Least-squares cubic through (value, log_rate); exact for 4 points.
  static LogRateInterpolant FitCubic(std::span<const double> values,
                                     std::span<const double> log_rates);
  // Monotone piecewise cubic Hermite (Fritsch-Carlson slopes with the
  // three-point end condition).
  static LogRateInterpolant FitPchip(std::span<const double> values,
                                     std::span<const double> log_rates);

  FitKind kind() const { return kind_; }
  double domain_min() const { return knots_.front(); }
  double domain_max() const { return knots_.back(); }
  const std::vector<double>& knots() const { return knots_; }

  double Evaluate(double value) const;
  // Exact integral over [lo, hi] from the closed-form antiderivative.
  double Integrate(double lo, double hi) const;

  // Cubic only: coefficients a0..a3 of p(t), t = (value - center) / scale.
  const std::array<double, 4>& coefficients() const { return coef_; }
  double center() const { return center_; }
  double scale() const { return scale_; }

 private:
  LogRateInterpolant() = default;

  double PchipSegmentIntegral(std::size_t k, double a, double b) const;

  FitKind kind_ = FitKind::kCubicPoly;
  std::vector<double> knots_;
  std::vector<double> log_rates_;
  std::vector<double> slopes_;
  std::array<double, 4> coef_{};
  double center_ = 0;
  double scale_ = 1;
};

// Throws InputError on duplicate values or too few points for `kind`
// (cubic needs 4, pchip 2).
LogRateInterpolant FitLogRate(const RdCurve& curve, FitKind kind);

// Checks that value is strictly monotone in rate. kStrict throws InputError
// on a violation; kPrune walks from the highest-rate point toward the low
// end and drops every point that breaks monotonicity, logging each one.
RdCurve EnforceMonotonicity(const RdCurve& curve, MonotonicityPolicy policy,
                            std::vector<std::string>* warnings = nullptr);

struct BdOptions {
  // Unset: cubic when both curves have exactly 4 points, pchip otherwise.
  std::optional<FitKind> fit;
  MonotonicityPolicy monotonicity = MonotonicityPolicy::kStrict;
};

struct BdResult {
  double bd_rate_percent = 0;
  double overlap_low = 0;
  double overlap_high = 0;
  FitKind fit_kind = FitKind::kCubicPoly;
  std::vector<std::string> warnings;

  nlohmann::json ToJson() const;
};

FitKind DefaultFitKind(std::size_t anchor_points, std::size_t test_points);

// Average log-rate difference (test minus anchor) over the shared value
// range, as a percentage: negative means the test codec needs less rate.
// Throws InputError for mismatched metric/mode or a monotonicity violation
// under kStrict, UndefinedMetricError for an empty overlap.
BdResult BdRate(const RdCurve& anchor, const RdCurve& test,
                const BdOptions& options = {});

// true - pseudo, in percentage points.
double BdDiff(double true_bdr, double pseudo_bdr);
double BdDiff(const BdResult& true_result, const BdResult& pseudo_result);

// CSV with header "qp,rate,value"; numbers written in shortest round-trip
// form so re-ingestion is lossless.
std::string CurveToCsv(const RdCurve& curve);
RdCurve ParseCurveCsv(std::string_view text, std::string codec_id,
                      std::string metric_id, GtMode gt_mode);
RdCurve ReadCurveCsv(const std::filesystem::path& path, std::string codec_id,
                     std::string metric_id, GtMode gt_mode);

}  // namespace vcm

#endif  // VCM_BD_METRICS_H_
