#include "vcm/bd_metrics.h"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "vcm/error.h"
#include "vcm/image.h"

namespace vcm {

std::string_view ToString(FitKind kind) {
  return kind == FitKind::kCubicPoly ? "cubic_poly" : "pchip";
}

std::string_view ToString(MonotonicityPolicy policy) {
  return policy == MonotonicityPolicy::kStrict ? "strict" : "prune";
}

FitKind ParseFitKind(std::string_view s) {
  if (s == "cubic" || s == "cubic_poly") return FitKind::kCubicPoly;
  if (s == "pchip") return FitKind::kPchip;
  throw ConfigError(fmt::format("unknown fit kind '{}'", s));
}

MonotonicityPolicy ParseMonotonicityPolicy(std::string_view s) {
  if (s == "strict") return MonotonicityPolicy::kStrict;
  if (s == "prune") return MonotonicityPolicy::kPrune;
  throw ConfigError(fmt::format("unknown monotonicity policy '{}'", s));
}

RdCurve::RdCurve(std::string codec_id, std::string metric_id, GtMode gt_mode,
                 std::vector<RdPoint> points)
    : codec_id_(std::move(codec_id)),
      metric_id_(std::move(metric_id)),
      gt_mode_(gt_mode),
      points_(std::move(points)) {
  if (points_.size() < 2) {
    throw InputError(fmt::format("curve {}/{} needs at least 2 points, has {}",
                                 codec_id_, metric_id_, points_.size()));
  }
  for (const auto& p : points_) {
    if (!(p.rate > 0) || !std::isfinite(p.rate)) {
      throw InputError(fmt::format("curve {}/{}: rate must be positive (qp {}: {})",
                                   codec_id_, metric_id_, p.qp, p.rate));
    }
    if (!std::isfinite(p.value)) {
      throw InputError(fmt::format("curve {}/{}: non-finite value at qp {}",
                                   codec_id_, metric_id_, p.qp));
    }
  }
  std::stable_sort(points_.begin(), points_.end(),
                   [](const RdPoint& a, const RdPoint& b) { return a.rate < b.rate; });
}

namespace {

void CheckKnots(std::span<const double> values, std::span<const double> log_rates,
                std::size_t min_points) {
  if (values.size() != log_rates.size()) {
    throw InputError("values and rates differ in length");
  }
  if (values.size() < min_points) {
    throw InputError(fmt::format("fit needs at least {} points, got {}", min_points,
                                 values.size()));
  }
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) {
      throw InputError(fmt::format("duplicate or unsorted metric value {}", values[i]));
    }
  }
}

int Sign(double v) { return (v > 0) - (v < 0); }

// Hermite segment on [x_k, x_{k+1}] written as
// y = y_k + d_k s + c2 s^2 + c3 s^3 with s = x - x_k.
struct Segment {
  double y0, d0, c2, c3;
};

Segment MakeSegment(double h, double y0, double y1, double d0, double d1) {
  const double m = (y1 - y0) / h;
  return {y0, d0, (3 * m - 2 * d0 - d1) / h, (d0 + d1 - 2 * m) / (h * h)};
}

double SegmentValue(const Segment& s, double t) {
  return s.y0 + t * (s.d0 + t * (s.c2 + t * s.c3));
}

double SegmentAntiderivative(const Segment& s, double t) {
  return t * (s.y0 + t * (s.d0 / 2 + t * (s.c2 / 3 + t * s.c3 / 4)));
}

}  // namespace

LogRateInterpolant LogRateInterpolant::FitCubic(std::span<const double> values,
                                                std::span<const double> log_rates) {
  CheckKnots(values, log_rates, 4);
  LogRateInterpolant f;
  f.kind_ = FitKind::kCubicPoly;
  f.knots_.assign(values.begin(), values.end());
  f.log_rates_.assign(log_rates.begin(), log_rates.end());
  // Normalizing the abscissa keeps the Vandermonde system well conditioned
  // and makes the fit invariant to the metric's units.
  f.center_ = (values.front() + values.back()) / 2;
  f.scale_ = (values.back() - values.front()) / 2;
  const auto n = static_cast<Eigen::Index>(values.size());
  Eigen::MatrixXd a(n, 4);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = (values[i] - f.center_) / f.scale_;
    a(i, 0) = 1;
    a(i, 1) = t;
    a(i, 2) = t * t;
    a(i, 3) = t * t * t;
    b(i) = log_rates[i];
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  for (int k = 0; k < 4; ++k) f.coef_[k] = c(k);
  return f;
}

LogRateInterpolant LogRateInterpolant::FitPchip(std::span<const double> values,
                                                std::span<const double> log_rates) {
  CheckKnots(values, log_rates, 2);
  LogRateInterpolant f;
  f.kind_ = FitKind::kPchip;
  f.knots_.assign(values.begin(), values.end());
  f.log_rates_.assign(log_rates.begin(), log_rates.end());
  const std::size_t n = values.size();
  std::vector<double> h(n - 1), m(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = values[k + 1] - values[k];
    m[k] = (log_rates[k + 1] - log_rates[k]) / h[k];
  }
  f.slopes_.assign(n, 0.0);
  if (n == 2) {
    f.slopes_[0] = f.slopes_[1] = m[0];
    return f;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (Sign(m[k - 1]) * Sign(m[k]) <= 0) continue;
    const double w1 = 2 * h[k] + h[k - 1];
    const double w2 = h[k] + 2 * h[k - 1];
    f.slopes_[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
  }
  auto edge = [](double h0, double h1, double m0, double m1) {
    double d = ((2 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if (Sign(d) != Sign(m0)) {
      d = 0;
    } else if (Sign(m0) != Sign(m1) && std::abs(d) > 3 * std::abs(m0)) {
      d = 3 * m0;
    }
    return d;
  };
  f.slopes_[0] = edge(h[0], h[1], m[0], m[1]);
  f.slopes_[n - 1] = edge(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
  return f;
}

double LogRateInterpolant::Evaluate(double value) const {
  if (kind_ == FitKind::kCubicPoly) {
    const double t = (value - center_) / scale_;
    return coef_[0] + t * (coef_[1] + t * (coef_[2] + t * coef_[3]));
  }
  const std::size_t n = knots_.size();
  std::size_t k = 0;
  if (value >= knots_[n - 1]) {
    k = n - 2;
  } else if (value > knots_[0]) {
    k = static_cast<std::size_t>(
            std::upper_bound(knots_.begin(), knots_.end(), value) - knots_.begin()) -
        1;
  }
  const Segment s = MakeSegment(knots_[k + 1] - knots_[k], log_rates_[k],
                                log_rates_[k + 1], slopes_[k], slopes_[k + 1]);
  return SegmentValue(s, value - knots_[k]);
}

double LogRateInterpolant::PchipSegmentIntegral(std::size_t k, double a,
                                                double b) const {
  const Segment s = MakeSegment(knots_[k + 1] - knots_[k], log_rates_[k],
                                log_rates_[k + 1], slopes_[k], slopes_[k + 1]);
  return SegmentAntiderivative(s, b - knots_[k]) -
         SegmentAntiderivative(s, a - knots_[k]);
}

double LogRateInterpolant::Integrate(double lo, double hi) const {
  if (kind_ == FitKind::kCubicPoly) {
    auto anti = [this](double v) {
      const double t = (v - center_) / scale_;
      return t * (coef_[0] + t * (coef_[1] / 2 + t * (coef_[2] / 3 + t * coef_[3] / 4)));
    };
    return scale_ * (anti(hi) - anti(lo));
  }
  double sum = 0;
  const std::size_t segments = knots_.size() - 1;
  for (std::size_t k = 0; k < segments; ++k) {
    // The first and last segments extend to cover extrapolation.
    const double left = k == 0 ? std::min(lo, knots_[0]) : knots_[k];
    const double right =
        k + 1 == segments ? std::max(hi, knots_[k + 1]) : knots_[k + 1];
    const double a = std::max(lo, left);
    const double b = std::min(hi, right);
    if (b > a) sum += PchipSegmentIntegral(k, a, b);
  }
  return sum;
}

LogRateInterpolant FitLogRate(const RdCurve& curve, FitKind kind) {
  std::vector<RdPoint> pts = curve.points();
  std::stable_sort(pts.begin(), pts.end(),
                   [](const RdPoint& a, const RdPoint& b) { return a.value < b.value; });
  std::vector<double> values, log_rates;
  for (const auto& p : pts) {
    values.push_back(p.value);
    log_rates.push_back(std::log10(p.rate));
  }
  try {
    return kind == FitKind::kCubicPoly ? LogRateInterpolant::FitCubic(values, log_rates)
                                       : LogRateInterpolant::FitPchip(values, log_rates);
  } catch (const InputError& e) {
    throw InputError(fmt::format("curve {}/{} ({}): {}", curve.codec_id(),
                                 curve.metric_id(), ToString(kind), e.what()));
  }
}

RdCurve EnforceMonotonicity(const RdCurve& curve, MonotonicityPolicy policy,
                            std::vector<std::string>* warnings) {
  const auto& pts = curve.points();
  const int direction = Sign(pts.back().value - pts.front().value);
  bool monotone = direction != 0;
  for (std::size_t i = 1; monotone && i < pts.size(); ++i) {
    if (Sign(pts[i].value - pts[i - 1].value) != direction) monotone = false;
  }
  if (monotone) return curve;
  if (policy == MonotonicityPolicy::kStrict || direction == 0) {
    throw InputError(fmt::format(
        "curve {}/{} ({}) is not strictly monotone in rate; rerun with the "
        "prune policy to drop violating points",
        curve.codec_id(), curve.metric_id(), ToString(curve.gt_mode())));
  }
  std::vector<RdPoint> kept{pts.back()};
  for (std::size_t i = pts.size() - 1; i-- > 0;) {
    if (Sign(kept.back().value - pts[i].value) == direction) {
      kept.push_back(pts[i]);
    } else if (warnings) {
      warnings->push_back(fmt::format(
          "curve {}/{} ({}): pruned non-monotone point qp {} (rate {}, value {})",
          curve.codec_id(), curve.metric_id(), ToString(curve.gt_mode()), pts[i].qp,
          pts[i].rate, pts[i].value));
    }
  }
  return RdCurve(curve.codec_id(), curve.metric_id(), curve.gt_mode(),
                 std::move(kept));
}

nlohmann::json BdResult::ToJson() const {
  return {{"bd_rate_percent", bd_rate_percent},
          {"overlap", {overlap_low, overlap_high}},
          {"fit_kind", ToString(fit_kind)},
          {"warnings", warnings}};
}

FitKind DefaultFitKind(std::size_t anchor_points, std::size_t test_points) {
  return anchor_points == 4 && test_points == 4 ? FitKind::kCubicPoly
                                                : FitKind::kPchip;
}

BdResult BdRate(const RdCurve& anchor, const RdCurve& test,
                const BdOptions& options) {
  if (anchor.metric_id() != test.metric_id() || anchor.gt_mode() != test.gt_mode()) {
    throw InputError(fmt::format(
        "cannot compare curves of different metric or GT mode ({}/{} vs {}/{})",
        anchor.metric_id(), ToString(anchor.gt_mode()), test.metric_id(),
        ToString(test.gt_mode())));
  }
  BdResult result;
  const RdCurve a = EnforceMonotonicity(anchor, options.monotonicity, &result.warnings);
  const RdCurve b = EnforceMonotonicity(test, options.monotonicity, &result.warnings);
  const bool pruned = a.size() != anchor.size() || b.size() != test.size();

  FitKind kind = options.fit.value_or(DefaultFitKind(anchor.size(), test.size()));
  if (kind == FitKind::kCubicPoly && pruned && (a.size() < 4 || b.size() < 4)) {
    result.warnings.push_back(
        "fewer than 4 points remain after pruning; falling back to pchip");
    kind = FitKind::kPchip;
  }
  result.fit_kind = kind;

  const LogRateInterpolant fa = FitLogRate(a, kind);
  const LogRateInterpolant fb = FitLogRate(b, kind);
  result.overlap_low = std::max(fa.domain_min(), fb.domain_min());
  result.overlap_high = std::min(fa.domain_max(), fb.domain_max());
  if (!(result.overlap_high > result.overlap_low)) {
    throw UndefinedMetricError(fmt::format(
        "BD-rate undefined for {} ({}): metric ranges of {} and {} do not overlap",
        anchor.metric_id(), ToString(anchor.gt_mode()), anchor.codec_id(),
        test.codec_id()));
  }
  const double width = result.overlap_high - result.overlap_low;
  const double delta = (fb.Integrate(result.overlap_low, result.overlap_high) -
                        fa.Integrate(result.overlap_low, result.overlap_high)) /
                       width;
  result.bd_rate_percent = (std::pow(10.0, delta) - 1.0) * 100.0;
  return result;
}

double BdDiff(double true_bdr, double pseudo_bdr) { return true_bdr - pseudo_bdr; }

double BdDiff(const BdResult& true_result, const BdResult& pseudo_result) {
  return BdDiff(true_result.bd_rate_percent, pseudo_result.bd_rate_percent);
}

namespace {

std::string ShortestDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T ParseNumber(const std::string& field, std::size_t line) {
  T v{};
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw InputError(fmt::format("curve CSV line {}: cannot parse '{}'", line, field));
  }
  return v;
}

}  // namespace

std::string CurveToCsv(const RdCurve& curve) {
  std::string out = "qp,rate,value\n";
  for (const auto& p : curve.points()) {
    out += fmt::format("{},{},{}\n", p.qp, ShortestDouble(p.rate),
                       ShortestDouble(p.value));
  }
  return out;
}

RdCurve ParseCurveCsv(std::string_view text, std::string codec_id,
                      std::string metric_id, GtMode gt_mode) {
  std::vector<RdPoint> points;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = Trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(Trim(std::string_view(line).substr(
          start, comma == std::string::npos ? std::string::npos : comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!header_seen) {
      header_seen = true;
      if (fields.size() != 3 || fields[0] != "qp" || fields[1] != "rate" ||
          fields[2] != "value") {
        throw InputError("curve CSV must start with header 'qp,rate,value'");
      }
      continue;
    }
    if (fields.size() != 3) {
      throw InputError(fmt::format("curve CSV line {}: expected 3 columns", line_no));
    }
    points.push_back({ParseNumber<int>(fields[0], line_no),
                      ParseNumber<double>(fields[1], line_no),
                      ParseNumber<double>(fields[2], line_no)});
  }
  return RdCurve(std::move(codec_id), std::move(metric_id), gt_mode,
                 std::move(points));
}

RdCurve ReadCurveCsv(const std::filesystem::path& path, std::string codec_id,
                     std::string metric_id, GtMode gt_mode) {
  try {
    return ParseCurveCsv(ReadTextFile(path), std::move(codec_id),
                         std::move(metric_id), gt_mode);
  } catch (const InputError& e) {
    throw InputError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace vcm
