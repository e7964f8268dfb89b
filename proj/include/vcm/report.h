#ifndef VCM_REPORT_H_
#define VCM_REPORT_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vcm/bd_metrics.h"
#include "vcm/orchestrator.h"
#include "vcm/plan.h"
#include "vcm/result_store.h"

namespace vcm {

struct BdrRow {
  std::string label;
  std::string metric_id;
  std::string model_id;
  std::optional<double> true_bdr;
  std::optional<double> pseudo_bdr;
  // true - pseudo; present iff both BDRs are.
  std::optional<double> diff;
  std::optional<FitKind> true_fit;
  std::optional<FitKind> pseudo_fit;
  // Curve assembly or BDR errors, one per failed mode.
  std::vector<std::string> errors;
  // Set when the rendered diff differs from the difference of the rendered
  // BDRs.
  bool footnote = false;
};

struct BdrTable {
  std::string anchor;
  std::string test;
  std::vector<int> qp_ladder;
  std::vector<BdrRow> rows;
};

// A table row request.
struct MetricEntry {
  std::string metric_id;
  std::string model_id;
  std::string label;
};

// Fills diff and footnote from the two BDRs.
BdrRow MakeBdrRow(std::string label, std::optional<double> true_bdr,
                  std::optional<double> pseudo_bdr);

// Display name, e.g. "miou" -> "mIoU".
std::string MetricLabel(const std::string& metric_id);
// Quality metrics first, then every model metric, in plan order.
std::vector<MetricEntry> PlanMetricEntries(const ExperimentPlan& plan);

// Pixel-fidelity rows never get a pseudo column. Errors are recorded on
// the row, not thrown.
BdrTable BuildBdrTable(const ResultStore& store, const std::string& anchor,
                       const std::string& test, std::span<const MetricEntry> metrics,
                       std::span<const GtMode> modes, const BdOptions& options = {});

// Fixed two-decimal rendering; "-" for absent values; never "-0.00".
std::string FormatPercent(std::optional<double> v);
// Four decimals for metric values.
std::string FormatValue(double v);

std::string TableToCsv(const BdrTable& table);
nlohmann::json TableToJson(const BdrTable& table);
std::string TableToText(const BdrTable& table);

// Plot data: columns codec_id,gt_mode,qp,rate,value (rate 6 decimals,
// value 4 decimals).
std::string CurvesToCsv(std::span<const RdCurve> curves);
nlohmann::json CurvesToJson(std::span<const RdCurve> curves);
// One polyline per curve, axes, axis labels, legend. `rate_unit` is "bpp"
// or "kbit/s".
std::string CurvesToSvg(std::span<const RdCurve> curves, const std::string& rate_unit,
                        const std::string& title);

struct PocSeries {
  std::string label;
  std::vector<PocPoint> points;
};
// Columns series,poc,value.
std::string PocToCsv(std::span<const PocSeries> series);
std::string PocToSvg(std::span<const PocSeries> series, const std::string& metric_id,
                     const std::string& title);

enum class ExportFormat { kCsv, kJson, kSvg };
ExportFormat ParseExportFormat(std::string_view s);
// Throws ConfigError for SVG tables and vcm::Error for unwritable paths.
void Export(const BdrTable& table, ExportFormat format, const std::filesystem::path& path);
void Export(std::span<const RdCurve> curves, ExportFormat format,
            const std::filesystem::path& path, const std::string& rate_unit = "bpp");

struct ReportFiles {
  std::vector<std::filesystem::path> written;
  std::vector<BdrTable> tables;
};

// Writes every BDR table (first codec is the anchor), curve set, and per-POC
// series of a completed run under `out_dir`.
ReportFiles WriteReport(const ResultStore& store, const ExperimentPlan& plan,
                        const std::filesystem::path& out_dir);

}  // namespace vcm

#endif  // VCM_REPORT_H_
