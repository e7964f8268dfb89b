#include "vcm/report.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "vcm/error.h"
#include "vcm/image.h"
#include "vcm/log.h"

namespace vcm {

namespace fs = std::filesystem;
using nlohmann::json;

std::string FormatPercent(std::optional<double> v) {
  if (!v) return "-";
  std::string s = fmt::format("{:.2f}", *v);
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string FormatValue(double v) {
  std::string s = fmt::format("{:.4f}", v);
  if (s == "-0.0000") s = "0.0000";
  return s;
}

BdrRow MakeBdrRow(std::string label, std::optional<double> true_bdr,
                  std::optional<double> pseudo_bdr) {
  BdrRow row;
  row.label = std::move(label);
  row.true_bdr = true_bdr;
  row.pseudo_bdr = pseudo_bdr;
  if (true_bdr && pseudo_bdr) {
    row.diff = BdDiff(*true_bdr, *pseudo_bdr);
    const double rounded_diff = std::stod(FormatPercent(true_bdr)) -
                                std::stod(FormatPercent(pseudo_bdr));
    row.footnote = FormatPercent(row.diff) != FormatPercent(rounded_diff);
  }
  return row;
}

std::string MetricLabel(const std::string& metric_id) {
  static const std::map<std::string, std::string> kNames = {
      {"miou", "mIoU"}, {"oacc", "oAcc"}, {"frwacc", "frwAcc"}, {"wap", "wAP"},
      {"map", "mAP"},   {"psnr", "PSNR"}, {"vmaf", "VMAF"}};
  const auto it = kNames.find(metric_id);
  return it == kNames.end() ? metric_id : it->second;
}

std::vector<MetricEntry> PlanMetricEntries(const ExperimentPlan& plan) {
  std::vector<MetricEntry> entries;
  for (const auto& m : plan.quality_metrics) entries.push_back({m, "", MetricLabel(m)});
  for (const auto& model : plan.models) {
    for (const auto& m : model.metrics) {
      entries.push_back({m, model.model_id, fmt::format("{} {}", model.label, MetricLabel(m))});
    }
  }
  return entries;
}

BdrTable BuildBdrTable(const ResultStore& store, const std::string& anchor,
                       const std::string& test, std::span<const MetricEntry> metrics,
                       std::span<const GtMode> modes, const BdOptions& options) {
  BdrTable table;
  table.anchor = anchor;
  table.test = test;
  if (store.has_layout()) table.qp_ladder = store.layout().qp_ladder;
  for (const auto& entry : metrics) {
    std::optional<double> bdr[2];
    std::optional<FitKind> fit[2];
    std::vector<std::string> errors;
    for (GtMode mode : modes) {
      if (IsQualityMetric(entry.metric_id) && mode == GtMode::kPseudoGt) continue;
      try {
        const RdCurve a = AssembleCurve(store, anchor, entry.metric_id, mode, entry.model_id);
        const RdCurve b = AssembleCurve(store, test, entry.metric_id, mode, entry.model_id);
        const BdResult r = BdRate(a, b, options);
        for (const auto& w : r.warnings) log::Warn("{} {}: {}", entry.label, ToString(mode), w);
        bdr[static_cast<int>(mode)] = r.bd_rate_percent;
        fit[static_cast<int>(mode)] = r.fit_kind;
      } catch (const Error& e) {
        errors.push_back(fmt::format("{}: {}", ToString(mode), e.what()));
      }
    }
    BdrRow row = MakeBdrRow(entry.label, bdr[0], bdr[1]);
    row.metric_id = entry.metric_id;
    row.model_id = entry.model_id;
    row.true_fit = fit[0];
    row.pseudo_fit = fit[1];
    row.errors = std::move(errors);
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace {

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string RowNote(const BdrRow& row) {
  std::string note;
  for (const auto& e : row.errors) note += (note.empty() ? "" : "; ") + e;
  if (row.footnote) {
    note += (note.empty() ? "" : "; ") +
            std::string("diff computed before rounding");
  }
  return note;
}

std::optional<double> Round2(std::optional<double> v) {
  if (!v) return std::nullopt;
  return std::stod(FormatPercent(v));
}

std::string XmlEscape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> xy;
};

std::string LinePlotSvg(const std::vector<Series>& series, const std::string& x_label,
                        const std::string& y_label, const std::string& title) {
  constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 170, kTop = 40, kBottom = 60;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.xy) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (1 - (y - y0) / (y1 - y0)) * ph; };
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

  std::string svg = fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{:.0f}\" "
      "height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{:.1f}\" y=\"22\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
      kW, kH, kW, kH, kLeft + pw / 2, XmlEscape(title));
  svg += fmt::format(
      "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n"
      "<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\"/>\n"
      "<line x1=\"{0:.1f}\" y1=\"{3:.1f}\" x2=\"{0:.1f}\" y2=\"{1:.1f}\"/>\n",
      kLeft, kTop + ph, kLeft + pw, kTop);
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
    svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{0:.1f}\" y2=\"{2:.1f}\"/>\n",
                       px(xv), kTop + ph, kTop + ph + 5);
    svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\"/>\n",
                       kLeft - 5, py(yv), kLeft);
  }
  svg += "</g>\n<g class=\"ticks\" font-size=\"10\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.4g}</text>\n",
                       px(xv), kTop + ph + 17, xv);
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.4g}</text>\n",
                       kLeft - 8, py(yv) + 3, yv);
  }
  svg += "</g>\n";
  svg += fmt::format(
      "<text class=\"x-label\" x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"12\" "
      "text-anchor=\"middle\">{}</text>\n",
      kLeft + pw / 2, kH - 15, XmlEscape(x_label));
  svg += fmt::format(
      "<text class=\"y-label\" x=\"18\" y=\"{0:.1f}\" font-size=\"12\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 18 {0:.1f})\">{1}</text>\n",
      kTop + ph / 2, XmlEscape(y_label));
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    std::string pts;
    for (const auto& [x, y] : series[i].xy) {
      pts += fmt::format("{}{:.2f},{:.2f}", pts.empty() ? "" : " ", px(x), py(y));
    }
    svg += fmt::format(
        "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n", color,
        pts);
    const double ly = kTop + 10 + 18 * static_cast<double>(i);
    svg += fmt::format(
        "<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"{3}\" "
        "stroke-width=\"2\"/>\n"
        "<text x=\"{4:.1f}\" y=\"{5:.1f}\" font-size=\"11\">{6}</text>\n",
        kW - kRight + 15, ly, kW - kRight + 35, color, kW - kRight + 40, ly + 4,
        XmlEscape(series[i].label));
  }
  svg += "</svg>\n";
  return svg;
}

std::string CurveLabel(const RdCurve& c) {
  return fmt::format("{} ({})", c.codec_id(), ToString(c.gt_mode()));
}

std::string Slug(const MetricEntry& e) {
  std::string s = e.model_id.empty() ? e.metric_id : e.metric_id + "_" + e.model_id;
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  }
  return s;
}

}  // namespace

std::string TableToCsv(const BdrTable& table) {
  std::string out = "metric,model,true_gt,pseudo_gt,diff,note\n";
  for (const auto& row : table.rows) {
    out += fmt::format("{},{},{},{},{},{}\n", CsvField(row.label),
                       CsvField(row.model_id.empty() ? "-" : row.model_id),
                       FormatPercent(row.true_bdr), FormatPercent(row.pseudo_bdr),
                       FormatPercent(row.diff), CsvField(RowNote(row)));
  }
  return out;
}

json TableToJson(const BdrTable& table) {
  json rows = json::array();
  auto num = [](std::optional<double> v) { return v ? json(*Round2(v)) : json(nullptr); };
  auto fit = [](std::optional<FitKind> f) {
    return f ? json(std::string(ToString(*f))) : json(nullptr);
  };
  for (const auto& row : table.rows) {
    rows.push_back({{"label", row.label},
                    {"metric_id", row.metric_id},
                    {"model_id", row.model_id},
                    {"true_gt", num(row.true_bdr)},
                    {"pseudo_gt", num(row.pseudo_bdr)},
                    {"diff", num(row.diff)},
                    {"fit_true_gt", fit(row.true_fit)},
                    {"fit_pseudo_gt", fit(row.pseudo_fit)},
                    {"errors", row.errors},
                    {"footnote", row.footnote}});
  }
  return {{"anchor", table.anchor},
          {"test", table.test},
          {"qp_ladder", table.qp_ladder},
          {"unit", "percent"},
          {"rows", rows}};
}

std::string TableToText(const BdrTable& table) {
  std::size_t width = 6;
  for (const auto& row : table.rows) width = std::max(width, row.label.size());
  std::string out = fmt::format("BD-rate of {} over {} [%]\n", table.test, table.anchor);
  out += fmt::format("{:<{}}  {:>9}  {:>9}  {:>7}\n", "Metric", width, "True GT", "Pseudo GT",
                     "Diff");
  bool any_footnote = false;
  for (const auto& row : table.rows) {
    out += fmt::format("{:<{}}  {:>9}  {:>9}  {:>7}{}\n", row.label, width,
                       FormatPercent(row.true_bdr), FormatPercent(row.pseudo_bdr),
                       FormatPercent(row.diff), row.footnote ? "*" : "");
    any_footnote |= row.footnote;
    for (const auto& e : row.errors) out += fmt::format("  ! {}\n", e);
  }
  if (any_footnote) out += "* diff computed before rounding\n";
  return out;
}

std::string CurvesToCsv(std::span<const RdCurve> curves) {
  std::string out = "codec_id,metric_id,gt_mode,qp,rate,value\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points()) {
      out += fmt::format("{},{},{},{},{:.6f},{}\n", CsvField(c.codec_id()), c.metric_id(),
                         ToString(c.gt_mode()), p.qp, p.rate, FormatValue(p.value));
    }
  }
  return out;
}

json CurvesToJson(std::span<const RdCurve> curves) {
  json out = json::array();
  for (const auto& c : curves) {
    json points = json::array();
    for (const auto& p : c.points()) {
      points.push_back({{"qp", p.qp}, {"rate", p.rate}, {"value", p.value}});
    }
    out.push_back({{"codec_id", c.codec_id()},
                   {"metric_id", c.metric_id()},
                   {"gt_mode", ToString(c.gt_mode())},
                   {"points", points}});
  }
  return out;
}

std::string CurvesToSvg(std::span<const RdCurve> curves, const std::string& rate_unit,
                        const std::string& title) {
  std::vector<Series> series;
  std::string metric;
  for (const auto& c : curves) {
    Series s{CurveLabel(c), {}};
    for (const auto& p : c.points()) s.xy.emplace_back(p.rate, p.value);
    series.push_back(std::move(s));
    metric = c.metric_id();
  }
  return LinePlotSvg(series, fmt::format("rate [{}]", rate_unit), MetricLabel(metric), title);
}

std::string PocToCsv(std::span<const PocSeries> series) {
  std::string out = "series,poc,value\n";
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      out += fmt::format("{},{},{}\n", CsvField(s.label), p.poc, FormatValue(p.value));
    }
  }
  return out;
}

std::string PocToSvg(std::span<const PocSeries> series, const std::string& metric_id,
                     const std::string& title) {
  std::vector<Series> plot;
  for (const auto& s : series) {
    Series out{s.label, {}};
    for (const auto& p : s.points) out.xy.emplace_back(p.poc, p.value);
    plot.push_back(std::move(out));
  }
  return LinePlotSvg(plot, "picture order count", MetricLabel(metric_id), title);
}

ExportFormat ParseExportFormat(std::string_view s) {
  if (s == "csv") return ExportFormat::kCsv;
  if (s == "json") return ExportFormat::kJson;
  if (s == "svg") return ExportFormat::kSvg;
  throw ConfigError(fmt::format("unknown export format '{}'", s));
}

void Export(const BdrTable& table, ExportFormat format, const fs::path& path) {
  switch (format) {
    case ExportFormat::kCsv:
      WriteFileAtomic(path, TableToCsv(table));
      return;
    case ExportFormat::kJson:
      WriteFileAtomic(path, TableToJson(table).dump(2) + "\n");
      return;
    case ExportFormat::kSvg:
      throw ConfigError("BD-rate tables have no SVG form");
  }
}

void Export(std::span<const RdCurve> curves, ExportFormat format, const fs::path& path,
            const std::string& rate_unit) {
  switch (format) {
    case ExportFormat::kCsv:
      WriteFileAtomic(path, curves.size() == 1 ? CurveToCsv(curves.front())
                                               : CurvesToCsv(curves));
      return;
    case ExportFormat::kJson:
      WriteFileAtomic(path, CurvesToJson(curves).dump(2) + "\n");
      return;
    case ExportFormat::kSvg:
      WriteFileAtomic(path, CurvesToSvg(curves, rate_unit,
                                        curves.empty() ? "" : MetricLabel(curves[0].metric_id())));
      return;
  }
}

ReportFiles WriteReport(const ResultStore& store, const ExperimentPlan& plan,
                        const fs::path& out_dir) {
  ReportFiles files;
  auto write = [&](const fs::path& path, std::string_view text) {
    WriteFileAtomic(path, text);
    files.written.push_back(path);
  };
  const auto entries = PlanMetricEntries(plan);
  BdOptions bd;
  bd.fit = plan.options.fit;
  bd.monotonicity = plan.options.monotonicity;
  const std::string& anchor = plan.codecs.front().codec_id;
  for (std::size_t i = 1; i < plan.codecs.size(); ++i) {
    const std::string& test = plan.codecs[i].codec_id;
    BdrTable table = BuildBdrTable(store, anchor, test, entries, plan.gt_modes, bd);
    const std::string stem = fmt::format("bdr_{}_vs_{}", test, anchor);
    write(out_dir / (stem + ".csv"), TableToCsv(table));
    write(out_dir / (stem + ".json"), TableToJson(table).dump(2) + "\n");
    write(out_dir / (stem + ".txt"), TableToText(table));
    files.tables.push_back(std::move(table));
  }

  const std::string rate_unit = plan.options.fps ? "kbit/s" : "bpp";
  for (const auto& entry : entries) {
    std::vector<RdCurve> curves;
    std::vector<PocSeries> poc;
    const int poc_qp = plan.qp_ladder.front();
    for (const auto& codec : plan.codecs) {
      for (GtMode mode : plan.gt_modes) {
        if (IsQualityMetric(entry.metric_id) && mode == GtMode::kPseudoGt) continue;
        try {
          curves.push_back(
              AssembleCurve(store, codec.codec_id, entry.metric_id, mode, entry.model_id));
          poc.push_back({fmt::format("{} ({})", codec.codec_id, ToString(mode)),
                         PerPocCurve(store, codec.codec_id, poc_qp, entry.metric_id,
                                     entry.model_id, mode)});
        } catch (const Error& e) {
          log::Warn("{} {} {}: {}", entry.label, codec.codec_id, ToString(mode), e.what());
        }
      }
    }
    if (curves.empty()) continue;
    const std::string slug = Slug(entry);
    write(out_dir / "curves" / (slug + ".csv"), CurvesToCsv(curves));
    write(out_dir / "curves" / (slug + ".json"), CurvesToJson(curves).dump(2) + "\n");
    write(out_dir / "curves" / (slug + ".svg"), CurvesToSvg(curves, rate_unit, entry.label));
    if (!poc.empty()) {
      const std::string name = fmt::format("{}_qp{}", slug, poc_qp);
      write(out_dir / "per_poc" / (name + ".csv"), PocToCsv(poc));
      write(out_dir / "per_poc" / (name + ".svg"),
            PocToSvg(poc, entry.metric_id, fmt::format("{} at QP {}", entry.label, poc_qp)));
    }
  }
  return files;
}

}  // namespace vcm
