#ifndef VCM_DEMO_H_
#define VCM_DEMO_H_

#include <filesystem>
#include <vector>

#include "json.hpp"
#include "vcm/orchestrator.h"
#include "vcm/plan.h"
#include "vcm/report.h"

namespace vcm {

struct DemoOptions {
  std::filesystem::path workdir = "demo";
  int jobs = 1;
  bool use_cache = true;
  int sequences = 3;
  int frames_per_sequence = 3;
  int width = 128;
  int height = 96;
};

struct DemoResult {
  ExperimentPlan plan;
  RunSummary summary;
  ReportFiles report;
  bool modes_symmetric = false;
  std::vector<std::string> asymmetric_cells;
};

// The demo plan: two mock codecs, CTC ladder, a semantic and an instance
// toy model, both GT modes. Paths are relative to the plan file.
nlohmann::json DemoPlanJson(const std::vector<FrameRef>& frames,
                            const std::filesystem::path& plan_dir);

// Renders the toy dataset into <workdir>/data, writes <workdir>/plan.json,
// runs the matrix with the toy predictor and writes <workdir>/report.
DemoResult RunDemo(const DemoOptions& options);

}  // namespace vcm

#endif  // VCM_DEMO_H_
