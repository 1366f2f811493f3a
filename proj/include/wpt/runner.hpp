#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "wpt/config.hpp"
#include "wpt/diagnostics.hpp"
#include "wpt/io.hpp"
#include "wpt/tempering.hpp"

namespace wpt {

// Target, context, ladder and pseudo-prior assembled from a config.
struct Experiment {
  std::shared_ptr<const MixtureTarget> mixture;
  std::shared_ptr<const HatContext> ctx;  // may be null
  std::shared_ptr<const TemperedTarget> target;
  TemperatureLadder ladder;
  Eigen::VectorXd log_k;  // per level; zeros when unused (PT)
  bool is_pt = false;     // PT / HAT drive pt_sweep, ST / HAST drive st_sweep
};

Experiment build_experiment(const ExperimentConfig& cfg);

struct RunOutput {
  ChainTrace trace;
  RunSummary summary;
};

// One replicate; replicate r uses seed cfg.seed + r. When out_dir is
// non-empty, writes trace_rep<r>.csv, summary_rep<r>.json, series_rep<r>.csv.
RunOutput run_replicate(const ExperimentConfig& cfg, int replicate,
                        const std::string& out_dir = "");

// All replicates (parallel across replicates up to WPT_THREADS) plus the
// manifest. Returns the summaries in replicate order.
std::vector<RunSummary> run_all_replicates(const ExperimentConfig& cfg,
                                           const std::string& out_dir);

// Table-1/Table-2 shaped report grouped per driver from a directory of
// summary_*.json files.
nlohmann::json build_report(const std::string& runs_dir);

int thread_budget();  // WPT_THREADS, default 1

}  // namespace wpt
