#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "wpt/mixture.hpp"
#include "wpt/tempering.hpp"

namespace wpt {

// Indicator region lo < x[coordinate] < hi for the running weight estimator.
struct RegionPredicate {
  double lo = 0.0;
  double hi = 0.0;
  int coordinate = 0;
  bool operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return x[coordinate] > lo && x[coordinate] < hi;
  }
};

// Temperature trace functional: sgn(x_bar) * log(beta/beta_min) / log(1/beta_min);
// magnitude 1 at the cold level, 0 at the hottest.
double trace_functional(double beta_t, double x_bar_t, double beta_min);

// Cumulative mean of the region indicator over post-burn-in cold-level rows,
// one value per row. burn_in counts cold-level rows.
std::vector<double> running_weight(const ChainTrace& trace, const RegionPredicate& region,
                                   long burn_in);

struct BatchMeans {
  double mean = 0.0;
  double per_run_sd = 0.0;   // sample SD across replicate endpoints
  double pooled_sd = 0.0;    // per_run_sd / sqrt(R)
};
BatchMeans batch_means_sd(const std::vector<double>& final_estimates);

// Per-adjacent-pair acceptance rates; empty optional when a pair was never
// proposed. Single-level ladders give an empty table.
std::vector<std::optional<double>> swap_rate_table(const ChainTrace& trace);

// Fraction of cold-level rows assigned to each mode at beta = 1.
Eigen::VectorXd mode_occupancy(const ChainTrace& trace, const HatContext& ctx);

// Per-run results shipped to summary JSON and the report command.
struct RunSummary {
  std::string driver;
  std::string temper_kind;
  int replicate = 0;
  std::uint64_t seed = 0;
  long rows = 0;
  double runtime_seconds = 0.0;
  double final_weight = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> swap_rates;     // NaN entries for never-proposed pairs
  double mean_swap_rate = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> mode_occupancy;
  std::vector<double> kernel_accept;  // per level
  std::string config_hash;
};

}  // namespace wpt
