#include "wpt/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

#include "wpt/tempered.hpp"

namespace wpt {

double trace_functional(double beta_t, double x_bar_t, double beta_min) {
  if (!(beta_min > 0.0 && beta_min < 1.0)) {
    throw std::invalid_argument("trace_functional: beta_min must lie in (0,1)");
  }
  if (beta_t < beta_min - 1e-12 || beta_t > 1.0 + 1e-12) {
    throw std::invalid_argument("trace_functional: beta_t outside [beta_min, 1]");
  }
  const double sign = x_bar_t > 0.0 ? 1.0 : (x_bar_t < 0.0 ? -1.0 : 0.0);
  return std::log(beta_t / beta_min) / std::log(1.0 / beta_min) * sign;
}

std::vector<double> running_weight(const ChainTrace& trace, const RegionPredicate& region,
                                   long burn_in) {
  std::vector<double> series;
  long seen = 0;
  double sum = 0.0;
  for (long i = 0; i < trace.rows(); ++i) {
    if (trace.level(i) != 0) continue;
    ++seen;
    if (seen <= burn_in) continue;
    sum += region(trace.x(i)) ? 1.0 : 0.0;
    series.push_back(sum / static_cast<double>(seen - burn_in));
  }
  if (series.empty()) {
    throw std::runtime_error("running_weight: no cold-level rows after burn-in");
  }
  return series;
}

BatchMeans batch_means_sd(const std::vector<double>& final_estimates) {
  const size_t r = final_estimates.size();
  if (r < 2) throw std::invalid_argument("batch_means_sd: need at least 2 replicates");
  BatchMeans out;
  double s = 0.0;
  for (double v : final_estimates) s += v;
  out.mean = s / static_cast<double>(r);
  double ss = 0.0;
  for (double v : final_estimates) ss += (v - out.mean) * (v - out.mean);
  out.per_run_sd = std::sqrt(ss / static_cast<double>(r - 1));
  out.pooled_sd = out.per_run_sd / std::sqrt(static_cast<double>(r));
  return out;
}

std::vector<std::optional<double>> swap_rate_table(const ChainTrace& trace) {
  std::vector<std::optional<double>> rates;
  const auto& st = trace.swap_stats;
  for (size_t k = 0; k < st.proposed.size(); ++k) {
    if (st.proposed[k] == 0) {
      rates.emplace_back(std::nullopt);
    } else {
      rates.emplace_back(static_cast<double>(st.accepted[k]) /
                         static_cast<double>(st.proposed[k]));
    }
  }
  return rates;
}

Eigen::VectorXd mode_occupancy(const ChainTrace& trace, const HatContext& ctx) {
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(ctx.size());
  long n = 0;
  for (long i = 0; i < trace.rows(); ++i) {
    if (trace.level(i) != 0) continue;
    counts[mode_assign(ctx, trace.x(i), 1.0)] += 1.0;
    ++n;
  }
  if (n == 0) return counts;
  return counts / static_cast<double>(n);
}

}  // namespace wpt
