#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wpt/config.hpp"
#include "wpt/diagnostics.hpp"
#include "wpt/tempering.hpp"

namespace wpt {

// Streams trace rows to CSV with the pinned column set
//   sweep,level,beta,x_0..x_{d-1},mode,accepted
// flushing every 10^4 rows so long runs stay inspectable mid-flight.
class TraceCsvWriter {
 public:
  TraceCsvWriter(const std::string& path, int dim);
  // Appends any rows not yet written.
  void sync(const ChainTrace& trace);
  void close();

 private:
  std::ofstream out_;
  int dim_;
  long written_ = 0;
  long since_flush_ = 0;
};

nlohmann::json summary_to_json(const RunSummary& s);
RunSummary summary_from_json(const nlohmann::json& j);
void write_summary(const RunSummary& s, const std::string& path);
RunSummary read_summary(const std::string& path);

// Subsampled running-weight series (iteration, estimate) for plotting.
void write_series_csv(const std::vector<double>& series, long burn_in, long stride,
                      const std::string& path);

void write_manifest(const ExperimentConfig& cfg, const std::vector<std::string>& outputs,
                    const std::string& path);
nlohmann::json read_manifest(const std::string& path);

std::vector<RunSummary> read_summaries_dir(const std::string& dir);

}  // namespace wpt
