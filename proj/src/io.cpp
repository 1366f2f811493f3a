#include "wpt/io.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <stdexcept>

namespace wpt {

namespace fs = std::filesystem;
using nlohmann::json;

TraceCsvWriter::TraceCsvWriter(const std::string& path, int dim) : dim_(dim) {
  out_.open(path);
  if (!out_) throw std::runtime_error("cannot open trace file for writing: " + path);
  out_ << "sweep,level,beta";
  for (int i = 0; i < dim; ++i) out_ << ",x_" << i;
  out_ << ",mode,accepted\n";
}

void TraceCsvWriter::sync(const ChainTrace& trace) {
  out_ << std::setprecision(17);
  for (long i = written_; i < trace.rows(); ++i) {
    out_ << trace.sweep(i) << ',' << trace.level(i) << ',' << trace.beta(i);
    const auto x = trace.x(i);
    for (int c = 0; c < dim_; ++c) out_ << ',' << x[c];
    out_ << ',' << trace.mode(i) << ',' << (trace.accepted(i) ? 1 : 0) << '\n';
    if (++since_flush_ >= 10000) {
      out_.flush();
      since_flush_ = 0;
    }
  }
  written_ = trace.rows();
}

void TraceCsvWriter::close() {
  out_.flush();
  out_.close();
}

json summary_to_json(const RunSummary& s) {
  json j{{"driver", s.driver},
         {"temper_kind", s.temper_kind},
         {"replicate", s.replicate},
         {"seed", s.seed},
         {"rows", s.rows},
         {"runtime_seconds", s.runtime_seconds},
         {"swap_rates", json::array()},
         {"mode_occupancy", s.mode_occupancy},
         {"kernel_accept", s.kernel_accept},
         {"config_hash", s.config_hash}};
  for (double r : s.swap_rates) {
    if (std::isnan(r)) j["swap_rates"].push_back(nullptr);
    else j["swap_rates"].push_back(r);
  }
  if (!std::isnan(s.final_weight)) j["final_weight"] = s.final_weight;
  if (!std::isnan(s.mean_swap_rate)) j["mean_swap_rate"] = s.mean_swap_rate;
  return j;
}

RunSummary summary_from_json(const json& j) {
  RunSummary s;
  s.driver = j.value("driver", std::string());
  s.temper_kind = j.value("temper_kind", std::string());
  s.replicate = j.value("replicate", 0);
  s.seed = j.value("seed", std::uint64_t{0});
  s.rows = j.value("rows", 0L);
  s.runtime_seconds = j.value("runtime_seconds", 0.0);
  s.final_weight = j.value("final_weight", std::numeric_limits<double>::quiet_NaN());
  s.mean_swap_rate = j.value("mean_swap_rate", std::numeric_limits<double>::quiet_NaN());
  if (j.contains("swap_rates")) {
    for (const auto& v : j.at("swap_rates")) {
      s.swap_rates.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                         : v.get<double>());
    }
  }
  s.mode_occupancy = j.value("mode_occupancy", std::vector<double>{});
  s.kernel_accept = j.value("kernel_accept", std::vector<double>{});
  s.config_hash = j.value("config_hash", std::string());
  return s;
}

void write_summary(const RunSummary& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open summary file for writing: " + path);
  out << summary_to_json(s).dump(2) << '\n';
}

RunSummary read_summary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open summary file: " + path);
  return summary_from_json(json::parse(in));
}

void write_series_csv(const std::vector<double>& series, long burn_in, long stride,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open series file for writing: " + path);
  out << "iteration,estimate\n" << std::setprecision(12);
  for (size_t i = 0; i < series.size(); i += static_cast<size_t>(stride)) {
    out << (burn_in + static_cast<long>(i) + 1) << ',' << series[i] << '\n';
  }
  if (!series.empty() && (series.size() - 1) % static_cast<size_t>(stride) != 0) {
    out << (burn_in + static_cast<long>(series.size())) << ',' << series.back() << '\n';
  }
}

void write_manifest(const ExperimentConfig& cfg, const std::vector<std::string>& outputs,
                    const std::string& path) {
  json j{{"config", cfg.canonical()},
         {"config_hash", cfg.hash()},
         {"name", cfg.name},
         {"seed", cfg.seed},
         {"replicates", cfg.replicates},
         {"outputs", outputs}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open manifest for writing: " + path);
  out << j.dump(2) << '\n';
}

json read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  return json::parse(in);
}

std::vector<RunSummary> read_summaries_dir(const std::string& dir) {
  std::vector<RunSummary> out;
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("summary", 0) == 0 && e.path().extension() == ".json") {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& p : files) out.push_back(read_summary(p.string()));
  return out;
}

}  // namespace wpt
