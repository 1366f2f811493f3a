#include <CLI11.hpp>

#include <Eigen/Dense>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "wpt/config.hpp"
#include "wpt/diffusion.hpp"
#include "wpt/io.hpp"
#include "wpt/numeric.hpp"
#include "wpt/runner.hpp"
#include "wpt/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitCheckFailed = 3;

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::uint64_t seed_override, bool has_seed, long s_override, bool has_s) {
  wpt::ExperimentConfig cfg;
  try {
    cfg = wpt::ExperimentConfig::load(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  if (has_seed) cfg.seed = seed_override;
  if (has_s) cfg.s = s_override;
  const auto errors = cfg.validate();
  if (!errors.empty()) {
    std::cerr << "invalid config (" << errors.size() << " problem"
              << (errors.size() == 1 ? "" : "s") << "):\n";
    for (const auto& e : errors) std::cerr << "  - " << e << "\n";
    return kExitValidation;
  }
  try {
    const auto summaries = wpt::run_all_replicates(cfg, out_dir);
    for (const auto& s : summaries) {
      std::cout << cfg.name << " rep " << s.replicate << ": rows=" << s.rows;
      if (!std::isnan(s.final_weight)) std::cout << " final_weight=" << s.final_weight;
      if (!std::isnan(s.mean_swap_rate)) std::cout << " mean_swap_rate=" << s.mean_swap_rate;
      std::cout << " runtime=" << s.runtime_seconds << "s\n";
    }
    if (!out_dir.empty()) std::cout << "outputs in " << out_dir << "\n";
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_verify(const std::string& filter) {
  std::vector<wpt::CheckResult> results;
  try {
    results = wpt::run_verify_checks(filter);
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  bool all_pass = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << "\n";
    all_pass = all_pass && r.pass;
  }
  if (results.empty()) {
    std::cerr << "no checks matched filter \"" << filter << "\"\n";
    return kExitValidation;
  }
  return all_pass ? kExitOk : kExitCheckFailed;
}

int cmd_report(const std::string& runs_dir, const std::string& out_path) {
  try {
    const json report = wpt::build_report(runs_dir);
    if (out_path.empty()) {
      std::cout << report.dump(2) << "\n";
    } else {
      std::ofstream out(out_path);
      if (!out) throw std::runtime_error("cannot open " + out_path);
      out << report.dump(2) << "\n";
      std::cout << "report written to " << out_path << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_diffusion(const std::string& config_path, const std::string& out_dir) {
  json doc;
  try {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open " + config_path);
    doc = json::parse(in);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  try {
    wpt::SimplifiedConfig cfg;
    cfg.d = doc.value("d", 100);
    cfg.p = doc.value("p", 0.5);
    cfg.r1 = doc.value("r1", 2.0);
    cfg.r2 = doc.value("r2", 2.0);
    cfg.ell0 = doc.value("ell0", 2.38);
    cfg.beta_min = doc.value("beta_min", 0.01);
    cfg.rule = doc.value("beta_min_rule", std::string("fixed")) == "inverse_d_squared"
                   ? wpt::SimplifiedConfig::BetaMinRule::InverseDSquared
                   : wpt::SimplifiedConfig::BetaMinRule::Fixed;
    const auto d_values = doc.value("d_values", std::vector<int>{25, 100, 400});
    const int replicates = doc.value("replicates", 100);
    const std::uint64_t seed = doc.value("seed", std::uint64_t{1});

    fs::create_directories(out_dir);
    std::ofstream hits((fs::path(out_dir) / "hitting_times.csv").string());
    hits << "d,replicate,hitting_time\n";
    wpt::RngStream rng(seed);

    wpt::ScalingFit fit;
    fit.d_values = d_values;
    for (int d : d_values) {
      wpt::SimplifiedConfig c = cfg;
      c.d = d;
      double sum = 0.0;
      for (int rep = 0; rep < replicates; ++rep) {
        const long t = wpt::simplified_hitting_time(c, 200000000L, rng);
        hits << d << ',' << rep << ',' << t << "\n";
        sum += static_cast<double>(t);
      }
      fit.mean_hit.push_back(sum / replicates);
    }
    json summary{{"d_values", d_values},
                 {"replicates", replicates},
                 {"mean_hitting_times", fit.mean_hit},
                 {"beta_min_rule",
                  cfg.rule == wpt::SimplifiedConfig::BetaMinRule::Fixed ? "fixed"
                                                                        : "inverse_d_squared"}};
    if (cfg.rule == wpt::SimplifiedConfig::BetaMinRule::Fixed && d_values.size() >= 3) {
      Eigen::VectorXd lx(static_cast<Eigen::Index>(d_values.size()));
      Eigen::VectorXd ly(static_cast<Eigen::Index>(d_values.size()));
      for (size_t i = 0; i < d_values.size(); ++i) {
        lx[static_cast<Eigen::Index>(i)] = std::log(static_cast<double>(d_values[i]));
        ly[static_cast<Eigen::Index>(i)] = std::log(fit.mean_hit[i]);
      }
      const auto line = wpt::fit_line(lx, ly);
      summary["loglog_slope"] = line.slope;
      summary["r2"] = line.r2;
    } else if (cfg.rule == wpt::SimplifiedConfig::BetaMinRule::InverseDSquared) {
      std::vector<double> scaled;
      for (size_t i = 0; i < d_values.size(); ++i) {
        const double d = static_cast<double>(d_values[i]);
        scaled.push_back(fit.mean_hit[i] / (d * std::log(d) * std::log(d)));
      }
      summary["scaled_hitting_times"] = scaled;
    }
    std::ofstream sj((fs::path(out_dir) / "fit_summary.json").string());
    sj << summary.dump(2) << "\n";
    std::cout << summary.dump(2) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_tune_ladder(const std::string& config_path, double target_swap, int levels) {
  wpt::ExperimentConfig cfg;
  try {
    cfg = wpt::ExperimentConfig::load(config_path);
    const auto errors = cfg.validate();
    if (!errors.empty()) {
      std::cerr << "invalid config:\n";
      for (const auto& e : errors) std::cerr << "  - " << e << "\n";
      return kExitValidation;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  try {
    const wpt::Experiment exp = wpt::build_experiment(cfg);
    wpt::TemperatureLadder init = exp.ladder;
    if (levels > 1 && levels != init.levels()) {
      init = wpt::geometric_ladder(levels, 0.5);
    }
    wpt::RngStream rng(cfg.seed, 0x7D);
    const auto result =
        wpt::tune_ladder(*exp.target, cfg.kernel, target_swap, init, rng, {});
    if (!result.converged) {
      std::cerr << "warning: tuning hit the iteration cap; emitting best-effort ladder\n";
    }
    json out{{"converged", result.converged},
             {"betas", std::vector<double>(result.ladder.betas.data(),
                                           result.ladder.betas.data() + result.ladder.levels())},
             {"pair_acceptance", result.rates}};
    std::cout << out.dump(2) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wpt: weight-preserving simulated and parallel tempering"};
  app.require_subcommand(1);

  std::string config_path, out_dir, filter, runs_dir, out_path;
  std::uint64_t seed = 0;
  long s_override = 0;
  double target_swap = 0.234;
  int levels = 0;

  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("--config", config_path, "experiment JSON")->required();
  run->add_option("--out", out_dir, "output directory");
  auto* seed_opt = run->add_option("--seed", seed, "override config seed");
  auto* s_opt = run->add_option("--s", s_override, "override sweep count");

  auto* verify = app.add_subcommand("verify", "run the analytic/quadrature check suite");
  verify->add_option("--filter", filter, "substring filter on check names");

  auto* report = app.add_subcommand("report", "aggregate run summaries into tables");
  report->add_option("--runs", runs_dir, "directory of summary_*.json files")->required();
  report->add_option("--out", out_path, "write tables JSON here (stdout otherwise)");

  auto* diffusion = app.add_subcommand("diffusion", "simplified-process scaling runs");
  diffusion->add_option("--config", config_path, "diffusion JSON")->required();
  diffusion->add_option("--out", out_dir, "output directory")->required();

  auto* tune = app.add_subcommand("tune-ladder", "Robbins-Monro spacing adaptation");
  tune->add_option("--config", config_path, "experiment JSON (target + kernel)")->required();
  tune->add_option("--target-swap", target_swap, "per-pair acceptance target");
  tune->add_option("--levels", levels, "override level count");

  CLI11_PARSE(app, argc, argv);

  if (*run) return cmd_run(config_path, out_dir, seed, seed_opt->count() > 0, s_override,
                           s_opt->count() > 0);
  if (*verify) return cmd_verify(filter);
  if (*report) return cmd_report(runs_dir, out_path);
  if (*diffusion) return cmd_diffusion(config_path, out_dir);
  if (*tune) return cmd_tune_ladder(config_path, target_swap, levels);
  return kExitValidation;
}
