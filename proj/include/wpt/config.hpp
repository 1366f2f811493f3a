#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wpt/diagnostics.hpp"
#include "wpt/samplers.hpp"
#include "wpt/tempering.hpp"

namespace wpt {

struct LadderSpec {
  std::string kind = "geometric";  // geometric | explicit | eqn_beta
  int levels = 2;
  double ratio = 0.5;
  std::vector<double> betas;  // explicit
  double ell0 = 2.38;         // eqn_beta
  double beta_min = 0.01;     // eqn_beta
};

struct InitSpec {
  enum class Kind { Default, Component, Explicit };
  Kind kind = Kind::Default;
  int component = 0;
  std::vector<double> x;
};

struct ExperimentConfig {
  std::string name = "experiment";
  nlohmann::json target;  // inline mixture document (file references resolved at load)
  std::string driver = "ST";  // ST | PT | HAST | HAT
  std::string temper_kind = "power";
  std::string g_variant = "canonical";
  LadderSpec ladder;
  KernelConfig kernel;
  long s = 1000;
  int m = 1;
  long burn_in = 0;
  int replicates = 1;
  std::uint64_t seed = 1;
  std::optional<RegionPredicate> region;
  InitSpec init;
  std::string trace_levels = "cold";  // PT: cold | all
  std::string pseudo_prior = "analytic";  // analytic | estimate | zero
  std::optional<std::vector<std::vector<double>>> mode_points;
  int threads_within = 1;
  int swap_proposals_per_sweep = 1;
  std::string swap_schedule = "uniform";  // uniform | scan
  long pre_tune_sweeps = 0;  // unrecorded adaptation sweeps before the run

  static ExperimentConfig from_json(const nlohmann::json& doc, const std::string& base_dir);
  static ExperimentConfig load(const std::string& path);

  // All validation problems at once; empty means runnable.
  std::vector<std::string> validate() const;

  // Semantic fields only, defaults materialised; equal configs hash equal.
  nlohmann::json canonical() const;
  std::string hash() const;
};

}  // namespace wpt
