#include "wpt/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "wpt/mixture.hpp"
#include "wpt/tempered.hpp"

namespace wpt {

namespace fs = std::filesystem;
using nlohmann::json;

ExperimentConfig ExperimentConfig::from_json(const json& doc, const std::string& base_dir) {
  ExperimentConfig cfg;
  cfg.name = doc.value("name", std::string("experiment"));
  if (doc.contains("target")) {
    const auto& t = doc.at("target");
    if (t.is_string()) {
      fs::path p = t.get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
      std::ifstream in(p);
      if (!in) throw std::runtime_error("cannot open target file: " + p.string());
      cfg.target = json::parse(in);
    } else {
      cfg.target = t;
    }
  }
  cfg.driver = doc.value("driver", std::string("ST"));
  cfg.temper_kind = doc.value("temper_kind", std::string("power"));
  cfg.g_variant = doc.value("g_variant", std::string("canonical"));
  if (doc.contains("ladder")) {
    const auto& l = doc.at("ladder");
    cfg.ladder.kind = l.value("kind", std::string("geometric"));
    cfg.ladder.levels = l.value("levels", 2);
    cfg.ladder.ratio = l.value("ratio", 0.5);
    if (l.contains("betas")) cfg.ladder.betas = l.at("betas").get<std::vector<double>>();
    cfg.ladder.ell0 = l.value("ell0", 2.38);
    cfg.ladder.beta_min = l.value("beta_min", 0.01);
  }
  if (doc.contains("kernel")) {
    const auto& k = doc.at("kernel");
    const std::string kind = k.value("kind", std::string("rwm"));
    cfg.kernel.kind = kind == "modal_independence" ? KernelConfig::Kind::ModalIndependence
                                                   : KernelConfig::Kind::Rwm;
    cfg.kernel.scale = k.value("scale", 1.0);
    cfg.kernel.adapt = k.value("adapt", true);
    cfg.kernel.target_accept = k.value("target_accept", 0.234);
    cfg.kernel.exact_resample = k.value("exact_resample", false);
  }
  cfg.s = doc.value("s", 1000L);
  cfg.m = doc.value("m", 1);
  cfg.burn_in = doc.value("burn_in", 0L);
  cfg.replicates = doc.value("replicates", 1);
  cfg.seed = doc.value("seed", std::uint64_t{1});
  if (doc.contains("region")) {
    RegionPredicate r;
    r.lo = doc.at("region").value("lo", 0.0);
    r.hi = doc.at("region").value("hi", 0.0);
    r.coordinate = doc.at("region").value("coordinate", 0);
    cfg.region = r;
  }
  if (doc.contains("init")) {
    const auto& i = doc.at("init");
    if (i.contains("component")) {
      cfg.init.kind = InitSpec::Kind::Component;
      cfg.init.component = i.at("component").get<int>();
    } else if (i.contains("x")) {
      cfg.init.kind = InitSpec::Kind::Explicit;
      cfg.init.x = i.at("x").get<std::vector<double>>();
    }
  }
  cfg.trace_levels = doc.value("trace_levels", std::string("cold"));
  cfg.pseudo_prior = doc.value("pseudo_prior", std::string("analytic"));
  if (doc.contains("mode_points")) {
    cfg.mode_points = doc.at("mode_points").get<std::vector<std::vector<double>>>();
  }
  cfg.threads_within = doc.value("threads_within", 1);
  cfg.swap_proposals_per_sweep = doc.value("swap_proposals_per_sweep", 1);
  cfg.pre_tune_sweeps = doc.value("pre_tune_sweeps", 0L);
  cfg.swap_schedule = doc.value("swap_schedule", std::string("uniform"));
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json doc = json::parse(in);
  return from_json(doc, fs::path(path).parent_path().string());
}

std::vector<std::string> ExperimentConfig::validate() const {
  std::vector<std::string> errors;
  auto err = [&errors](const std::string& msg) { errors.push_back(msg); };

  int dim = -1;
  if (target.is_null()) {
    err("target: missing mixture specification");
  } else {
    try {
      MixtureTarget t = load_mixture_json(target.dump());
      dim = t.dimension();
    } catch (const std::exception& e) {
      err(std::string("target: ") + e.what());
    }
  }

  if (driver != "ST" && driver != "PT" && driver != "HAST" && driver != "HAT") {
    err("driver: must be one of ST, PT, HAST, HAT (got " + driver + ")");
  }
  try {
    const TemperKind k = temper_kind_from_string(temper_kind);
    if (k == TemperKind::TheoremB) {
      err("temper_kind: theorem_b is a verification-only construction, not a runnable target");
    }
    if ((driver == "HAST" || driver == "HAT") && k != TemperKind::Hat) {
      err("temper_kind: driver " + driver + " runs HAT targets; set temper_kind to \"hat\" or omit it");
    }
  } catch (const std::exception& e) {
    err(std::string("temper_kind: ") + e.what());
  }
  try {
    g_variant_from_string(g_variant);
  } catch (const std::exception& e) {
    err(std::string("g_variant: ") + e.what());
  }

  if (ladder.kind == "geometric") {
    if (ladder.levels < 1) err("ladder: levels must be >= 1");
    if (!(ladder.ratio > 0.0 && ladder.ratio < 1.0)) err("ladder: ratio must lie in (0,1)");
  } else if (ladder.kind == "explicit") {
    if (ladder.betas.empty()) {
      err("ladder: explicit ladder needs a betas array");
    } else {
      if (std::abs(ladder.betas.front() - 1.0) > 1e-14) err("ladder: beta_0 must be 1");
      for (size_t i = 0; i < ladder.betas.size(); ++i) {
        if (!(ladder.betas[i] > 0.0)) {
          err("ladder: all betas must be positive");
          break;
        }
        if (i > 0 && !(ladder.betas[i] < ladder.betas[i - 1])) {
          err("ladder: betas must be strictly decreasing");
          break;
        }
      }
    }
  } else if (ladder.kind == "eqn_beta") {
    if (!(ladder.ell0 > 0.0)) err("ladder: ell0 must be > 0");
    if (!(ladder.beta_min > 0.0 && ladder.beta_min < 1.0)) err("ladder: beta_min must lie in (0,1)");
    if (dim >= 0 && dim < 1) err("ladder: eqn_beta needs the target dimension");
  } else {
    err("ladder: unknown kind " + ladder.kind);
  }

  if (!(kernel.scale > 0.0)) err("kernel: scale must be > 0");
  if (!(kernel.target_accept > 0.0 && kernel.target_accept < 1.0)) {
    err("kernel: target_accept must lie in (0,1)");
  }

  if (s < 0) err("s: must be >= 0");
  if (m < 0) err("m: must be >= 0");
  if (burn_in < 0) err("burn_in: must be >= 0");
  if (replicates < 1) err("replicates: must be >= 1");
  if (threads_within < 1) err("threads_within: must be >= 1");
  if (swap_proposals_per_sweep < 1) err("swap_proposals_per_sweep: must be >= 1");
  if (pre_tune_sweeps < 0) err("pre_tune_sweeps: must be >= 0");
  if (swap_schedule != "uniform" && swap_schedule != "scan") {
    err("swap_schedule: must be \"uniform\" or \"scan\"");
  }

  if (region) {
    if (!(region->lo < region->hi)) err("region: lo must be < hi");
    if (dim > 0 && (region->coordinate < 0 || region->coordinate >= dim)) {
      err("region: coordinate out of range");
    }
  }
  if (init.kind == InitSpec::Kind::Explicit && dim > 0 &&
      static_cast<int>(init.x.size()) != dim) {
    err("init: x length != target dimension");
  }
  if (mode_points) {
    for (const auto& mp : *mode_points) {
      if (dim > 0 && static_cast<int>(mp.size()) != dim) {
        err("mode_points: entry length != target dimension");
        break;
      }
    }
  }
  if (trace_levels != "cold" && trace_levels != "all") {
    err("trace_levels: must be \"cold\" or \"all\"");
  }
  if (pseudo_prior != "analytic" && pseudo_prior != "estimate" && pseudo_prior != "zero") {
    err("pseudo_prior: must be analytic, estimate or zero");
  }
  return errors;
}

json ExperimentConfig::canonical() const {
  json l{{"kind", ladder.kind}};
  if (ladder.kind == "geometric") {
    l["levels"] = ladder.levels;
    l["ratio"] = ladder.ratio;
  } else if (ladder.kind == "explicit") {
    l["betas"] = ladder.betas;
  } else {
    l["ell0"] = ladder.ell0;
    l["beta_min"] = ladder.beta_min;
  }
  json k{{"kind", kernel.kind == KernelConfig::Kind::Rwm ? "rwm" : "modal_independence"},
         {"scale", kernel.scale},
         {"adapt", kernel.adapt},
         {"target_accept", kernel.target_accept},
         {"exact_resample", kernel.exact_resample}};
  json doc{{"target", target},
           {"driver", driver},
           {"temper_kind", temper_kind},
           {"g_variant", g_variant},
           {"ladder", l},
           {"kernel", k},
           {"s", s},
           {"m", m},
           {"burn_in", burn_in},
           {"replicates", replicates},
           {"seed", seed},
           {"trace_levels", trace_levels},
           {"swap_proposals_per_sweep", swap_proposals_per_sweep},
           {"pre_tune_sweeps", pre_tune_sweeps},
           {"swap_schedule", swap_schedule},
           {"pseudo_prior", pseudo_prior},
           {"threads_within", threads_within}};
  if (region) {
    doc["region"] = {{"lo", region->lo}, {"hi", region->hi}, {"coordinate", region->coordinate}};
  }
  if (init.kind == InitSpec::Kind::Component) {
    doc["init"] = {{"component", init.component}};
  } else if (init.kind == InitSpec::Kind::Explicit) {
    doc["init"] = {{"x", init.x}};
  }
  if (mode_points) doc["mode_points"] = *mode_points;
  return doc;
}

std::string ExperimentConfig::hash() const {
  const std::string s = canonical().dump();
  // FNV-1a 64
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace wpt
