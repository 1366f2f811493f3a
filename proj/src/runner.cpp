#include "wpt/runner.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "wpt/diffusion.hpp"
#include "wpt/tempered.hpp"

namespace wpt {

namespace fs = std::filesystem;
using nlohmann::json;

int thread_budget() {
  const char* env = std::getenv("WPT_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n > 0 ? n : 1;
}

Experiment build_experiment(const ExperimentConfig& cfg) {
  const auto errors = cfg.validate();
  if (!errors.empty()) {
    std::ostringstream os;
    os << "invalid config:";
    for (const auto& e : errors) os << "\n  - " << e;
    throw std::invalid_argument(os.str());
  }

  Experiment exp;
  exp.mixture = std::make_shared<MixtureTarget>(load_mixture_json(cfg.target.dump()));

  if (cfg.mode_points) {
    std::vector<Eigen::VectorXd> modes;
    for (const auto& mp : *cfg.mode_points) {
      modes.push_back(Eigen::Map<const Eigen::VectorXd>(mp.data(),
                                                        static_cast<Eigen::Index>(mp.size())));
    }
    exp.ctx = std::make_shared<HatContext>(make_hat_context(*exp.mixture, modes));
  } else {
    exp.ctx = std::make_shared<HatContext>(make_hat_context(*exp.mixture));
  }

  TemperKind kind = temper_kind_from_string(cfg.temper_kind);
  if (cfg.driver == "HAST" || cfg.driver == "HAT") kind = TemperKind::Hat;
  exp.target = std::make_shared<TemperedTarget>(exp.mixture, kind, exp.ctx,
                                                g_variant_from_string(cfg.g_variant));
  exp.is_pt = cfg.driver == "PT" || cfg.driver == "HAT";

  if (cfg.ladder.kind == "geometric") {
    exp.ladder = geometric_ladder(cfg.ladder.levels, cfg.ladder.ratio);
  } else if (cfg.ladder.kind == "explicit") {
    exp.ladder = explicit_ladder(Eigen::Map<const Eigen::VectorXd>(
        cfg.ladder.betas.data(), static_cast<Eigen::Index>(cfg.ladder.betas.size())));
  } else {
    const double ell0 = cfg.ladder.ell0;
    exp.ladder = ladder_eqn_beta(exp.mixture->dimension(),
                                 [ell0](double b) { return b * ell0; }, cfg.ladder.beta_min);
  }

  const int n = exp.ladder.levels();
  exp.log_k = Eigen::VectorXd::Zero(n);
  if (!exp.is_pt && cfg.pseudo_prior == "analytic") {
    for (int i = 0; i < n; ++i) exp.log_k[i] = log_pseudo_prior(*exp.target, exp.ladder.beta(i));
  } else if (!exp.is_pt && cfg.pseudo_prior == "estimate") {
    RngStream rng(cfg.seed, 0xE57);
    Eigen::VectorXd x0 = exp.ctx->modes.front();
    const auto cal = calibrate_pseudo_prior(*exp.target, exp.ladder, cfg.kernel, x0, rng);
    exp.log_k = cal.log_k;
  }
  return exp;
}

namespace {

Eigen::VectorXd initial_state(const ExperimentConfig& cfg, const Experiment& exp,
                              double beta, RngStream& rng) {
  switch (cfg.init.kind) {
    case InitSpec::Kind::Explicit:
      return Eigen::Map<const Eigen::VectorXd>(cfg.init.x.data(),
                                               static_cast<Eigen::Index>(cfg.init.x.size()));
    case InitSpec::Kind::Component:
      return exp.ctx->modes[static_cast<size_t>(cfg.init.component)];
    case InitSpec::Kind::Default: {
      // component drawn by weight, then a draw from its tempered surrogate
      const double u = rng.uniform();
      double c = 0.0;
      int j = exp.mixture->size() - 1;
      for (int i = 0; i < exp.mixture->size(); ++i) {
        c += exp.mixture->component(i).weight;
        if (u < c) {
          j = i;
          break;
        }
      }
      return exp.ctx->sample_mode(j, beta, rng);
    }
  }
  throw std::logic_error("unreachable");
}

double initial_scale(const ExperimentConfig& cfg, const Experiment& exp, double beta) {
  if (!cfg.kernel.adapt) return cfg.kernel.scale;
  // optimal-scaling start 2.38 / sqrt(d * beta * curvature-scale)
  const double d = static_cast<double>(exp.mixture->dimension());
  double curv = 0.0;
  for (int j = 0; j < exp.ctx->size(); ++j) {
    curv = std::max(curv, 1.0 / exp.ctx->curvatures[static_cast<size_t>(j)].diagonal().minCoeff());
  }
  if (!(curv > 0.0)) curv = 1.0;
  return 2.38 / std::sqrt(d * beta * curv) * cfg.kernel.scale;
}

}  // namespace

RunOutput run_replicate(const ExperimentConfig& cfg, int replicate,
                        const std::string& out_dir) {
  const Experiment exp = build_experiment(cfg);
  const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(replicate);
  const int n = exp.ladder.levels();
  const int d = exp.mixture->dimension();
  const auto t0 = std::chrono::steady_clock::now();

  RunOutput out;
  out.trace = ChainTrace(d, cfg.driver, exp.target->kind(), exp.ladder.betas, exp.log_k, seed);
  out.trace.swap_stats.init(n > 1 ? n - 1 : 0);

  std::unique_ptr<TraceCsvWriter> csv;
  std::string trace_path, summary_path, series_path;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ostringstream base;
    base << "_rep" << replicate;
    trace_path = (fs::path(out_dir) / ("trace" + base.str() + ".csv")).string();
    summary_path = (fs::path(out_dir) / ("summary" + base.str() + ".json")).string();
    series_path = (fs::path(out_dir) / ("series" + base.str() + ".csv")).string();
    csv = std::make_unique<TraceCsvWriter>(trace_path, d);
  }

  std::vector<KernelState> kernels(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) {
    kernels[static_cast<size_t>(p)].scale = initial_scale(cfg, exp, exp.ladder.beta(p));
  }

  if (!exp.is_pt) {
    RngStream rng(seed, 0);
    StRunContext ctx;
    ctx.state.level = 0;
    ctx.state.x = initial_state(cfg, exp, 1.0, rng);
    ctx.cached_logpdf = exp.target->logpdf(1.0, ctx.state.x);
    ctx.kernels = kernels;
    ctx.adapting = true;
    out.trace.append(0, 0, 1.0, ctx.state.x, trace_mode_label(*exp.target, ctx.state.x),
                     MoveKind::Init, false);
    ctx.rows_emitted = 1;
    for (long sweep = 1; sweep <= cfg.s; ++sweep) {
      ctx.adapting = ctx.rows_emitted < cfg.burn_in;
      st_sweep(ctx, *exp.target, exp.ladder, exp.log_k, cfg.kernel, cfg.m,
               static_cast<int>(sweep), rng, out.trace);
      if (csv) csv->sync(out.trace);
    }
    for (const auto& k : ctx.kernels) {
      out.summary.kernel_accept.push_back(
          k.proposed > 0 ? static_cast<double>(k.accepted) / k.proposed
                         : std::numeric_limits<double>::quiet_NaN());
    }
  } else {
    RngStream swap_rng(seed, 0);
    std::vector<RngStream> chain_rngs;
    chain_rngs.reserve(static_cast<size_t>(n));
    for (int p = 0; p < n; ++p) chain_rngs.emplace_back(seed, static_cast<std::uint64_t>(1 + p));
    PtRunContext ctx;
    ctx.state.xs.resize(static_cast<size_t>(n));
    ctx.cached_logpdf.resize(static_cast<size_t>(n));
    for (int p = 0; p < n; ++p) {
      ctx.state.xs[static_cast<size_t>(p)] =
          initial_state(cfg, exp, exp.ladder.beta(p), chain_rngs[static_cast<size_t>(p)]);
      ctx.cached_logpdf[static_cast<size_t>(p)] =
          exp.target->logpdf(exp.ladder.beta(p), ctx.state.xs[static_cast<size_t>(p)]);
    }
    ctx.kernels = kernels;
    ctx.adapting = true;
    ctx.threads = cfg.threads_within;
    ctx.swap_proposals = cfg.swap_proposals_per_sweep;
    ctx.scan_swaps = cfg.swap_schedule == "scan";
    ctx.record_levels.clear();
    if (cfg.trace_levels == "all") {
      for (int p = 0; p < n; ++p) ctx.record_levels.push_back(p);
    } else {
      ctx.record_levels.push_back(0);
    }
    if (cfg.pre_tune_sweeps > 0) {
      // unrecorded warm-up: adapts kernel scales and equilibrates the ladder
      ChainTrace scratch(d, cfg.driver, exp.target->kind(), exp.ladder.betas, exp.log_k, seed);
      scratch.swap_stats.init(n > 1 ? n - 1 : 0);
      const std::vector<int> record = ctx.record_levels;
      ctx.record_levels.clear();
      ctx.adapting = true;
      for (long sweep = 0; sweep < cfg.pre_tune_sweeps; ++sweep) {
        pt_sweep(ctx, *exp.target, exp.ladder, cfg.kernel, cfg.m, 0, chain_rngs, swap_rng,
                 scratch);
      }
      ctx.record_levels = record;
      ctx.rows_emitted = 0;
    }
    for (int lvl : ctx.record_levels) {
      out.trace.append(0, lvl, exp.ladder.beta(lvl), ctx.state.xs[static_cast<size_t>(lvl)],
                       trace_mode_label(*exp.target, ctx.state.xs[static_cast<size_t>(lvl)]),
                       MoveKind::Init, false);
      ctx.rows_emitted++;
    }
    for (long sweep = 1; sweep <= cfg.s; ++sweep) {
      // burn-in bookkeeping counts cold-level rows; pre-tuned runs stay frozen
      ctx.adapting = cfg.pre_tune_sweeps == 0 &&
                     (sweep - 1) * static_cast<long>(cfg.m + 1) + 1 < cfg.burn_in;
      pt_sweep(ctx, *exp.target, exp.ladder, cfg.kernel, cfg.m, static_cast<int>(sweep),
               chain_rngs, swap_rng, out.trace);
      if (csv) csv->sync(out.trace);
    }
    for (const auto& k : ctx.kernels) {
      out.summary.kernel_accept.push_back(
          k.proposed > 0 ? static_cast<double>(k.accepted) / k.proposed
                         : std::numeric_limits<double>::quiet_NaN());
    }
  }

  const auto t1 = std::chrono::steady_clock::now();
  RunSummary& s = out.summary;
  s.driver = cfg.driver;
  s.temper_kind = to_string(exp.target->kind());
  s.replicate = replicate;
  s.seed = seed;
  s.rows = out.trace.rows();
  s.runtime_seconds = std::chrono::duration<double>(t1 - t0).count();
  s.config_hash = cfg.hash();

  const auto rates = swap_rate_table(out.trace);
  double rate_sum = 0.0;
  int rate_n = 0;
  for (const auto& r : rates) {
    s.swap_rates.push_back(r.value_or(std::numeric_limits<double>::quiet_NaN()));
    if (r) {
      rate_sum += *r;
      ++rate_n;
    }
  }
  if (rate_n > 0) s.mean_swap_rate = rate_sum / rate_n;

  std::vector<double> series;
  if (cfg.region) {
    series = running_weight(out.trace, *cfg.region, cfg.burn_in);
    s.final_weight = series.back();
  }
  const Eigen::VectorXd occ = mode_occupancy(out.trace, *exp.ctx);
  s.mode_occupancy.assign(occ.data(), occ.data() + occ.size());

  if (csv) {
    csv->sync(out.trace);
    csv->close();
    write_summary(s, summary_path);
    if (!series.empty()) {
      const long stride = std::max<long>(1, static_cast<long>(series.size()) / 5000);
      write_series_csv(series, cfg.burn_in, stride, series_path);
    }
  }
  return out;
}

std::vector<RunSummary> run_all_replicates(const ExperimentConfig& cfg,
                                           const std::string& out_dir) {
  const int r = cfg.replicates;
  std::vector<RunSummary> summaries(static_cast<size_t>(r));
  const int workers = std::min(thread_budget(), r);
  if (workers <= 1) {
    for (int i = 0; i < r; ++i) summaries[static_cast<size_t>(i)] = run_replicate(cfg, i, out_dir).summary;
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        try {
          for (;;) {
            const int i = next.fetch_add(1);
            if (i >= r) break;
            summaries[static_cast<size_t>(i)] = run_replicate(cfg, i, out_dir).summary;
          }
        } catch (...) {
          errors[static_cast<size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  if (!out_dir.empty()) {
    std::vector<std::string> outputs;
    for (int i = 0; i < r; ++i) {
      outputs.push_back("trace_rep" + std::to_string(i) + ".csv");
      outputs.push_back("summary_rep" + std::to_string(i) + ".json");
    }
    write_manifest(cfg, outputs, (fs::path(out_dir) / "manifest.json").string());
  }
  return summaries;
}

nlohmann::json build_report(const std::string& runs_dir) {
  const auto summaries = read_summaries_dir(runs_dir);
  if (summaries.empty()) {
    throw std::runtime_error("no summary_*.json files in " + runs_dir);
  }
  std::map<std::string, std::vector<const RunSummary*>> by_driver;
  for (const auto& s : summaries) by_driver[s.driver].push_back(&s);

  json report;
  report["runs_dir"] = runs_dir;
  json table1 = json::object();
  json table2 = json::object();
  for (const auto& [driver, runs] : by_driver) {
    json estimates = json::array();
    std::vector<double> finals;
    double rt = 0.0, swaps = 0.0;
    int swap_n = 0;
    for (const auto* s : runs) {
      if (!std::isnan(s->final_weight)) {
        estimates.push_back(s->final_weight);
        finals.push_back(s->final_weight);
      }
      rt += s->runtime_seconds;
      if (!std::isnan(s->mean_swap_rate)) {
        swaps += s->mean_swap_rate;
        ++swap_n;
      }
    }
    table1[driver] = estimates;
    json row{{"runs", runs.size()},
             {"mean_runtime_seconds", rt / static_cast<double>(runs.size())}};
    if (swap_n > 0) row["mean_swap_rate"] = swaps / swap_n;
    if (finals.size() >= 2) {
      const BatchMeans bm = batch_means_sd(finals);
      row["pooled_mean"] = bm.mean;
      row["per_run_sd"] = bm.per_run_sd;
      row["pooled_sd"] = bm.pooled_sd;
    } else if (finals.size() == 1) {
      row["pooled_mean"] = finals.front();
      row["note"] = "single run: pooled SD omitted (needs >= 2 replicates)";
    }
    table2[driver] = row;
  }
  report["table1"] = table1;
  report["table2"] = table2;
  return report;
}

}  // namespace wpt
