#include "wpt/tempering.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <thread>

#include "wpt/numeric.hpp"

namespace wpt {

void TemperatureLadder::validate() const {
  if (betas.size() < 1) throw std::invalid_argument("ladder: needs at least one level");
  if (std::abs(betas[0] - 1.0) > 1e-14) throw std::invalid_argument("ladder: beta_0 must be 1");
  for (int i = 0; i < levels(); ++i) {
    if (!(betas[i] > 0.0)) throw std::invalid_argument("ladder: all betas must be positive");
    if (i > 0 && !(betas[i] < betas[i - 1])) {
      throw std::invalid_argument("ladder: betas must be strictly decreasing");
    }
  }
}

TemperatureLadder geometric_ladder(int n_levels, double ratio) {
  if (n_levels < 1) throw std::invalid_argument("geometric_ladder: n_levels must be >= 1");
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw std::invalid_argument("geometric_ladder: ratio must lie in (0,1)");
  }
  TemperatureLadder ladder;
  ladder.spacing = TemperatureLadder::Spacing::Geometric;
  ladder.betas.resize(n_levels);
  double b = 1.0;
  for (int i = 0; i < n_levels; ++i) {
    ladder.betas[i] = b;
    b *= ratio;
  }
  ladder.validate();
  return ladder;
}

TemperatureLadder explicit_ladder(Eigen::VectorXd betas) {
  TemperatureLadder ladder;
  ladder.spacing = TemperatureLadder::Spacing::Explicit;
  ladder.betas = std::move(betas);
  ladder.validate();
  return ladder;
}

void ChainTrace::append(int sweep, int level, double beta,
                        const Eigen::Ref<const Eigen::VectorXd>& x, int mode,
                        MoveKind move, bool accepted) {
  sweep_.push_back(sweep);
  level_.push_back(static_cast<std::int16_t>(level));
  beta_.push_back(beta);
  xs_.insert(xs_.end(), x.data(), x.data() + x.size());
  mode_.push_back(static_cast<std::int16_t>(mode));
  move_.push_back(static_cast<std::uint8_t>(move));
  accepted_.push_back(accepted ? 1 : 0);
}

int trace_mode_label(const TemperedTarget& target,
                     const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (const HatContext* ctx = target.context()) return mode_assign(*ctx, x, 1.0);
  return x.mean() < 0.0 ? 0 : 1;
}

namespace {

bool accept_log(double log_alpha, RngStream& rng) {
  const double u = rng.uniform();
  return std::log(u > 0.0 ? u : 0x1.0p-53) < log_alpha;
}

// One within-temperature kernel move at the given level; updates x and its
// cached log-density, adapting the scale while adaptation is active.
StepResult kernel_move(const TemperedTarget& target, const KernelConfig& kernel,
                       double beta, Eigen::VectorXd& x, double& cached_lp,
                       KernelState& ks, bool adapting, RngStream& rng) {
  StepResult res;
  if (kernel.kind == KernelConfig::Kind::Rwm) {
    res = rwm_step([&](const Eigen::VectorXd& y) { return target.logpdf(beta, y); }, x,
                   cached_lp, ks.scale, rng);
    if (kernel.adapt && adapting) {
      ks.scale = adapt_scale(ks.scale, res.accepted, ++ks.iters, kernel.target_accept);
    }
  } else {
    res = modal_independence_step(target, *target.context(), x, cached_lp, beta, rng,
                                  kernel.exact_resample);
  }
  cached_lp = res.logpdf;
  ks.proposed++;
  if (res.accepted) ks.accepted++;
  return res;
}

}  // namespace

void st_sweep(StRunContext& ctx, const TemperedTarget& target,
              const TemperatureLadder& ladder, const Eigen::VectorXd& log_k,
              const KernelConfig& kernel, int m, int sweep_index, RngStream& rng,
              ChainTrace& trace) {
  const int n = ladder.levels();
  STState& st = ctx.state;

  // temperature move: T' = T + w, w ~ Unif{-1,+1}
  const int w = rng.uniform() < 0.5 ? -1 : 1;
  const int t_prop = st.level + w;
  bool accepted = false;
  if (t_prop < 0 || t_prop >= n) {
    trace.swap_stats.off_ladder++;
  } else {
    const double lp_prop = target.logpdf(ladder.beta(t_prop), st.x);
    const double log_alpha =
        std::min(0.0, log_k[t_prop] + lp_prop - log_k[st.level] - ctx.cached_logpdf);
    const int pair = std::min(st.level, t_prop);
    trace.swap_stats.proposed[static_cast<size_t>(pair)]++;
    if (accept_log(log_alpha, rng)) {
      accepted = true;
      trace.swap_stats.accepted[static_cast<size_t>(pair)]++;
      st.level = t_prop;
      ctx.cached_logpdf = lp_prop;
    }
  }
  trace.append(sweep_index, st.level, ladder.beta(st.level), st.x,
               trace_mode_label(target, st.x), MoveKind::Temperature, accepted);
  ctx.rows_emitted++;

  // m within-temperature moves at the (possibly new) level
  for (int j = 0; j < m; ++j) {
    const StepResult res =
        kernel_move(target, kernel, ladder.beta(st.level), st.x, ctx.cached_logpdf,
                    ctx.kernels[static_cast<size_t>(st.level)], ctx.adapting, rng);
    trace.append(sweep_index, st.level, ladder.beta(st.level), st.x,
                 trace_mode_label(target, st.x), MoveKind::Kernel, res.accepted);
    ctx.rows_emitted++;
  }
}

namespace {

// one adjacent-pair swap proposal with cached log-density maintenance
bool propose_swap(PtRunContext& ctx, const TemperedTarget& target,
                  const TemperatureLadder& ladder, int k, RngStream& rng,
                  SwapStats& stats) {
  PTState& st = ctx.state;
  const double lp_k_at_next = target.logpdf(ladder.beta(k), st.xs[static_cast<size_t>(k + 1)]);
  const double lp_next_at_k = target.logpdf(ladder.beta(k + 1), st.xs[static_cast<size_t>(k)]);
  const double log_alpha = std::min(
      0.0, lp_next_at_k + lp_k_at_next - ctx.cached_logpdf[static_cast<size_t>(k)] -
               ctx.cached_logpdf[static_cast<size_t>(k + 1)]);
  stats.proposed[static_cast<size_t>(k)]++;
  if (accept_log(log_alpha, rng)) {
    stats.accepted[static_cast<size_t>(k)]++;
    std::swap(st.xs[static_cast<size_t>(k)], st.xs[static_cast<size_t>(k + 1)]);
    ctx.cached_logpdf[static_cast<size_t>(k)] = lp_k_at_next;
    ctx.cached_logpdf[static_cast<size_t>(k + 1)] = lp_next_at_k;
    return true;
  }
  return false;
}

}  // namespace

void pt_sweep(PtRunContext& ctx, const TemperedTarget& target,
              const TemperatureLadder& ladder, const KernelConfig& kernel, int m,
              int sweep_index, std::vector<RngStream>& chain_rngs, RngStream& swap_rng,
              ChainTrace& trace) {
  const int n = ladder.levels();
  PTState& st = ctx.state;

  if (ctx.scan_swaps && n > 1) {
    // hot-to-cold scan: refresh each marginal with the m kernel moves, then
    // offer it to its colder neighbour; swap_proposals - 1 extra uniform
    // pair proposals follow the scan.
    const size_t n_rec = ctx.record_levels.size();
    std::vector<Eigen::VectorXd> snaps(n_rec * static_cast<size_t>(m));
    std::vector<std::uint8_t> snap_acc(n_rec * static_cast<size_t>(m), 0);
    bool cold_swap_accepted = false;
    for (int p = n - 1; p >= 0; --p) {
      for (int j = 0; j < m; ++j) {
        const StepResult res = kernel_move(
            target, kernel, ladder.beta(p), st.xs[static_cast<size_t>(p)],
            ctx.cached_logpdf[static_cast<size_t>(p)], ctx.kernels[static_cast<size_t>(p)],
            ctx.adapting, chain_rngs[static_cast<size_t>(p)]);
        for (size_t ri = 0; ri < n_rec; ++ri) {
          if (ctx.record_levels[ri] == p) {
            snaps[ri * static_cast<size_t>(m) + static_cast<size_t>(j)] =
                st.xs[static_cast<size_t>(p)];
            snap_acc[ri * static_cast<size_t>(m) + static_cast<size_t>(j)] =
                res.accepted ? 1 : 0;
          }
        }
      }
      if (p >= 1) {
        const bool acc = propose_swap(ctx, target, ladder, p - 1, swap_rng, trace.swap_stats);
        if (p - 1 == 0) cold_swap_accepted = acc;
      }
    }
    for (int rep = 1; rep < ctx.swap_proposals; ++rep) {
      int k = static_cast<int>(swap_rng.uniform() * (n - 1));
      if (k >= n - 1) k = n - 2;
      const bool acc = propose_swap(ctx, target, ladder, k, swap_rng, trace.swap_stats);
      if (k == 0 && acc) cold_swap_accepted = true;
    }
    for (int lvl : ctx.record_levels) {
      trace.append(sweep_index, lvl, ladder.beta(lvl), st.xs[static_cast<size_t>(lvl)],
                   trace_mode_label(target, st.xs[static_cast<size_t>(lvl)]), MoveKind::Swap,
                   cold_swap_accepted);
      ctx.rows_emitted++;
    }
    for (int j = 0; j < m; ++j) {
      for (size_t ri = 0; ri < n_rec; ++ri) {
        const int lvl = ctx.record_levels[ri];
        const Eigen::VectorXd& x = snaps[ri * static_cast<size_t>(m) + static_cast<size_t>(j)];
        trace.append(sweep_index, lvl, ladder.beta(lvl), x, trace_mode_label(target, x),
                     MoveKind::Kernel,
                     snap_acc[ri * static_cast<size_t>(m) + static_cast<size_t>(j)] != 0);
        ctx.rows_emitted++;
      }
    }
    return;
  }

  // adjacent-pair swap proposals: k ~ Unif{0..n-2}, repeated swap_proposals
  // times (one uniform proposal is the Algorithm-2 sweep)
  bool swap_accepted = false;
  if (n > 1) {
    for (int rep = 0; rep < ctx.swap_proposals; ++rep) {
      int k = static_cast<int>(swap_rng.uniform() * (n - 1));
      if (k >= n - 1) k = n - 2;
      if (propose_swap(ctx, target, ladder, k, swap_rng, trace.swap_stats)) {
        swap_accepted = true;
      }
    }
  }
  for (int lvl : ctx.record_levels) {
    trace.append(sweep_index, lvl, ladder.beta(lvl), st.xs[static_cast<size_t>(lvl)],
                 trace_mode_label(target, st.xs[static_cast<size_t>(lvl)]), MoveKind::Swap,
                 swap_accepted);
    ctx.rows_emitted++;
  }

  // m kernel moves per level; recorded levels snapshot each sub-iteration.
  const size_t n_rec = ctx.record_levels.size();
  std::vector<Eigen::VectorXd> snaps(n_rec * static_cast<size_t>(m));
  std::vector<std::uint8_t> snap_acc(n_rec * static_cast<size_t>(m), 0);

  auto run_level = [&](int p) {
    for (int j = 0; j < m; ++j) {
      const StepResult res = kernel_move(
          target, kernel, ladder.beta(p), st.xs[static_cast<size_t>(p)],
          ctx.cached_logpdf[static_cast<size_t>(p)], ctx.kernels[static_cast<size_t>(p)],
          ctx.adapting, chain_rngs[static_cast<size_t>(p)]);
      for (size_t ri = 0; ri < n_rec; ++ri) {
        if (ctx.record_levels[ri] == p) {
          snaps[ri * static_cast<size_t>(m) + static_cast<size_t>(j)] =
              st.xs[static_cast<size_t>(p)];
          snap_acc[ri * static_cast<size_t>(m) + static_cast<size_t>(j)] =
              res.accepted ? 1 : 0;
        }
      }
    }
  };

  if (ctx.threads > 1 && n > 1) {
    std::vector<std::thread> pool;
    const int n_workers = std::min(ctx.threads, n);
    pool.reserve(static_cast<size_t>(n_workers));
    std::atomic<int> next{0};
    for (int t = 0; t < n_workers; ++t) {
      pool.emplace_back([&]() {
        for (;;) {
          const int p = next.fetch_add(1);
          if (p >= n) break;
          run_level(p);
        }
      });
    }
    for (auto& th : pool) th.join();
  } else {
    for (int p = 0; p < n; ++p) run_level(p);
  }

  for (int j = 0; j < m; ++j) {
    for (size_t ri = 0; ri < n_rec; ++ri) {
      const int lvl = ctx.record_levels[ri];
      const Eigen::VectorXd& x = snaps[ri * static_cast<size_t>(m) + static_cast<size_t>(j)];
      trace.append(sweep_index, lvl, ladder.beta(lvl), x, trace_mode_label(target, x),
                   MoveKind::Kernel,
                   snap_acc[ri * static_cast<size_t>(m) + static_cast<size_t>(j)] != 0);
      ctx.rows_emitted++;
    }
  }
}

Eigen::VectorXd estimate_pseudo_prior(const ChainTrace& pilot,
                                      const TemperatureLadder& ladder) {
  const int n = ladder.levels();
  if (n == 1) return Eigen::VectorXd::Zero(1);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(n);
  for (long i = 0; i < pilot.rows(); ++i) counts[pilot.level(i)] += 1.0;
  if ((counts.array() == 0.0).any()) {
    throw std::runtime_error(
        "estimate_pseudo_prior: estimation failed, at least one level was never visited");
  }
  const double mean_occ = counts.mean();
  Eigen::VectorXd log_k = pilot.log_pseudo_prior_used();
  if (log_k.size() != n) log_k = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) log_k[i] -= std::log(counts[i] / mean_occ);
  log_k.array() -= log_k[0];  // anchor the cold level
  return log_k;
}

PseudoPriorCalibration calibrate_pseudo_prior(const TemperedTarget& target,
                                              const TemperatureLadder& ladder,
                                              const KernelConfig& kernel,
                                              const Eigen::VectorXd& x0, RngStream& rng,
                                              int sweeps_per_epoch, int max_epochs) {
  PseudoPriorCalibration out;
  const int n = ladder.levels();
  out.log_k = Eigen::VectorXd::Zero(n);
  if (n == 1) {
    out.converged = true;
    return out;
  }
  for (int epoch = 0; epoch < max_epochs; ++epoch) {
    ChainTrace trace(target.dimension(), "st-pilot", target.kind(), ladder.betas, out.log_k, 0);
    trace.swap_stats.init(n - 1);
    StRunContext ctx;
    ctx.state = {0, x0};
    ctx.cached_logpdf = target.logpdf(1.0, x0);
    ctx.kernels.assign(static_cast<size_t>(n), KernelState{kernel.scale, 0, 0, 0});
    ctx.adapting = true;
    for (int s = 0; s < sweeps_per_epoch; ++s) {
      st_sweep(ctx, target, ladder, out.log_k, kernel, 1, s, rng, trace);
    }
    out.epochs = epoch + 1;
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(n);
    for (long i = 0; i < trace.rows(); ++i) counts[trace.level(i)] += 1.0;
    const double uniform = counts.sum() / n;
    out.max_rel_dev = ((counts.array() - uniform).abs() / uniform).maxCoeff();
    if ((counts.array() > 0.0).all() && out.max_rel_dev <= 0.2) {
      out.converged = true;
      return out;
    }
    // one occupancy adjustment per epoch, with unvisited levels nudged hard
    const double floor = 0.5;
    for (int i = 0; i < n; ++i) {
      out.log_k[i] -= std::log(std::max(counts[i], floor) / uniform);
    }
    out.log_k.array() -= out.log_k[0];
  }
  return out;
}

TuneResult tune_ladder(const TemperedTarget& target, const KernelConfig& kernel,
                       double target_swap, const TemperatureLadder& init, RngStream& rng,
                       const TuneOptions& opts) {
  if (!(target_swap > 0.0 && target_swap < 1.0)) {
    throw std::invalid_argument("tune_ladder: target_swap must lie in (0,1)");
  }
  init.validate();
  const int n = init.levels();
  TuneResult out;
  if (n < 2) {
    out.ladder = init;
    out.converged = true;
    return out;
  }

  // log-gaps between adjacent inverse temperatures
  Eigen::VectorXd gap(n - 1);
  for (int k = 0; k < n - 1; ++k) gap[k] = std::log(init.beta(k) / init.beta(k + 1));

  auto betas_from_gaps = [&]() {
    Eigen::VectorXd b(n);
    b[0] = 1.0;
    for (int k = 0; k < n - 1; ++k) b[k + 1] = b[k] * std::exp(-gap[k]);
    return b;
  };

  Eigen::VectorXd betas = betas_from_gaps();
  PTState st;
  st.xs.assign(static_cast<size_t>(n), Eigen::VectorXd::Zero(target.dimension()));
  std::vector<double> cached(static_cast<size_t>(n));
  std::vector<KernelState> kernels(static_cast<size_t>(n), KernelState{kernel.scale, 0, 0, 0});
  for (int p = 0; p < n; ++p) cached[static_cast<size_t>(p)] = target.logpdf(betas[p], st.xs[static_cast<size_t>(p)]);

  std::vector<double> ema(static_cast<size_t>(n - 1), target_swap);
  std::vector<long> counts(static_cast<size_t>(n - 1), 0);
  std::vector<long> rm_iter(static_cast<size_t>(n - 1), 0);

  bool converged = false;
  for (int sweep = 0; sweep < opts.max_sweeps && !converged; ++sweep) {
    // within-temperature refresh
    for (int p = 0; p < n; ++p) {
      for (int j = 0; j < opts.m_within; ++j) {
        kernel_move(target, kernel, betas[p], st.xs[static_cast<size_t>(p)],
                    cached[static_cast<size_t>(p)], kernels[static_cast<size_t>(p)], true, rng);
      }
    }
    // sweep over every adjacent pair with a Robbins-Monro gap update
    for (int k = 0; k < n - 1; ++k) {
      const double lp_k_at_next = target.logpdf(betas[k], st.xs[static_cast<size_t>(k + 1)]);
      const double lp_next_at_k = target.logpdf(betas[k + 1], st.xs[static_cast<size_t>(k)]);
      const double log_alpha =
          std::min(0.0, lp_next_at_k + lp_k_at_next - cached[static_cast<size_t>(k)] -
                            cached[static_cast<size_t>(k + 1)]);
      const double alpha = std::exp(log_alpha);
      if (accept_log(log_alpha, rng)) {
        std::swap(st.xs[static_cast<size_t>(k)], st.xs[static_cast<size_t>(k + 1)]);
        cached[static_cast<size_t>(k)] = lp_k_at_next;
        cached[static_cast<size_t>(k + 1)] = lp_next_at_k;
      }
      const double gain = std::pow(static_cast<double>(++rm_iter[static_cast<size_t>(k)]), -0.6);
      gap[k] = std::exp(std::log(gap[k]) + gain * (alpha - target_swap));
      gap[k] = std::min(gap[k], 50.0);
      ema[static_cast<size_t>(k)] =
          opts.ema_decay * ema[static_cast<size_t>(k)] + (1.0 - opts.ema_decay) * alpha;
      counts[static_cast<size_t>(k)]++;
    }
    betas = betas_from_gaps();
    // gap changes invalidate nothing (states keep their levels), but cached
    // log-densities refer to the old betas: refresh them.
    for (int p = 1; p < n; ++p) {
      cached[static_cast<size_t>(p)] = target.logpdf(betas[p], st.xs[static_cast<size_t>(p)]);
    }

    converged = true;
    for (int k = 0; k < n - 1; ++k) {
      if (counts[static_cast<size_t>(k)] < opts.min_proposals_per_pair ||
          std::abs(ema[static_cast<size_t>(k)] - target_swap) > opts.band) {
        converged = false;
        break;
      }
    }
  }

  out.ladder.spacing = TemperatureLadder::Spacing::Explicit;
  out.ladder.betas = betas;
  out.ladder.degenerate = !converged;
  out.converged = converged;
  out.rates.assign(ema.begin(), ema.end());
  out.ladder.validate();
  return out;
}

}  // namespace wpt
