#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "wpt/samplers.hpp"
#include "wpt/tempered.hpp"

namespace wpt {

struct TemperatureLadder {
  Eigen::VectorXd betas;  // 1 = beta_0 > beta_1 > ... > beta_n > 0
  enum class Spacing { Explicit, Geometric, EqnBeta };
  Spacing spacing = Spacing::Explicit;
  bool degenerate = false;  // flagged by ladder constructors on clamping

  int levels() const { return static_cast<int>(betas.size()); }
  double beta(int i) const { return betas[i]; }
  double beta_min() const { return betas[betas.size() - 1]; }
  void validate() const;
};

// beta_i = ratio^i, i = 0..n_levels-1.
TemperatureLadder geometric_ladder(int n_levels, double ratio);

TemperatureLadder explicit_ladder(Eigen::VectorXd betas);

// Accepted/proposed counters per adjacent pair; pair k joins levels k, k+1.
struct SwapStats {
  std::vector<long> proposed;
  std::vector<long> accepted;
  long off_ladder = 0;  // temperature proposals beyond the ladder ends

  void init(int n_pairs) {
    proposed.assign(static_cast<size_t>(n_pairs), 0);
    accepted.assign(static_cast<size_t>(n_pairs), 0);
    off_ladder = 0;
  }
  // NaN when the pair was never proposed.
  double rate(int k) const {
    return proposed[static_cast<size_t>(k)] == 0
               ? std::numeric_limits<double>::quiet_NaN()
               : static_cast<double>(accepted[static_cast<size_t>(k)]) /
                     static_cast<double>(proposed[static_cast<size_t>(k)]);
  }
};

enum class MoveKind : std::uint8_t { Init = 0, Temperature = 1, Kernel = 2, Swap = 3 };

// Column-major record of a run. For ST every row is the single chain at its
// current level; for PT one row per recorded level per time index.
class ChainTrace {
 public:
  ChainTrace() = default;
  ChainTrace(int dim, std::string driver, TemperKind kind, Eigen::VectorXd betas,
             Eigen::VectorXd log_k, std::uint64_t seed)
      : dim_(dim),
        driver_(std::move(driver)),
        kind_(kind),
        betas_(std::move(betas)),
        log_k_(std::move(log_k)),
        seed_(seed) {}

  void append(int sweep, int level, double beta, const Eigen::Ref<const Eigen::VectorXd>& x,
              int mode, MoveKind move, bool accepted);

  long rows() const { return static_cast<long>(sweep_.size()); }
  int dim() const { return dim_; }
  Eigen::Map<const Eigen::VectorXd> x(long i) const {
    return {xs_.data() + i * dim_, dim_};
  }
  int sweep(long i) const { return sweep_[static_cast<size_t>(i)]; }
  int level(long i) const { return level_[static_cast<size_t>(i)]; }
  double beta(long i) const { return beta_[static_cast<size_t>(i)]; }
  int mode(long i) const { return mode_[static_cast<size_t>(i)]; }
  MoveKind move(long i) const { return static_cast<MoveKind>(move_[static_cast<size_t>(i)]); }
  bool accepted(long i) const { return accepted_[static_cast<size_t>(i)] != 0; }

  const std::string& driver() const { return driver_; }
  TemperKind kind() const { return kind_; }
  const Eigen::VectorXd& ladder_betas() const { return betas_; }
  const Eigen::VectorXd& log_pseudo_prior_used() const { return log_k_; }
  std::uint64_t seed() const { return seed_; }

  SwapStats swap_stats;

 private:
  int dim_ = 0;
  std::string driver_;
  TemperKind kind_ = TemperKind::Power;
  Eigen::VectorXd betas_;
  Eigen::VectorXd log_k_;
  std::uint64_t seed_ = 0;

  std::vector<std::int32_t> sweep_;
  std::vector<std::int16_t> level_;
  std::vector<double> beta_;
  std::vector<double> xs_;
  std::vector<std::int16_t> mode_;
  std::vector<std::uint8_t> move_;
  std::vector<std::uint8_t> accepted_;
};

struct STState {
  int level = 0;
  Eigen::VectorXd x;
};

struct PTState {
  std::vector<Eigen::VectorXd> xs;  // one per level
};

// Per-level kernel bookkeeping (adaptive proposal scale).
struct KernelState {
  double scale = 1.0;
  long iters = 0;
  long proposed = 0;
  long accepted = 0;
};

// Mutable context threaded through sweeps.
struct StRunContext {
  STState state;
  double cached_logpdf = 0.0;
  std::vector<KernelState> kernels;  // one per level
  bool adapting = true;
  long rows_emitted = 0;
};

struct PtRunContext {
  PTState state;
  std::vector<double> cached_logpdf;  // one per level
  std::vector<KernelState> kernels;
  bool adapting = true;
  long rows_emitted = 0;
  std::vector<int> record_levels{0};
  int threads = 1;            // within-temperature worker count
  int swap_proposals = 1;     // uniform adjacent-pair proposals per sweep
  bool scan_swaps = false;    // per-marginal top-down scan instead of uniform k
};

// One ST sweep: a uniform +/-1 temperature proposal with the generalised
// acceptance (off-ladder proposals rejected), then m kernel moves at the new
// level. Emits m+1 trace rows.
void st_sweep(StRunContext& ctx, const TemperedTarget& target,
              const TemperatureLadder& ladder, const Eigen::VectorXd& log_k,
              const KernelConfig& kernel, int m, int sweep_index, RngStream& rng,
              ChainTrace& trace);

// One PT sweep. Uniform schedule: ctx.swap_proposals uniformly chosen
// adjacent-pair swap proposals (Algorithm-2 literal when 1), then m kernel
// moves per level. Scan schedule: for p = n-1..0, m kernel moves at level p
// followed by a (p-1, p) swap proposal, so each marginal is updated and then
// offered to its colder neighbour within one sweep. chain_rngs has one stream per level; swap_rng drives pair
// choice and the swap accept. Emits (m+1) * |record_levels| rows.
void pt_sweep(PtRunContext& ctx, const TemperedTarget& target,
              const TemperatureLadder& ladder, const KernelConfig& kernel, int m,
              int sweep_index, std::vector<RngStream>& chain_rngs, RngStream& swap_rng,
              ChainTrace& trace);

// Trace row label: assignment at the cold temperature when a context is
// available, the coordinate-mean half-space otherwise.
int trace_mode_label(const TemperedTarget& target, const Eigen::Ref<const Eigen::VectorXd>& x);

// Occupancy-based log K adjustment from a pilot run:
// log K_i <- log K_i - log(occupancy_i / mean occupancy). Throws if any level
// was never visited.
Eigen::VectorXd estimate_pseudo_prior(const ChainTrace& pilot, const TemperatureLadder& ladder);

// Repeats pilot ST runs, adjusting log K each epoch, until the occupancy is
// uniform within +/-20% per level (or the epoch cap is reached).
struct PseudoPriorCalibration {
  Eigen::VectorXd log_k;
  bool converged = false;
  int epochs = 0;
  double max_rel_dev = 0.0;
};
PseudoPriorCalibration calibrate_pseudo_prior(const TemperedTarget& target,
                                              const TemperatureLadder& ladder,
                                              const KernelConfig& kernel,
                                              const Eigen::VectorXd& x0, RngStream& rng,
                                              int sweeps_per_epoch = 4000,
                                              int max_epochs = 40);

// Robbins-Monro spacing adaptation towards a per-pair swap acceptance target.
struct TuneOptions {
  int max_sweeps = 20000;
  int m_within = 2;
  double band = 0.05;   // convergence band around target_swap
  double ema_decay = 0.995;
  long min_proposals_per_pair = 50;
};
struct TuneResult {
  TemperatureLadder ladder;
  bool converged = false;
  std::vector<double> rates;  // per-pair EMA acceptance at freeze time
};
TuneResult tune_ladder(const TemperedTarget& target, const KernelConfig& kernel,
                       double target_swap, const TemperatureLadder& init,
                       RngStream& rng, const TuneOptions& opts = {});

}  // namespace wpt
