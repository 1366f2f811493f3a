#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "wpt/mixture.hpp"
#include "wpt/rng.hpp"
#include "wpt/tempering.hpp"

namespace wpt {

// Ladder by the recursion beta_i = beta_{i-1} - ell(beta_{i-1}) / sqrt(d),
// descending from 1 and clamped to beta_min at the first crossing. The
// degenerate flag is set when the very first step overshoots.
TemperatureLadder ladder_eqn_beta(int d, const std::function<double(double)>& ell,
                                  double beta_min);

// I(beta) = Var_{x ~ f^beta}(log f(x)); 1/(r beta^2) analytically in the
// exponential-power family (Gaussian included), adaptive quadrature otherwise.
double i_beta(const UnivariateFamily& family, double beta);

// Simplified weight-preserving ST process: two modes of weights (p, 1-p) with
// exponential-power exponents (r1, r2), immediate within-mode mixing, mode
// redrawn on every visit to beta_min.
struct SimplifiedConfig {
  int d = 100;
  double p = 0.5;
  double r1 = 2.0;
  double r2 = 2.0;
  double ell0 = 2.38;
  double beta_min = 0.01;
  enum class BetaMinRule { Fixed, InverseDSquared };
  BetaMinRule rule = BetaMinRule::Fixed;

  double effective_beta_min() const {
    return rule == BetaMinRule::Fixed ? beta_min
                                      : 1.0 / (static_cast<double>(d) * static_cast<double>(d));
  }
};

struct SignedTempPath {
  Eigen::VectorXd ladder_betas;     // descending, ladder_betas[0] = 1
  std::vector<std::int32_t> level;  // per step
  std::vector<std::int8_t> mode;    // 1 or 2
  int d = 0;
  double ell0 = 0.0;
  double beta_min = 0.0;

  long first_hit_beta_min = -1;  // raw iterations; -1 if never reached

  // on-ladder temperature-move acceptance counters
  long proposed = 0;
  long accepted = 0;
  std::vector<long> rung_proposed;  // per pair
  std::vector<long> rung_accepted;

  long steps() const { return static_cast<long>(level.size()); }
  double beta_at(long t) const { return ladder_betas[level[static_cast<size_t>(t)]]; }
  // X_t = (3 - 2 I) beta
  double x_at(long t) const {
    return (3.0 - 2.0 * mode[static_cast<size_t>(t)]) * beta_at(t);
  }
  double diffusion_time(long t) const { return static_cast<double>(t) / d; }
};

SignedTempPath simplified_st_run(const SimplifiedConfig& cfg, long n_steps, RngStream& rng);

// First visit of the beta_min level in raw iterations (from beta = 1); -1 when
// the cap is reached first.
long simplified_hitting_time(const SimplifiedConfig& cfg, long cap, RngStream& rng);

// h(x) = sgn(x) * int_{beta_min}^{|x|} du / ell(u); closed form log(|x|/beta_min)/ell0
// for ell(u) = u * ell0. Domain |x| in [beta_min, 1] or x = 0.
double h_transform(double x, double ell0, double beta_min);
double h_transform(double x, const std::function<double(double)>& ell, double beta_min);

// z(h) = h * [2 Phi(-ell0 / (2 sqrt(r(h))))]^{-1/2}, r(h) = r1 on h>0, r2 on h<0.
double z_transform(double h_val, double r1, double r2, double ell0);

// Skew Brownian motion on [z_min, z_max] with reflection: Gaussian Euler steps
// of scale sqrt(dt); every zero crossing re-draws the excursion sign, positive
// with probability a/(a+b).
struct ReflectedPath {
  std::vector<double> z;
  double dt = 0.0;
};
ReflectedPath skew_bm_simulate(double a, double b, double z_min, double z_max, double dt,
                               long n_steps, RngStream& rng);

// Brownian motion on a k-arm star: radial Gaussian steps, arm redrawn with
// probabilities p on each origin crossing, reflection at the arm ends.
struct WalshPath {
  std::vector<std::int32_t> arm;
  std::vector<double> radius;
  double dt = 0.0;
};
WalshPath walsh_bm_simulate(const Eigen::Ref<const Eigen::VectorXd>& probs,
                            const Eigen::Ref<const Eigen::VectorXd>& arm_lengths, double dt,
                            long n_steps, RngStream& rng);

// Mean beta_min hitting times over replicates per dimension, with a log-log
// slope fit (Fixed rule) or the spread of T / (d (log d)^2) (InverseDSquared).
struct ScalingFit {
  std::vector<int> d_values;
  std::vector<double> mean_hit;   // raw iterations
  double slope = 0.0;             // log-log fit (Fixed rule)
  double r2 = 0.0;
  std::vector<double> scaled;     // T / (d (log d)^2)  (InverseDSquared rule)
  double scaled_spread = 0.0;     // max(scaled) / min(scaled)
};
ScalingFit mixing_scaling_fit(const SimplifiedConfig& cfg_template,
                              const std::vector<int>& d_values, int replicates,
                              RngStream& rng, long cap_per_run = 200000000L);

// Histogram uniformity per sign: equal-width bins over each side's occupied
// range, returning the maximum relative deviation of a bin count from the
// side's own mean. Requires at least 100 samples per side.
struct SideUniformity {
  double max_dev_pos = 0.0;
  double max_dev_neg = 0.0;
};
SideUniformity piecewise_uniform_check(const std::vector<double>& h_values, int bins);

// h-transform of a simplified path (vector of h(X_t)).
std::vector<double> h_values_of_path(const SignedTempPath& path);

}  // namespace wpt
