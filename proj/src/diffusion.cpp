#include "wpt/diffusion.hpp"

#include <cmath>
#include <stdexcept>

#include "wpt/numeric.hpp"

namespace wpt {

TemperatureLadder ladder_eqn_beta(int d, const std::function<double(double)>& ell,
                                  double beta_min) {
  if (d < 1) throw std::invalid_argument("ladder_eqn_beta: d must be >= 1");
  if (!(beta_min > 0.0 && beta_min < 1.0)) {
    throw std::invalid_argument("ladder_eqn_beta: beta_min must lie in (0,1)");
  }
  const double sqrt_d = std::sqrt(static_cast<double>(d));
  std::vector<double> betas{1.0};
  constexpr int kMaxLevels = 2000000;
  for (;;) {
    const double b = betas.back();
    const double step = ell(b);
    if (!(step > 0.0)) {
      throw std::invalid_argument("ladder_eqn_beta: ell must be positive on (beta_min, 1]");
    }
    const double next = b - step / sqrt_d;
    if (next <= beta_min + 1e-15) {
      betas.push_back(beta_min);
      break;
    }
    betas.push_back(next);
    if (static_cast<int>(betas.size()) > kMaxLevels) {
      throw std::runtime_error("ladder_eqn_beta: level cap exceeded");
    }
  }
  TemperatureLadder ladder;
  ladder.spacing = TemperatureLadder::Spacing::EqnBeta;
  ladder.betas = Eigen::Map<const Eigen::VectorXd>(betas.data(),
                                                   static_cast<Eigen::Index>(betas.size()));
  ladder.degenerate = betas.size() == 2;  // the first step already overshot
  ladder.validate();
  return ladder;
}

double i_beta(const UnivariateFamily& family, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("i_beta: beta must be > 0");
  switch (family.kind) {
    case UnivariateFamily::Kind::Gaussian:
      return 1.0 / (2.0 * beta * beta);
    case UnivariateFamily::Kind::ExponentialPower:
      return 1.0 / (family.r * beta * beta);
    case UnivariateFamily::Kind::SkewNormal: {
      // quadrature: Var_{f^beta}(log f)
      const double s_eff = family.sigma / std::sqrt(beta);
      const double lo = family.mu - 60.0 * s_eff;
      const double hi = family.mu + 60.0 * s_eff;
      const double ref = family.logpdf(family.mode());
      auto weight = [&](double x) { return std::exp(beta * (family.logpdf(x) - ref)); };
      const double tol = 1e-12 * s_eff;
      const double z = integrate(weight, lo, hi, tol);
      const double m1 =
          integrate([&](double x) { return weight(x) * family.logpdf(x); }, lo, hi, tol) / z;
      const double m2 = integrate(
          [&](double x) { const double l = family.logpdf(x); return weight(x) * l * l; }, lo,
          hi, tol) / z;
      const double var = m2 - m1 * m1;
      if (!std::isfinite(var) || var < 0.0) {
        throw std::runtime_error("i_beta: quadrature failed (divergent integral?)");
      }
      return var;
    }
  }
  throw std::logic_error("unreachable");
}

SignedTempPath simplified_st_run(const SimplifiedConfig& cfg, long n_steps, RngStream& rng) {
  const double beta_min = cfg.effective_beta_min();
  const double ell0 = cfg.ell0;
  // I_0(beta) = 1/beta^2 convention, so ell(beta) = beta * ell0.
  TemperatureLadder ladder =
      ladder_eqn_beta(cfg.d, [ell0](double b) { return b * ell0; }, beta_min);
  const int n = ladder.levels();
  const int hottest = n - 1;

  SignedTempPath path;
  path.ladder_betas = ladder.betas;
  path.d = cfg.d;
  path.ell0 = ell0;
  path.beta_min = beta_min;
  path.level.reserve(static_cast<size_t>(n_steps) + 1);
  path.mode.reserve(static_cast<size_t>(n_steps) + 1);
  path.rung_proposed.assign(static_cast<size_t>(n > 1 ? n - 1 : 0), 0);
  path.rung_accepted.assign(static_cast<size_t>(n > 1 ? n - 1 : 0), 0);

  int level = 0;
  std::int8_t mode = rng.uniform() < cfg.p ? 1 : 2;
  path.level.push_back(level);
  path.mode.push_back(mode);

  for (long t = 1; t <= n_steps; ++t) {
    const double r = mode == 1 ? cfg.r1 : cfg.r2;
    // immediate within-mode mixing: the fresh iid coordinates enter the
    // acceptance ratio only through S = beta * sum_i lambda |x_i|^r ~ Gamma(d/r)
    const double s = rng.gamma(static_cast<double>(cfg.d) / r);
    const int w = rng.uniform() < 0.5 ? -1 : 1;
    const int prop = level + w;
    if (prop >= 0 && prop < n) {
      const double b = ladder.beta(level);
      const double bp = ladder.beta(prop);
      const double log_alpha = std::min(
          0.0, -(bp - b) * s / b + static_cast<double>(cfg.d) / r * std::log(bp / b));
      const int pair = std::min(level, prop);
      path.proposed++;
      path.rung_proposed[static_cast<size_t>(pair)]++;
      const double u = rng.uniform();
      if (std::log(u > 0.0 ? u : 0x1.0p-53) < log_alpha) {
        path.accepted++;
        path.rung_accepted[static_cast<size_t>(pair)]++;
        level = prop;
      }
    }
    if (level == hottest) {
      mode = rng.uniform() < cfg.p ? 1 : 2;
      if (path.first_hit_beta_min < 0) path.first_hit_beta_min = t;
    }
    path.level.push_back(level);
    path.mode.push_back(mode);
  }
  return path;
}

long simplified_hitting_time(const SimplifiedConfig& cfg, long cap, RngStream& rng) {
  const double beta_min = cfg.effective_beta_min();
  const double ell0 = cfg.ell0;
  TemperatureLadder ladder =
      ladder_eqn_beta(cfg.d, [ell0](double b) { return b * ell0; }, beta_min);
  const int n = ladder.levels();
  const int hottest = n - 1;
  int level = 0;
  std::int8_t mode = rng.uniform() < cfg.p ? 1 : 2;
  for (long t = 1; t <= cap; ++t) {
    const double r = mode == 1 ? cfg.r1 : cfg.r2;
    const double s = rng.gamma(static_cast<double>(cfg.d) / r);
    const int w = rng.uniform() < 0.5 ? -1 : 1;
    const int prop = level + w;
    if (prop >= 0 && prop < n) {
      const double b = ladder.beta(level);
      const double bp = ladder.beta(prop);
      const double log_alpha = std::min(
          0.0, -(bp - b) * s / b + static_cast<double>(cfg.d) / r * std::log(bp / b));
      const double u = rng.uniform();
      if (std::log(u > 0.0 ? u : 0x1.0p-53) < log_alpha) level = prop;
    }
    if (level == hottest) return t;
  }
  throw std::runtime_error("simplified_hitting_time: cap reached before hitting beta_min");
}

double h_transform(double x, double ell0, double beta_min) {
  if (x == 0.0) return 0.0;
  const double ax = std::abs(x);
  if (ax < beta_min - 1e-12 || ax > 1.0 + 1e-12) {
    throw std::invalid_argument("h_transform: |x| outside [beta_min, 1]");
  }
  const double mag = std::log(std::max(ax, beta_min) / beta_min) / ell0;
  return x > 0.0 ? mag : -mag;
}

double h_transform(double x, const std::function<double(double)>& ell, double beta_min) {
  if (x == 0.0) return 0.0;
  const double ax = std::abs(x);
  if (ax < beta_min - 1e-12 || ax > 1.0 + 1e-12) {
    throw std::invalid_argument("h_transform: |x| outside [beta_min, 1]");
  }
  const double mag = integrate([&](double u) { return 1.0 / ell(u); }, beta_min,
                               std::max(ax, beta_min), 1e-12);
  return x > 0.0 ? mag : -mag;
}

double z_transform(double h_val, double r1, double r2, double ell0) {
  if (h_val == 0.0) return 0.0;
  const double r = h_val > 0.0 ? r1 : r2;
  const double scale = 2.0 * normal_cdf(-ell0 / (2.0 * std::sqrt(r)));
  return h_val / std::sqrt(scale);
}

ReflectedPath skew_bm_simulate(double a, double b, double z_min, double z_max, double dt,
                               long n_steps, RngStream& rng) {
  if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("skew_bm_simulate: a, b must be > 0");
  if (!(z_min < 0.0 && z_max > 0.0)) {
    throw std::invalid_argument("skew_bm_simulate: need z_min < 0 < z_max");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("skew_bm_simulate: dt must be > 0");
  ReflectedPath path;
  path.dt = dt;
  path.z.reserve(static_cast<size_t>(n_steps) + 1);
  const double step = std::sqrt(dt);
  const double p_pos = a / (a + b);
  double z = 0.0;
  path.z.push_back(z);
  for (long t = 0; t < n_steps; ++t) {
    double zn = z + step * rng.gaussian();
    if (z == 0.0 || (z > 0.0 && zn <= 0.0) || (z < 0.0 && zn >= 0.0)) {
      const double mag = std::abs(zn);
      zn = rng.uniform() < p_pos ? mag : -mag;
    }
    for (int guard = 0; guard < 8 && (zn > z_max || zn < z_min); ++guard) {
      if (zn > z_max) zn = 2.0 * z_max - zn;
      if (zn < z_min) zn = 2.0 * z_min - zn;
    }
    z = zn;
    path.z.push_back(z);
  }
  return path;
}

WalshPath walsh_bm_simulate(const Eigen::Ref<const Eigen::VectorXd>& probs,
                            const Eigen::Ref<const Eigen::VectorXd>& arm_lengths, double dt,
                            long n_steps, RngStream& rng) {
  const int k = static_cast<int>(probs.size());
  if (k < 2) throw std::invalid_argument("walsh_bm_simulate: need k >= 2 arms");
  if (arm_lengths.size() != k) {
    throw std::invalid_argument("walsh_bm_simulate: |arm_lengths| != |probs|");
  }
  if (std::abs(probs.sum() - 1.0) > 1e-12 || (probs.array() < 0.0).any()) {
    throw std::invalid_argument("walsh_bm_simulate: probs must be a distribution");
  }
  if ((arm_lengths.array() <= 0.0).any()) {
    throw std::invalid_argument("walsh_bm_simulate: arm lengths must be positive");
  }
  auto draw_arm = [&]() {
    const double u = rng.uniform();
    double c = 0.0;
    for (int i = 0; i < k; ++i) {
      c += probs[i];
      if (u < c) return i;
    }
    return k - 1;
  };
  WalshPath path;
  path.dt = dt;
  path.arm.reserve(static_cast<size_t>(n_steps) + 1);
  path.radius.reserve(static_cast<size_t>(n_steps) + 1);
  const double step = std::sqrt(dt);
  int arm = draw_arm();
  double rho = 0.0;
  path.arm.push_back(arm);
  path.radius.push_back(rho);
  for (long t = 0; t < n_steps; ++t) {
    double rn = rho + step * rng.gaussian();
    if (rn <= 0.0) {
      arm = draw_arm();
      rn = -rn;
    }
    const double len = arm_lengths[arm];
    for (int guard = 0; guard < 8 && rn > len; ++guard) rn = 2.0 * len - rn;
    rho = rn;
    path.arm.push_back(arm);
    path.radius.push_back(rho);
  }
  return path;
}

ScalingFit mixing_scaling_fit(const SimplifiedConfig& cfg_template,
                              const std::vector<int>& d_values, int replicates,
                              RngStream& rng, long cap_per_run) {
  if (replicates < 2) {
    throw std::invalid_argument("mixing_scaling_fit: need at least 2 replicates");
  }
  const bool fixed = cfg_template.rule == SimplifiedConfig::BetaMinRule::Fixed;
  if (fixed && d_values.size() < 3) {
    throw std::invalid_argument("mixing_scaling_fit: need >= 3 dimensions for the slope fit");
  }
  if (!fixed && d_values.size() < 2) {
    throw std::invalid_argument("mixing_scaling_fit: need >= 2 dimensions");
  }
  ScalingFit out;
  out.d_values = d_values;
  for (int d : d_values) {
    SimplifiedConfig cfg = cfg_template;
    cfg.d = d;
    double sum = 0.0;
    for (int rep = 0; rep < replicates; ++rep) {
      sum += static_cast<double>(simplified_hitting_time(cfg, cap_per_run, rng));
    }
    out.mean_hit.push_back(sum / replicates);
  }
  if (fixed) {
    Eigen::VectorXd lx(static_cast<Eigen::Index>(d_values.size()));
    Eigen::VectorXd ly(static_cast<Eigen::Index>(d_values.size()));
    for (size_t i = 0; i < d_values.size(); ++i) {
      lx[static_cast<Eigen::Index>(i)] = std::log(static_cast<double>(d_values[i]));
      ly[static_cast<Eigen::Index>(i)] = std::log(out.mean_hit[i]);
    }
    const LineFit fit = fit_line(lx, ly);
    out.slope = fit.slope;
    out.r2 = fit.r2;
  } else {
    for (size_t i = 0; i < d_values.size(); ++i) {
      const double d = static_cast<double>(d_values[i]);
      const double ld = std::log(d);
      out.scaled.push_back(out.mean_hit[i] / (d * ld * ld));
    }
    double lo = out.scaled[0], hi = out.scaled[0];
    for (double v : out.scaled) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    out.scaled_spread = hi / lo;
  }
  return out;
}

SideUniformity piecewise_uniform_check(const std::vector<double>& h_values, int bins) {
  if (bins < 1) throw std::invalid_argument("piecewise_uniform_check: bins must be >= 1");
  std::vector<double> pos, neg;
  for (double h : h_values) {
    if (h > 0.0) pos.push_back(h);
    else if (h < 0.0) neg.push_back(-h);
  }
  if (pos.size() < 100 || neg.size() < 100) {
    throw std::runtime_error("piecewise_uniform_check: fewer than 100 samples on a side");
  }
  auto side_dev = [bins](const std::vector<double>& v) {
    double hi = 0.0;
    for (double h : v) hi = std::max(hi, h);
    // inflate the top edge so lattice points never sit on a bin boundary
    const double w = hi * (1.0 + 1e-9) / bins;
    std::vector<long> counts(static_cast<size_t>(bins), 0);
    for (double h : v) {
      int idx = static_cast<int>(h / w);
      if (idx >= bins) idx = bins - 1;
      counts[static_cast<size_t>(idx)]++;
    }
    const double mean = static_cast<double>(v.size()) / bins;
    double dev = 0.0;
    for (long c : counts) dev = std::max(dev, std::abs(static_cast<double>(c) - mean) / mean);
    return dev;
  };
  SideUniformity out;
  out.max_dev_pos = side_dev(pos);
  out.max_dev_neg = side_dev(neg);
  return out;
}

std::vector<double> h_values_of_path(const SignedTempPath& path) {
  const int n = static_cast<int>(path.ladder_betas.size());
  Eigen::VectorXd h_of_level(n);
  for (int i = 0; i < n; ++i) {
    h_of_level[i] = i == n - 1
                        ? 0.0
                        : std::log(path.ladder_betas[i] / path.beta_min) / path.ell0;
  }
  std::vector<double> out;
  out.reserve(static_cast<size_t>(path.steps()));
  for (long t = 0; t < path.steps(); ++t) {
    const double mag = h_of_level[path.level[static_cast<size_t>(t)]];
    out.push_back(path.mode[static_cast<size_t>(t)] == 1 ? mag : -mag);
  }
  return out;
}

}  // namespace wpt
