#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "wpt/mixture.hpp"
#include "wpt/rng.hpp"
#include "wpt/tempered.hpp"

namespace wpt {

struct KernelConfig {
  enum class Kind { Rwm, ModalIndependence };
  Kind kind = Kind::Rwm;
  double scale = 1.0;          // initial proposal scale (Rwm)
  bool adapt = true;           // adapt during burn-in only
  double target_accept = 0.234;
  bool exact_resample = false;  // ModalIndependence: skip the accept step
};

struct StepResult {
  bool accepted = false;
  double log_alpha = 0.0;  // min(0, log acceptance ratio)
  double logpdf = 0.0;     // log-density of the returned state
};

// One random-walk Metropolis step, x updated in place on acceptance.
// logpdf_x must be the (finite) log-density at the current x.
template <class LogPdf>
StepResult rwm_step(LogPdf&& logpdf, Eigen::VectorXd& x, double logpdf_x,
                    double scale, RngStream& rng) {
  if (!std::isfinite(logpdf_x)) {
    throw std::invalid_argument("rwm_step: log-density at the current state is not finite");
  }
  Eigen::VectorXd y = x + scale * rng.gaussian_vector(x.size());
  const double lp_y = logpdf(y);
  StepResult out;
  out.log_alpha = std::min(0.0, lp_y - logpdf_x);
  const double u = rng.uniform();
  if (std::log(u > 0.0 ? u : 0x1.0p-53) < out.log_alpha) {
    x.swap(y);
    out.accepted = true;
    out.logpdf = lp_y;
  } else {
    out.logpdf = logpdf_x;
  }
  return out;
}

template <class LogPdf>
StepResult rwm_step(LogPdf&& logpdf, Eigen::VectorXd& x, double scale, RngStream& rng) {
  return rwm_step(logpdf, x, logpdf(x), scale, rng);
}

// Robbins-Monro log-scale update with gain iter^{-0.6}.
inline double adapt_scale(double scale, bool accepted, long iter, double target_accept) {
  const double gain = std::pow(static_cast<double>(iter < 1 ? 1 : iter), -0.6);
  return scale * std::exp(gain * ((accepted ? 1.0 : 0.0) - target_accept));
}

// Local modal independence sampler: proposes an exact draw from the tempered
// Gaussian (surrogate) of the mode selected by the coordinate-mean half-space
// rule (component 1 when x_bar < 0, component 2 otherwise), then applies the
// independence-proposal Metropolis-Hastings correction. Two-mode contexts only.
StepResult modal_independence_step(const TemperedTarget& target, const HatContext& ctx,
                                   Eigen::VectorXd& x, double logpdf_x, double beta,
                                   RngStream& rng, bool exact_resample = false);

}  // namespace wpt
