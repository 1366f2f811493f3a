#include "wpt/samplers.hpp"

#include "wpt/numeric.hpp"

namespace wpt {

namespace {

double surrogate_logpdf(const HatContext& ctx, int j,
                        const Eigen::Ref<const Eigen::VectorXd>& x, double beta) {
  const double d = static_cast<double>(ctx.dim);
  return -0.5 * (d * kLogTwoPi + ctx.log_det[j] - d * std::log(beta) +
                 beta * ctx.mahalanobis2(j, x));
}

}  // namespace

StepResult modal_independence_step(const TemperedTarget& target, const HatContext& ctx,
                                   Eigen::VectorXd& x, double logpdf_x, double beta,
                                   RngStream& rng, bool exact_resample) {
  if (ctx.size() != 2) {
    throw std::domain_error("modal_independence_step: requires exactly two modes");
  }
  if (!std::isfinite(logpdf_x)) {
    throw std::invalid_argument("modal_independence_step: non-finite log-density at current state");
  }
  const int sel_x = x.mean() < 0.0 ? 0 : 1;
  Eigen::VectorXd y = ctx.sample_mode(sel_x, beta, rng);
  StepResult out;
  if (exact_resample) {
    x.swap(y);
    out.accepted = true;
    out.log_alpha = 0.0;
    out.logpdf = target.logpdf(beta, x);
    return out;
  }
  const int sel_y = y.mean() < 0.0 ? 0 : 1;
  const double lp_y = target.logpdf(beta, y);
  const double log_q_xy = surrogate_logpdf(ctx, sel_x, y, beta);
  const double log_q_yx = surrogate_logpdf(ctx, sel_y, x, beta);
  out.log_alpha = std::min(0.0, lp_y + log_q_yx - logpdf_x - log_q_xy);
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

}  // namespace wpt
