#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <string>

#include "wpt/mixture.hpp"

namespace wpt {

enum class TemperKind { Power, Wsgm, TheoremB, TheoremC, Bhat, Hat };
enum class GVariant { Canonical, Robust };

TemperKind temper_kind_from_string(const std::string& s);
std::string to_string(TemperKind k);
GVariant g_variant_from_string(const std::string& s);
std::string to_string(GVariant g);

// A tempered-target construction over a base density. The base is either a
// MixtureTarget (component structure available) or an opaque log-density;
// Bhat/Hat additionally need a HatContext, Wsgm needs one when the mixture is
// not all-Gaussian.
class TemperedTarget {
 public:
  TemperedTarget(std::shared_ptr<const MixtureTarget> mixture, TemperKind kind,
                 std::shared_ptr<const HatContext> ctx = nullptr,
                 GVariant g = GVariant::Canonical);

  static TemperedTarget opaque(std::function<double(const Eigen::VectorXd&)> log_pi,
                               int dim, TemperKind kind,
                               std::shared_ptr<const HatContext> ctx = nullptr,
                               GVariant g = GVariant::Canonical);

  double logpdf(double beta, const Eigen::Ref<const Eigen::VectorXd>& x) const;

  // log pi(x) of the cold target.
  double base_logpdf(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  int dimension() const { return dim_; }
  TemperKind kind() const { return kind_; }
  GVariant g_variant() const { return g_; }
  const MixtureTarget* mixture() const { return mixture_.get(); }
  const HatContext* context() const { return ctx_.get(); }
  std::shared_ptr<const HatContext> context_ptr() const { return ctx_; }

 private:
  TemperedTarget() = default;

  std::shared_ptr<const MixtureTarget> mixture_;
  std::function<double(const Eigen::VectorXd&)> opaque_;
  TemperKind kind_ = TemperKind::Power;
  GVariant g_ = GVariant::Canonical;
  std::shared_ptr<const HatContext> ctx_;
  int dim_ = 0;
};

// --- individual constructions ----------------------------------------------

// beta * log pi(x).
double power_logpdf(const TemperedTarget& t, double beta,
                    const Eigen::Ref<const Eigen::VectorXd>& x);

// log sum_j w_j phi(x; mu_j, Sigma_j / beta): the weight-stabilised mixture,
// normalised. Uses the component parameters for all-Gaussian mixtures and the
// Laplace surrogate (w_hat, M, S) otherwise.
double wsgm_logpdf(const TemperedTarget& t, double beta,
                   const Eigen::Ref<const Eigen::VectorXd>& x);

// Weight-preserving form #1, evaluated on the component assigned by nearest
// Mahalanobis mode:
//   log h_j(x) + ((1-beta)/2) * g^T (-H)^{-1} g,  g = grad log h_j, H = hess log h_j.
// For Gaussian components the curvature form equals the Mahalanobis distance
// (x-mu_j)^T Sigma_j^{-1} (x-mu_j), which is how it is computed here.
double theoremB_logpdf(const TemperedTarget& t, double beta,
                       const Eigen::Ref<const Eigen::VectorXd>& x);

// Weight-preserving form #2 on the assigned component:
//   beta * log h_j(x) + (1-beta) * log h_j(mu_j).
double theoremC_logpdf(const TemperedTarget& t, double beta,
                       const Eigen::Ref<const Eigen::VectorXd>& x);

// The same curvature adjustment applied to the whole of log pi instead of a
// single component. Between modes the negated Hessian loses positive
// definiteness and the construction blows up; that state is reported as an
// error rather than a value.
double hessian_adjusted_global_logpdf(const MixtureTarget& target, double beta,
                                      const Eigen::Ref<const Eigen::VectorXd>& x);

// A(x, beta) = argmax_j w_hat_j phi(x | mu_j, Sigma_j/beta), ties to the
// lowest index.
int mode_assign(const HatContext& ctx, const Eigen::Ref<const Eigen::VectorXd>& x,
                double beta);

// beta * log pi(x) + (1-beta) * log pi(mu_{A(x,beta)}).
double bhat_logpdf(const std::function<double(const Eigen::VectorXd&)>& log_pi,
                   const HatContext& ctx, const Eigen::Ref<const Eigen::VectorXd>& x,
                   double beta);

// Hessian-adjusted target: BHAT where the hot and cold assignments agree,
// G(x, beta) otherwise. Canonical G reduces to
//   log pi(mu_A) - (beta/2)(x-mu_A)^T Sigma_A^{-1} (x-mu_A);
// Robust G is the P-weighted interpolation between pi(x) and the BHAT value.
double hat_logpdf(const std::function<double(const Eigen::VectorXd&)>& log_pi,
                  const HatContext& ctx, const Eigen::Ref<const Eigen::VectorXd>& x,
                  double beta, GVariant variant);

// Canonical G exactly as printed, with ((2pi)^d Sigma)^{1/2} read as the
// determinant; kept alongside the simplified form so their equality is testable.
double hat_canonical_g_raw(const std::function<double(const Eigen::VectorXd&)>& log_pi,
                           const HatContext& ctx,
                           const Eigen::Ref<const Eigen::VectorXd>& x, double beta);

// Normalised W_{(j,beta)} proportional to w_j^beta |Sigma_j|^{(1-beta)/2}.
Eigen::VectorXd theoretical_power_weight(const Eigen::Ref<const Eigen::VectorXd>& w,
                                         const std::vector<Eigen::MatrixXd>& sigmas,
                                         double beta);

// log K(beta) = -log int pi_beta(x) dx for the construction `kind`, exact for
// single Gaussians and a separated-modes approximation otherwise. Throws for
// bases without component structure; use occupancy estimation there.
double log_pseudo_prior(const TemperedTarget& t, double beta);

}  // namespace wpt
