#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wpt/rng.hpp"

namespace wpt {

// One-dimensional component family. Log-densities are normalised.
struct UnivariateFamily {
  enum class Kind { Gaussian, SkewNormal, ExponentialPower };

  Kind kind = Kind::Gaussian;
  double mu = 0.0;
  double sigma = 1.0;   // Gaussian / SkewNormal scale
  double alpha = 0.0;   // SkewNormal shape
  double lambda = 1.0;  // ExponentialPower rate
  double r = 2.0;       // ExponentialPower exponent

  static UnivariateFamily gaussian(double mu, double sigma);
  static UnivariateFamily skew_normal(double mu, double sigma, double alpha);
  static UnivariateFamily exponential_power(double lambda, double r, double mu = 0.0);

  double logpdf(double x) const;

  // Location of the density maximum. Skew-normal modes have no closed form
  // and are found by golden-section search (tolerance 1e-10 * sigma).
  double mode() const;

  // Exact draw from the normalised tempered density f(x)^beta.
  // Supported for Gaussian (scale inflation) and ExponentialPower
  // (gamma-transform method); there is no exact tempered sampler for the
  // skew-normal, callers use its Laplace surrogate instead.
  double sample_tempered(double beta, RngStream& rng) const;
};

struct MixtureComponent {
  enum class Shape { FullGaussian, IIDProduct };

  double weight = 1.0;
  Shape shape = Shape::FullGaussian;

  // FullGaussian
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  // IIDProduct
  UnivariateFamily family;
  int iid_dim = 0;

  static MixtureComponent full_gaussian(double weight, Eigen::VectorXd mean,
                                        Eigen::MatrixXd cov);
  static MixtureComponent iid_product(double weight, UnivariateFamily family, int dim);

  int dimension() const { return shape == Shape::FullGaussian ? static_cast<int>(mean.size()) : iid_dim; }
  bool is_gaussian() const {
    return shape == Shape::FullGaussian ||
           (shape == Shape::IIDProduct && family.kind == UnivariateFamily::Kind::Gaussian);
  }

  // Normalised component log-density g_j.
  double log_density(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  // Cholesky factor and log-determinant of cov (FullGaussian only).
  const Eigen::MatrixXd& chol() const { return chol_; }
  double log_det_cov() const { return log_det_cov_; }

  // Component mode point: the mean for FullGaussian, the per-coordinate
  // family mode for IIDProduct.
  Eigen::VectorXd mode_point() const;

 private:
  Eigen::MatrixXd chol_;
  double log_det_cov_ = 0.0;
};

// Target density pi(x) = sum_j w_j g_j(x) with sum_j w_j = 1.
class MixtureTarget {
 public:
  MixtureTarget(std::vector<MixtureComponent> components, int dimension);

  int dimension() const { return dim_; }
  int size() const { return static_cast<int>(comps_.size()); }
  const MixtureComponent& component(int j) const { return comps_[static_cast<size_t>(j)]; }
  const std::vector<MixtureComponent>& components() const { return comps_; }
  bool all_gaussian() const { return all_gaussian_; }

 private:
  std::vector<MixtureComponent> comps_;
  int dim_;
  bool all_gaussian_;
};

double log_density(const MixtureTarget& target, const Eigen::Ref<const Eigen::VectorXd>& x);

// log h_j(x) = log w_j + log g_j(x).
double component_log_density(const MixtureTarget& target, int j,
                             const Eigen::Ref<const Eigen::VectorXd>& x);

// Analytic for all-Gaussian mixtures, central finite differences otherwise
// (step cbrt(eps) * max(1, |x_i|) per coordinate).
Eigen::VectorXd grad_log_density(const MixtureTarget& target,
                                 const Eigen::Ref<const Eigen::VectorXd>& x);

// Analytic (-Sigma^{-1}) for a single Gaussian component, finite differences
// otherwise; output symmetrised.
Eigen::MatrixXd hessian_log_density(const MixtureTarget& target,
                                    const Eigen::Ref<const Eigen::VectorXd>& x);

// Sigma = -(grad^2 log pi(mu))^{-1}; throws if the mode is not regular
// (negated Hessian fails its Cholesky check).
Eigen::MatrixXd curvature_at_mode(const MixtureTarget& target,
                                  const Eigen::Ref<const Eigen::VectorXd>& mu);

// w_hat_j = pi(mu_j)|Sigma_j|^{1/2} / sum_k pi(mu_k)|Sigma_k|^{1/2}, in log space.
Eigen::VectorXd laplace_weights(const MixtureTarget& target,
                                const std::vector<Eigen::VectorXd>& modes,
                                const std::vector<Eigen::MatrixXd>& curvatures);

// Exact draw from N(mu_j, Sigma_j / beta) for a Gaussian component j.
Eigen::VectorXd sample_component(const MixtureTarget& target, int j, double beta,
                                 RngStream& rng);

// Mode points, curvatures and Laplace weights backing the Hessian-adjusted
// targets and the mode assignment function.
struct HatContext {
  std::vector<Eigen::VectorXd> modes;
  std::vector<Eigen::MatrixXd> curvatures;
  Eigen::VectorXd laplace_w;
  Eigen::VectorXd cold_logpdf;  // log pi(mu_k)

  // caches derived from curvatures
  std::vector<Eigen::MatrixXd> chol;
  Eigen::VectorXd log_det;

  int dim = 0;
  int size() const { return static_cast<int>(modes.size()); }

  static HatContext build(const std::vector<Eigen::VectorXd>& modes,
                          const std::vector<Eigen::MatrixXd>& curvatures,
                          const Eigen::VectorXd& laplace_w,
                          const Eigen::VectorXd& cold_logpdf);

  // Tempered Gaussian responsibility score
  //   log w_hat_j - (1/2) log|Sigma_j| - (beta/2)(x-mu_j)^T Sigma_j^{-1} (x-mu_j)
  // (terms shared across j dropped).
  double assignment_score(int j, const Eigen::Ref<const Eigen::VectorXd>& x,
                          double beta) const;

  double mahalanobis2(int j, const Eigen::Ref<const Eigen::VectorXd>& x) const;

  Eigen::VectorXd sample_mode(int j, double beta, RngStream& rng) const;
};

// Context from known mode points: curvatures by curvature_at_mode, weights by
// laplace_weights.
HatContext make_hat_context(const MixtureTarget& target,
                            const std::vector<Eigen::VectorXd>& mode_points);

// Context with mode points taken from the component structure (means for
// Gaussians, golden-section refined per-coordinate modes for IID products).
HatContext make_hat_context(const MixtureTarget& target);

// JSON loading; see README for the schema. Matrices are flat row-major
// arrays, {"diag": [...]} is accepted as a shortcut.
MixtureTarget load_mixture_json(const std::string& json_text);
MixtureTarget load_mixture_file(const std::string& path);

}  // namespace wpt
