#include "wpt/mixture.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "wpt/numeric.hpp"

namespace wpt {

namespace {

constexpr double kWeightTol = 1e-12;

double fd_step(double xi) {
  static const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
  return h0 * std::max(1.0, std::abs(xi));
}

void check_dimension(int expected, Eigen::Index got, const char* where) {
  if (got != expected) {
    std::ostringstream os;
    os << where << ": dimension mismatch, expected " << expected << " got " << got;
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// UnivariateFamily

UnivariateFamily UnivariateFamily::gaussian(double mu, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian: sigma must be > 0");
  UnivariateFamily f;
  f.kind = Kind::Gaussian;
  f.mu = mu;
  f.sigma = sigma;
  return f;
}

UnivariateFamily UnivariateFamily::skew_normal(double mu, double sigma, double alpha) {
  if (!(sigma > 0.0)) throw std::invalid_argument("skew_normal: sigma must be > 0");
  UnivariateFamily f;
  f.kind = Kind::SkewNormal;
  f.mu = mu;
  f.sigma = sigma;
  f.alpha = alpha;
  return f;
}

UnivariateFamily UnivariateFamily::exponential_power(double lambda, double r, double mu) {
  if (!(lambda > 0.0) || !(r > 0.0)) {
    throw std::invalid_argument("exponential_power: lambda and r must be > 0");
  }
  UnivariateFamily f;
  f.kind = Kind::ExponentialPower;
  f.lambda = lambda;
  f.r = r;
  f.mu = mu;
  return f;
}

double UnivariateFamily::logpdf(double x) const {
  switch (kind) {
    case Kind::Gaussian: {
      const double z = (x - mu) / sigma;
      return log_normal_pdf(z) - std::log(sigma);
    }
    case Kind::SkewNormal: {
      const double z = (x - mu) / sigma;
      return M_LN2 - std::log(sigma) + log_normal_pdf(z) + log_normal_cdf(alpha * z);
    }
    case Kind::ExponentialPower: {
      // normaliser: int exp(-lambda |x|^r) dx = (2/r) Gamma(1/r) lambda^{-1/r}
      const double log_c = std::log(r / 2.0) + std::log(lambda) / r - std::lgamma(1.0 / r);
      return log_c - lambda * std::pow(std::abs(x - mu), r);
    }
  }
  return -std::numeric_limits<double>::infinity();
}

double UnivariateFamily::mode() const {
  if (kind != Kind::SkewNormal || alpha == 0.0) return mu;
  auto f = [this](double x) { return logpdf(x); };
  const double lo = alpha > 0.0 ? mu : mu - 2.0 * sigma;
  const double hi = alpha > 0.0 ? mu + 2.0 * sigma : mu;
  return golden_section_max(f, lo, hi, 1e-10 * sigma);
}

double UnivariateFamily::sample_tempered(double beta, RngStream& rng) const {
  if (!(beta > 0.0)) throw std::invalid_argument("sample_tempered: beta must be > 0");
  switch (kind) {
    case Kind::Gaussian:
      return mu + sigma / std::sqrt(beta) * rng.gaussian();
    case Kind::ExponentialPower: {
      // |x-mu|^r * beta * lambda ~ Gamma(1/r, 1), sign symmetric.
      const double u = rng.gamma(1.0 / r);
      const double mag = std::pow(u / (beta * lambda), 1.0 / r);
      return mu + (rng.uniform() < 0.5 ? -mag : mag);
    }
    case Kind::SkewNormal:
      throw std::domain_error("sample_tempered: no exact tempered sampler for skew-normal");
  }
  throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// MixtureComponent

MixtureComponent MixtureComponent::full_gaussian(double weight, Eigen::VectorXd mean,
                                                 Eigen::MatrixXd cov) {
  if (!(weight > 0.0) || weight >= 1.0 + kWeightTol) {
    throw std::invalid_argument("component weight must lie in (0,1]");
  }
  if (cov.rows() != cov.cols() || cov.rows() != mean.size()) {
    throw std::invalid_argument("full_gaussian: covariance/mean shape mismatch");
  }
  MixtureComponent c;
  c.weight = weight;
  c.shape = Shape::FullGaussian;
  c.mean = std::move(mean);
  c.cov = std::move(cov);
  Eigen::LLT<Eigen::MatrixXd> llt(c.cov);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("full_gaussian: covariance is not positive definite");
  }
  c.chol_ = llt.matrixL();
  c.log_det_cov_ = 2.0 * c.chol_.diagonal().array().log().sum();
  return c;
}

MixtureComponent MixtureComponent::iid_product(double weight, UnivariateFamily family,
                                               int dim) {
  if (!(weight > 0.0) || weight >= 1.0 + kWeightTol) {
    throw std::invalid_argument("component weight must lie in (0,1]");
  }
  if (dim < 1) throw std::invalid_argument("iid_product: dim must be >= 1");
  MixtureComponent c;
  c.weight = weight;
  c.shape = Shape::IIDProduct;
  c.family = family;
  c.iid_dim = dim;
  if (family.kind == UnivariateFamily::Kind::Gaussian) {
    // keep the Gaussian caches so sampling and WSGM evaluation see a
    // FullGaussian-equivalent component
    c.mean = Eigen::VectorXd::Constant(dim, family.mu);
    c.cov = Eigen::MatrixXd::Identity(dim, dim) * (family.sigma * family.sigma);
    c.chol_ = Eigen::MatrixXd::Identity(dim, dim) * family.sigma;
    c.log_det_cov_ = 2.0 * dim * std::log(family.sigma);
  }
  return c;
}

double MixtureComponent::log_density(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (shape == Shape::FullGaussian) {
    const Eigen::VectorXd y =
        chol_.triangularView<Eigen::Lower>().solve(x - mean);
    const double d = static_cast<double>(mean.size());
    return -0.5 * (d * kLogTwoPi + log_det_cov_ + y.squaredNorm());
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += family.logpdf(x[i]);
  return s;
}

Eigen::VectorXd MixtureComponent::mode_point() const {
  if (shape == Shape::FullGaussian) return mean;
  return Eigen::VectorXd::Constant(iid_dim, family.mode());
}

// ---------------------------------------------------------------------------
// MixtureTarget

MixtureTarget::MixtureTarget(std::vector<MixtureComponent> components, int dimension)
    : comps_(std::move(components)), dim_(dimension) {
  if (comps_.empty()) throw std::invalid_argument("mixture needs at least one component");
  if (dim_ < 1) throw std::invalid_argument("mixture dimension must be >= 1");
  double wsum = 0.0;
  all_gaussian_ = true;
  for (const auto& c : comps_) {
    if (c.dimension() != dim_) {
      throw std::invalid_argument("all components must share the mixture dimension");
    }
    wsum += c.weight;
    all_gaussian_ = all_gaussian_ && c.is_gaussian();
  }
  if (std::abs(wsum - 1.0) > kWeightTol) {
    throw std::invalid_argument("component weights must sum to 1 within 1e-12");
  }
}

double log_density(const MixtureTarget& target, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_dimension(target.dimension(), x.size(), "log_density");
  Eigen::VectorXd terms(target.size());
  for (int j = 0; j < target.size(); ++j) {
    const auto& c = target.component(j);
    terms[j] = std::log(c.weight) + c.log_density(x);
  }
  return log_sum_exp(terms);
}

double component_log_density(const MixtureTarget& target, int j,
                             const Eigen::Ref<const Eigen::VectorXd>& x) {
  const auto& c = target.component(j);
  return std::log(c.weight) + c.log_density(x);
}

Eigen::VectorXd grad_log_density(const MixtureTarget& target,
                                 const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_dimension(target.dimension(), x.size(), "grad_log_density");
  const int d = target.dimension();
  if (target.all_gaussian()) {
    // grad log pi = sum_j resp_j * Sigma_j^{-1} (mu_j - x)
    Eigen::VectorXd logh(target.size());
    for (int j = 0; j < target.size(); ++j) logh[j] = component_log_density(target, j, x);
    const double lse = log_sum_exp(logh);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
    for (int j = 0; j < target.size(); ++j) {
      const auto& c = target.component(j);
      const double resp = std::exp(logh[j] - lse);
      const Eigen::VectorXd y = c.chol().triangularView<Eigen::Lower>().solve(x - c.mean);
      const Eigen::VectorXd gj =
          -c.chol().transpose().triangularView<Eigen::Upper>().solve(y);
      g += resp * gj;
    }
    return g;
  }
  Eigen::VectorXd g(d);
  Eigen::VectorXd xp = x;
  for (int i = 0; i < d; ++i) {
    const double h = fd_step(x[i]);
    xp[i] = x[i] + h;
    const double fp = log_density(target, xp);
    xp[i] = x[i] - h;
    const double fm = log_density(target, xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd hessian_log_density(const MixtureTarget& target,
                                    const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_dimension(target.dimension(), x.size(), "hessian_log_density");
  const int d = target.dimension();
  if (target.size() == 1 && target.component(0).shape == MixtureComponent::Shape::FullGaussian) {
    const auto& c = target.component(0);
    Eigen::MatrixXd inv = c.chol().triangularView<Eigen::Lower>().solve(
        Eigen::MatrixXd::Identity(d, d));
    inv = c.chol().transpose().triangularView<Eigen::Upper>().solve(inv);
    return -inv;
  }
  const double f0 = log_density(target, x);
  Eigen::MatrixXd H(d, d);
  Eigen::VectorXd xp = x;
  for (int i = 0; i < d; ++i) {
    const double hi = fd_step(x[i]);
    xp[i] = x[i] + hi;
    const double fp = log_density(target, xp);
    xp[i] = x[i] - hi;
    const double fm = log_density(target, xp);
    xp[i] = x[i];
    H(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
    for (int j = i + 1; j < d; ++j) {
      const double hj = fd_step(x[j]);
      xp[i] = x[i] + hi;
      xp[j] = x[j] + hj;
      const double fpp = log_density(target, xp);
      xp[j] = x[j] - hj;
      const double fpm = log_density(target, xp);
      xp[i] = x[i] - hi;
      const double fmm = log_density(target, xp);
      xp[j] = x[j] + hj;
      const double fmp = log_density(target, xp);
      xp[i] = x[i];
      xp[j] = x[j];
      H(i, j) = H(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
    }
  }
  return 0.5 * (H + H.transpose());
}

Eigen::MatrixXd curvature_at_mode(const MixtureTarget& target,
                                  const Eigen::Ref<const Eigen::VectorXd>& mu) {
  const Eigen::MatrixXd neg_h = -hessian_log_density(target, mu);
  Eigen::LLT<Eigen::MatrixXd> llt(neg_h);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("curvature_at_mode: not a regular mode (negated Hessian is not positive definite)");
  }
  const int d = target.dimension();
  return llt.solve(Eigen::MatrixXd::Identity(d, d));
}

Eigen::VectorXd laplace_weights(const MixtureTarget& target,
                                const std::vector<Eigen::VectorXd>& modes,
                                const std::vector<Eigen::MatrixXd>& curvatures) {
  if (modes.empty()) throw std::invalid_argument("laplace_weights: need at least one mode");
  if (modes.size() != curvatures.size()) {
    throw std::invalid_argument("laplace_weights: |M| != |S|");
  }
  const int k = static_cast<int>(modes.size());
  Eigen::VectorXd logw(k);
  for (int j = 0; j < k; ++j) {
    Eigen::LLT<Eigen::MatrixXd> llt(curvatures[static_cast<size_t>(j)]);
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument("laplace_weights: curvature matrix is not positive definite");
    }
    const Eigen::MatrixXd L = llt.matrixL();
    const double half_log_det = L.diagonal().array().log().sum();
    logw[j] = log_density(target, modes[static_cast<size_t>(j)]) + half_log_det;
  }
  const double lse = log_sum_exp(logw);
  return (logw.array() - lse).exp();
}

Eigen::VectorXd sample_component(const MixtureTarget& target, int j, double beta,
                                 RngStream& rng) {
  if (!(beta > 0.0)) throw std::invalid_argument("sample_component: beta must be > 0");
  const auto& c = target.component(j);
  if (!c.is_gaussian()) {
    throw std::domain_error("sample_component: component is not Gaussian; sample its Laplace surrogate via HatContext::sample_mode");
  }
  const Eigen::VectorXd z = rng.gaussian_vector(c.mean.size());
  return c.mean + c.chol() * z / std::sqrt(beta);
}

// ---------------------------------------------------------------------------
// HatContext

HatContext HatContext::build(const std::vector<Eigen::VectorXd>& modes,
                             const std::vector<Eigen::MatrixXd>& curvatures,
                             const Eigen::VectorXd& laplace_w,
                             const Eigen::VectorXd& cold_logpdf) {
  HatContext ctx;
  const int k = static_cast<int>(modes.size());
  if (k < 1) throw std::invalid_argument("HatContext: need at least one mode");
  if (static_cast<int>(curvatures.size()) != k || laplace_w.size() != k ||
      cold_logpdf.size() != k) {
    throw std::invalid_argument("HatContext: |M|, |S|, |W_hat| must match");
  }
  if (std::abs(laplace_w.sum() - 1.0) > kWeightTol) {
    throw std::invalid_argument("HatContext: Laplace weights must sum to 1 within 1e-12");
  }
  ctx.modes = modes;
  ctx.curvatures = curvatures;
  ctx.laplace_w = laplace_w;
  ctx.cold_logpdf = cold_logpdf;
  ctx.dim = static_cast<int>(modes.front().size());
  ctx.log_det.resize(k);
  ctx.chol.reserve(static_cast<size_t>(k));
  for (int j = 0; j < k; ++j) {
    if (modes[static_cast<size_t>(j)].size() != ctx.dim) {
      throw std::invalid_argument("HatContext: mode points must share dimension");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(curvatures[static_cast<size_t>(j)]);
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument("HatContext: curvature matrix fails SPD check");
    }
    ctx.chol.emplace_back(llt.matrixL());
    ctx.log_det[j] = 2.0 * ctx.chol.back().diagonal().array().log().sum();
  }
  return ctx;
}

double HatContext::mahalanobis2(int j, const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::VectorXd y = chol[static_cast<size_t>(j)]
                                .triangularView<Eigen::Lower>()
                                .solve(x - modes[static_cast<size_t>(j)]);
  return y.squaredNorm();
}

double HatContext::assignment_score(int j, const Eigen::Ref<const Eigen::VectorXd>& x,
                                    double beta) const {
  return std::log(laplace_w[j]) - 0.5 * log_det[j] - 0.5 * beta * mahalanobis2(j, x);
}

Eigen::VectorXd HatContext::sample_mode(int j, double beta, RngStream& rng) const {
  if (!(beta > 0.0)) throw std::invalid_argument("sample_mode: beta must be > 0");
  const Eigen::VectorXd z = rng.gaussian_vector(dim);
  return modes[static_cast<size_t>(j)] + chol[static_cast<size_t>(j)] * z / std::sqrt(beta);
}

HatContext make_hat_context(const MixtureTarget& target,
                            const std::vector<Eigen::VectorXd>& mode_points) {
  const int k = static_cast<int>(mode_points.size());
  std::vector<Eigen::MatrixXd> curvatures;
  curvatures.reserve(static_cast<size_t>(k));
  Eigen::VectorXd cold(k);
  for (int j = 0; j < k; ++j) {
    curvatures.push_back(curvature_at_mode(target, mode_points[static_cast<size_t>(j)]));
    cold[j] = log_density(target, mode_points[static_cast<size_t>(j)]);
  }
  const Eigen::VectorXd w = laplace_weights(target, mode_points, curvatures);
  return HatContext::build(mode_points, curvatures, w, cold);
}

HatContext make_hat_context(const MixtureTarget& target) {
  std::vector<Eigen::VectorXd> modes;
  modes.reserve(static_cast<size_t>(target.size()));
  for (int j = 0; j < target.size(); ++j) modes.push_back(target.component(j).mode_point());
  return make_hat_context(target, modes);
}

// ---------------------------------------------------------------------------
// JSON loading

namespace {

using nlohmann::json;

Eigen::MatrixXd parse_matrix(const json& jcov, int d, const std::string& where) {
  if (jcov.is_object()) {
    if (!jcov.contains("diag")) {
      throw std::invalid_argument(where + ": matrix object must have a \"diag\" field");
    }
    const auto diag = jcov.at("diag").get<std::vector<double>>();
    if (static_cast<int>(diag.size()) != d) {
      throw std::invalid_argument(where + ": diag length != dimension");
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) m(i, i) = diag[static_cast<size_t>(i)];
    return m;
  }
  const auto flat = jcov.get<std::vector<double>>();
  if (static_cast<int>(flat.size()) != d * d) {
    throw std::invalid_argument(where + ": expected row-major array of length d*d");
  }
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = flat[static_cast<size_t>(i * d + j)];
  return m;
}

UnivariateFamily parse_family(const json& jf) {
  const std::string type = jf.at("type").get<std::string>();
  if (type == "gaussian") {
    return UnivariateFamily::gaussian(jf.at("mu").get<double>(), jf.at("sigma").get<double>());
  }
  if (type == "skew_normal") {
    return UnivariateFamily::skew_normal(jf.at("mu").get<double>(), jf.at("sigma").get<double>(),
                                         jf.at("alpha").get<double>());
  }
  if (type == "exponential_power") {
    return UnivariateFamily::exponential_power(jf.at("lambda").get<double>(),
                                               jf.at("r").get<double>(),
                                               jf.value("mu", 0.0));
  }
  throw std::invalid_argument("unknown univariate family type: " + type);
}

}  // namespace

MixtureTarget load_mixture_json(const std::string& json_text) {
  const json doc = json::parse(json_text);
  const int d = doc.at("dimension").get<int>();
  std::vector<MixtureComponent> comps;
  for (const auto& jc : doc.at("components")) {
    const double w = jc.at("weight").get<double>();
    const std::string kind = jc.at("kind").get<std::string>();
    if (kind == "gaussian") {
      const auto mean_v = jc.at("mean").get<std::vector<double>>();
      if (static_cast<int>(mean_v.size()) != d) {
        throw std::invalid_argument("component mean length != dimension");
      }
      Eigen::VectorXd mean = Eigen::Map<const Eigen::VectorXd>(mean_v.data(), d);
      comps.push_back(MixtureComponent::full_gaussian(w, mean, parse_matrix(jc.at("cov"), d, "cov")));
    } else if (kind == "iid_product") {
      comps.push_back(MixtureComponent::iid_product(w, parse_family(jc.at("family")), d));
    } else {
      throw std::invalid_argument("unknown component kind: " + kind);
    }
  }
  return MixtureTarget(std::move(comps), d);
}

MixtureTarget load_mixture_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open target file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_mixture_json(ss.str());
}

}  // namespace wpt
