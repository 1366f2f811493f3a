#include "wpt/tempered.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "wpt/numeric.hpp"

namespace wpt {

TemperKind temper_kind_from_string(const std::string& s) {
  if (s == "power") return TemperKind::Power;
  if (s == "wsgm") return TemperKind::Wsgm;
  if (s == "theorem_b") return TemperKind::TheoremB;
  if (s == "theorem_c") return TemperKind::TheoremC;
  if (s == "bhat") return TemperKind::Bhat;
  if (s == "hat") return TemperKind::Hat;
  throw std::invalid_argument("unknown temper_kind: " + s);
}

std::string to_string(TemperKind k) {
  switch (k) {
    case TemperKind::Power: return "power";
    case TemperKind::Wsgm: return "wsgm";
    case TemperKind::TheoremB: return "theorem_b";
    case TemperKind::TheoremC: return "theorem_c";
    case TemperKind::Bhat: return "bhat";
    case TemperKind::Hat: return "hat";
  }
  return "?";
}

GVariant g_variant_from_string(const std::string& s) {
  if (s == "canonical") return GVariant::Canonical;
  if (s == "robust") return GVariant::Robust;
  throw std::invalid_argument("unknown g_variant: " + s);
}

std::string to_string(GVariant g) {
  return g == GVariant::Canonical ? "canonical" : "robust";
}

TemperedTarget::TemperedTarget(std::shared_ptr<const MixtureTarget> mixture,
                               TemperKind kind, std::shared_ptr<const HatContext> ctx,
                               GVariant g)
    : mixture_(std::move(mixture)), kind_(kind), g_(g), ctx_(std::move(ctx)) {
  if (!mixture_) throw std::invalid_argument("TemperedTarget: null mixture");
  dim_ = mixture_->dimension();
  if ((kind_ == TemperKind::Bhat || kind_ == TemperKind::Hat) && !ctx_) {
    throw std::invalid_argument("TemperedTarget: BHAT/HAT need a HatContext");
  }
  if (kind_ == TemperKind::Wsgm && !mixture_->all_gaussian() && !ctx_) {
    throw std::domain_error(
        "TemperedTarget: WSGM over non-Gaussian components needs Laplace surrogates (HatContext)");
  }
}

TemperedTarget TemperedTarget::opaque(std::function<double(const Eigen::VectorXd&)> log_pi,
                                      int dim, TemperKind kind,
                                      std::shared_ptr<const HatContext> ctx, GVariant g) {
  TemperedTarget t;
  t.opaque_ = std::move(log_pi);
  t.kind_ = kind;
  t.g_ = g;
  t.ctx_ = std::move(ctx);
  t.dim_ = dim;
  if (kind != TemperKind::Power && !t.ctx_) {
    throw std::invalid_argument("opaque TemperedTarget supports only Power without a HatContext");
  }
  return t;
}

double TemperedTarget::base_logpdf(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (mixture_) return log_density(*mixture_, x);
  return opaque_(x);
}

double TemperedTarget::logpdf(double beta, const Eigen::Ref<const Eigen::VectorXd>& x) const {
  switch (kind_) {
    case TemperKind::Power: return power_logpdf(*this, beta, x);
    case TemperKind::Wsgm: return wsgm_logpdf(*this, beta, x);
    case TemperKind::TheoremB: return theoremB_logpdf(*this, beta, x);
    case TemperKind::TheoremC: return theoremC_logpdf(*this, beta, x);
    case TemperKind::Bhat:
      return bhat_logpdf([this](const Eigen::VectorXd& y) { return base_logpdf(y); }, *ctx_, x, beta);
    case TemperKind::Hat:
      return hat_logpdf([this](const Eigen::VectorXd& y) { return base_logpdf(y); }, *ctx_, x, beta, g_);
  }
  return -std::numeric_limits<double>::infinity();
}

double power_logpdf(const TemperedTarget& t, double beta,
                    const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (!(beta > 0.0)) throw std::invalid_argument("power_logpdf: beta must be > 0");
  return beta * t.base_logpdf(x);
}

namespace {

// log phi(x; mu, Sigma/beta) from the cached Cholesky of Sigma.
double tempered_gaussian_logpdf(const Eigen::Ref<const Eigen::VectorXd>& x,
                                const Eigen::VectorXd& mu, const Eigen::MatrixXd& chol,
                                double log_det, double beta) {
  const Eigen::VectorXd y = chol.triangularView<Eigen::Lower>().solve(x - mu);
  const double d = static_cast<double>(x.size());
  return -0.5 * (d * kLogTwoPi + log_det - d * std::log(beta) + beta * y.squaredNorm());
}

// Nearest component in per-component Mahalanobis distance (Gaussian mixtures).
int nearest_component(const MixtureTarget& m, const Eigen::Ref<const Eigen::VectorXd>& x) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int j = 0; j < m.size(); ++j) {
    const auto& c = m.component(j);
    const double dj =
        c.chol().triangularView<Eigen::Lower>().solve(x - c.mean).squaredNorm();
    if (dj < best_d) {
      best_d = dj;
      best = j;
    }
  }
  return best;
}

const MixtureTarget& gaussian_mixture_or_throw(const TemperedTarget& t, const char* who) {
  const MixtureTarget* m = t.mixture();
  if (!m || !m->all_gaussian()) {
    throw std::domain_error(std::string(who) + ": requires an all-Gaussian mixture base");
  }
  return *m;
}

}  // namespace

double wsgm_logpdf(const TemperedTarget& t, double beta,
                   const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (!(beta > 0.0)) throw std::invalid_argument("wsgm_logpdf: beta must be > 0");
  const MixtureTarget* m = t.mixture();
  if (m && m->all_gaussian()) {
    Eigen::VectorXd terms(m->size());
    for (int j = 0; j < m->size(); ++j) {
      const auto& c = m->component(j);
      terms[j] = std::log(c.weight) +
                 tempered_gaussian_logpdf(x, c.mean, c.chol(), c.log_det_cov(), beta);
    }
    return log_sum_exp(terms);
  }
  const HatContext* ctx = t.context();
  if (!ctx) throw std::domain_error("wsgm_logpdf: non-Gaussian mixture without Laplace surrogates");
  Eigen::VectorXd terms(ctx->size());
  for (int j = 0; j < ctx->size(); ++j) {
    terms[j] = std::log(ctx->laplace_w[j]) +
               tempered_gaussian_logpdf(x, ctx->modes[static_cast<size_t>(j)],
                                        ctx->chol[static_cast<size_t>(j)], ctx->log_det[j], beta);
  }
  return log_sum_exp(terms);
}

double theoremB_logpdf(const TemperedTarget& t, double beta,
                       const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (!(beta > 0.0)) throw std::invalid_argument("theoremB_logpdf: beta must be > 0");
  const MixtureTarget& m = gaussian_mixture_or_throw(t, "theoremB_logpdf");
  const int j = nearest_component(m, x);
  const auto& c = m.component(j);
  // g = -Sigma^{-1}(x-mu), (-H)^{-1} = Sigma, so g^T (-H)^{-1} g is the
  // Mahalanobis distance.
  const double q = c.chol().triangularView<Eigen::Lower>().solve(x - c.mean).squaredNorm();
  return component_log_density(m, j, x) + 0.5 * (1.0 - beta) * q;
}

double theoremC_logpdf(const TemperedTarget& t, double beta,
                       const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (!(beta > 0.0)) throw std::invalid_argument("theoremC_logpdf: beta must be > 0");
  const MixtureTarget& m = gaussian_mixture_or_throw(t, "theoremC_logpdf");
  const int j = nearest_component(m, x);
  return beta * component_log_density(m, j, x) +
         (1.0 - beta) * component_log_density(m, j, m.component(j).mean);
}

double hessian_adjusted_global_logpdf(const MixtureTarget& target, double beta,
                                      const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::VectorXd g = grad_log_density(target, x);
  const Eigen::MatrixXd neg_h = -hessian_log_density(target, x);
  Eigen::LLT<Eigen::MatrixXd> llt(neg_h);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error(
        "hessian_adjusted_global_logpdf: explosion risk, negated Hessian of log pi is "
        "indefinite at this point");
  }
  const double q = g.dot(llt.solve(g));
  return log_density(target, x) + 0.5 * (1.0 - beta) * q;
}

int mode_assign(const HatContext& ctx, const Eigen::Ref<const Eigen::VectorXd>& x,
                double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("mode_assign: beta must be > 0");
  int best = 0;
  double best_score = ctx.assignment_score(0, x, beta);
  for (int j = 1; j < ctx.size(); ++j) {
    const double s = ctx.assignment_score(j, x, beta);
    if (s > best_score) {  // strict: ties keep the lowest index
      best_score = s;
      best = j;
    }
  }
  return best;
}

double bhat_logpdf(const std::function<double(const Eigen::VectorXd&)>& log_pi,
                   const HatContext& ctx, const Eigen::Ref<const Eigen::VectorXd>& x,
                   double beta) {
  const int j = mode_assign(ctx, x, beta);
  if (beta == 1.0) return log_pi(x);
  return beta * log_pi(x) + (1.0 - beta) * ctx.cold_logpdf[j];
}

double hat_logpdf(const std::function<double(const Eigen::VectorXd&)>& log_pi,
                  const HatContext& ctx, const Eigen::Ref<const Eigen::VectorXd>& x,
                  double beta, GVariant variant) {
  const int j_hot = mode_assign(ctx, x, beta);
  const int j_cold = beta == 1.0 ? j_hot : mode_assign(ctx, x, 1.0);
  if (j_hot == j_cold) {
    if (beta == 1.0) return log_pi(x);
    return beta * log_pi(x) + (1.0 - beta) * ctx.cold_logpdf[j_hot];
  }
  if (variant == GVariant::Canonical) {
    return ctx.cold_logpdf[j_hot] - 0.5 * beta * ctx.mahalanobis2(j_hot, x);
  }
  // Robust G: convex combination (1-c) pi(x) + c pi_BH(x) with
  // c = (P(A(x,beta)) - P(A(x,1))) / (P(A(x,beta)) + P(A(x,1))) in [0,1).
  const double lp_hot = ctx.assignment_score(j_hot, x, beta);
  const double lp_cold = ctx.assignment_score(j_cold, x, beta);
  const double rho = std::exp(lp_cold - lp_hot);  // <= 1 since j_hot is the argmax
  const double c = (1.0 - rho) / (1.0 + rho);
  const double log_pi_x = log_pi(x);
  const double log_bh = beta * log_pi_x + (1.0 - beta) * ctx.cold_logpdf[j_hot];
  if (c <= 0.0) return log_pi_x;
  if (c >= 1.0) return log_bh;
  return log_sum_exp(std::log1p(-c) + log_pi_x, std::log(c) + log_bh);
}

double hat_canonical_g_raw(const std::function<double(const Eigen::VectorXd&)>& log_pi,
                           const HatContext& ctx,
                           const Eigen::Ref<const Eigen::VectorXd>& x, double beta) {
  (void)log_pi;
  const int j = mode_assign(ctx, x, beta);
  const double d = static_cast<double>(ctx.dim);
  const double log_phi = tempered_gaussian_logpdf(
      x, ctx.modes[static_cast<size_t>(j)], ctx.chol[static_cast<size_t>(j)], ctx.log_det[j], beta);
  return ctx.cold_logpdf[j] + 0.5 * (d * kLogTwoPi + ctx.log_det[j]) + log_phi -
         0.5 * d * std::log(beta);
}

Eigen::VectorXd theoretical_power_weight(const Eigen::Ref<const Eigen::VectorXd>& w,
                                         const std::vector<Eigen::MatrixXd>& sigmas,
                                         double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("theoretical_power_weight: beta must be > 0");
  if (static_cast<size_t>(w.size()) != sigmas.size()) {
    throw std::invalid_argument("theoretical_power_weight: |w| != |Sigma|");
  }
  Eigen::VectorXd logt(w.size());
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    Eigen::LLT<Eigen::MatrixXd> llt(sigmas[static_cast<size_t>(j)]);
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument("theoretical_power_weight: Sigma fails SPD check");
    }
    const double log_det = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
    logt[j] = beta * std::log(w[j]) + 0.5 * (1.0 - beta) * log_det;
  }
  const double lse = log_sum_exp(logt);
  return (logt.array() - lse).exp();
}

double log_pseudo_prior(const TemperedTarget& t, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("log_pseudo_prior: beta must be > 0");
  const double d = static_cast<double>(t.dimension());
  switch (t.kind()) {
    case TemperKind::Wsgm:
      return 0.0;  // normalised mixture at every temperature
    case TemperKind::TheoremB:
    case TemperKind::TheoremC:
      // each tempered component integrates to w_j beta^{-d/2}
      return 0.5 * d * std::log(beta);
    case TemperKind::Power: {
      // int pi^beta ~ sum_j w_j^beta (2pi)^{d(1-beta)/2} |Sigma_j|^{(1-beta)/2} beta^{-d/2}
      const MixtureTarget* m = t.mixture();
      const HatContext* ctx = t.context();
      Eigen::VectorXd terms;
      if (m && m->all_gaussian()) {
        terms.resize(m->size());
        for (int j = 0; j < m->size(); ++j) {
          const auto& c = m->component(j);
          terms[j] = beta * std::log(c.weight) + 0.5 * (1.0 - beta) * c.log_det_cov();
        }
      } else if (ctx) {
        terms.resize(ctx->size());
        for (int j = 0; j < ctx->size(); ++j) {
          terms[j] = beta * std::log(ctx->laplace_w[j]) + 0.5 * (1.0 - beta) * ctx->log_det[j];
        }
      } else {
        throw std::domain_error(
            "log_pseudo_prior: no analytic path for this base; estimate K from pilot-run "
            "occupancy instead (estimate_pseudo_prior)");
      }
      const double log_int =
          log_sum_exp(terms) + 0.5 * d * (1.0 - beta) * kLogTwoPi - 0.5 * d * std::log(beta);
      return -log_int;
    }
    case TemperKind::Bhat:
    case TemperKind::Hat: {
      const HatContext* ctx = t.context();
      if (!ctx) {
        throw std::domain_error(
            "log_pseudo_prior: BHAT/HAT need a HatContext; estimate K from pilot-run "
            "occupancy instead (estimate_pseudo_prior)");
      }
      // Laplace: int pi_beta^H ~ sum_j pi(mu_j)|Sigma_j|^{1/2} (2pi/beta)^{d/2}
      Eigen::VectorXd terms(ctx->size());
      for (int j = 0; j < ctx->size(); ++j) {
        terms[j] = ctx->cold_logpdf[j] + 0.5 * ctx->log_det[j];
      }
      const double log_int =
          log_sum_exp(terms) + 0.5 * d * kLogTwoPi - 0.5 * d * std::log(beta);
      return -log_int;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace wpt
