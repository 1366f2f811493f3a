#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>

namespace wpt {

inline constexpr double kLogTwoPi = 1.8378770664093454836;

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v);

inline double log_sum_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = a > b ? a : b;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

inline double log_normal_pdf(double z) { return -0.5 * z * z - 0.5 * kLogTwoPi; }

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

// log Phi(z), stable deep in the left tail.
double log_normal_cdf(double z);

// Maximiser of a unimodal f on [lo, hi] by golden-section search.
double golden_section_max(const std::function<double(double)>& f, double lo,
                          double hi, double tol);

// Adaptive Simpson quadrature with absolute tolerance.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, int max_depth = 60);

// Slope, intercept and R^2 of an ordinary least-squares line fit.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LineFit fit_line(const Eigen::Ref<const Eigen::VectorXd>& x,
                 const Eigen::Ref<const Eigen::VectorXd>& y);

}  // namespace wpt
