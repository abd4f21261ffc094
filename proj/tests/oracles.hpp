#pragma once

// Independent reference implementations used to check the library's
// statistics and solvers. None of them calls into the code under test.

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ecall::oracle {

/// Pearson r straight from the covariance definition, accumulated in long
/// double in input order.
inline double pearson_r(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  long double cov = 0, vx = 0, vy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    cov += (x[i] - mx) * (y[i] - my);
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(cov / std::sqrt(vx * vy));
}

/// P(|T| < t) for Student-t with an integer number of degrees of freedom,
/// via the closed-form finite series in theta = atan(t / sqrt(df)).
inline double student_t_central(double t, int df) {
  const long double th = std::atan(std::fabs(t) / std::sqrt(static_cast<long double>(df)));
  const long double s = std::sin(th), c = std::cos(th), c2 = c * c;
  if (df % 2 == 1) {
    long double sum = 0, term = 1;
    if (df > 1) {
      sum = 1;
      for (int k = 3; k <= df - 2; k += 2) {
        term *= static_cast<long double>(k - 1) / k * c2;
        sum += term;
      }
    }
    return static_cast<double>(2.0L / std::numbers::pi_v<long double> * (th + (df > 1 ? s * c * sum : 0.0L)));
  }
  long double sum = 1, term = 1;
  for (int k = 2; k <= df - 2; k += 2) {
    term *= static_cast<long double>(k - 1) / k * c2;
    sum += term;
  }
  return static_cast<double>(s * sum);
}

/// Two-sided p-value of a correlation r over n pairs.
inline double correlation_p(double r, std::size_t n) {
  const int df = static_cast<int>(n) - 2;
  if (std::fabs(r) >= 1.0) return 0.0;
  const double t = r * std::sqrt(df / (1.0 - r * r));
  return 1.0 - student_t_central(t, df);
}

struct RidgeSolution {
  Eigen::VectorXd w;
  double b = 0.0;
};

/// Minimizes ||y - Xw - b||^2 + alpha ||w||^2 by fixed-step gradient
/// descent. The step is 1 / L with L bounded by the Frobenius norm.
inline RidgeSolution ridge_gradient_descent(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha,
                                            double grad_tol = 1e-13, long max_iter = 5'000'000) {
  const Eigen::Index p = X.cols();
  Eigen::MatrixXd A(X.rows(), p + 1);
  A << X, Eigen::VectorXd::Ones(X.rows());
  const double L = 2.0 * (A.squaredNorm() + alpha);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p + 1);
  Eigen::VectorXd pen = Eigen::VectorXd::Constant(p + 1, alpha);
  pen[p] = 0.0;
  for (long it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd g = 2.0 * (A.transpose() * (A * theta - y) + pen.cwiseProduct(theta));
    if (g.lpNorm<Eigen::Infinity>() < grad_tol) break;
    theta -= g / L;
  }
  return {theta.head(p), theta[p]};
}

/// Same objective the library minimizes for multinomial logistic regression,
/// written out per row with no shared helpers.
inline double logistic_loss(const Eigen::MatrixXd& X, const std::vector<int>& cls, const Eigen::MatrixXd& W,
                            const Eigen::VectorXd& b, double C) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double z[3], zmax = -INFINITY;
    for (int k = 0; k < 3; ++k) {
      z[k] = X.row(i).dot(W.col(k)) + b[k];
      zmax = std::max(zmax, z[k]);
    }
    double s = 0.0;
    for (double v : z) s += std::exp(v - zmax);
    loss += zmax + std::log(s) - z[cls[static_cast<std::size_t>(i)]];
  }
  return loss + W.squaredNorm() / (2.0 * C);
}

}  // namespace ecall::oracle
