#pragma once

// Linear models: ridge regression, multinomial logistic regression,
// cross-validated grid search, baselines and stacking.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ecall/error.hpp"
#include "ecall/featurize.hpp"
#include "ecall/text.hpp"

namespace ecall {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr std::array<int, 3> kClasses = {-1, 0, 1};

inline std::size_t class_index(int c) {
  if (c < -1 || c > 1) throw Error(Errc::InvalidArgument, "class label must be -1, 0 or 1");
  return static_cast<std::size_t>(c + 1);
}

inline SparseMatrix to_sparse(const Matrix& X) { return X.sparseView(0.0, 0.0); }

// ---- shared design reduction -----------------------------------------------

/// Centered training design expressed in coordinates where the L2 penalty on
/// the original weights is the plain squared norm. With at least as many rows
/// as columns the coordinates are the centered columns themselves; otherwise
/// they come from the eigendecomposition of the centered Gram matrix, so the
/// cost depends on the row count only.
struct LinearDesign {
  Vector mu;
  Matrix phi;
  bool dual = false;
  Matrix u;  // dual only: kept eigenvectors
  Vector s;  // dual only: kept eigenvalues
  SparseMatrix x;

  Eigen::Index rows() const { return phi.rows(); }

  static LinearDesign prepare(const SparseMatrix& X) {
    LinearDesign d;
    const Eigen::Index n = X.rows(), p = X.cols();
    if (n == 0) throw Error(Errc::InsufficientData, "empty training matrix");
    d.x = X;
    d.mu = Vector::Zero(p);
    for (Eigen::Index r = 0; r < X.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(X, r); it; ++it) d.mu[it.col()] += it.value();
    d.mu /= static_cast<double>(n);
    if (p <= n) {
      d.phi = Matrix(X);
      d.phi.rowwise() -= d.mu.transpose();
      return d;
    }
    d.dual = true;
    const Matrix K = Matrix(X * SparseMatrix(X.transpose()));
    const Vector xmu = X * d.mu;
    Matrix Kc = K;
    Kc.colwise() -= xmu;
    Kc.rowwise() -= xmu.transpose();
    Kc.array() += d.mu.squaredNorm();
    Kc = 0.5 * (Kc + Kc.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(Kc);
    const Vector& ev = eig.eigenvalues();
    const double cut = std::max(ev.maxCoeff(), 0.0) * 1e-12;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = ev.size() - 1; i >= 0; --i)
      if (ev[i] > cut && ev[i] > 0.0) keep.push_back(i);
    const auto r = static_cast<Eigen::Index>(keep.size());
    d.u.resize(n, r);
    d.s.resize(r);
    for (Eigen::Index k = 0; k < r; ++k) {
      d.u.col(k) = eig.eigenvectors().col(keep[static_cast<std::size_t>(k)]);
      d.s[k] = ev[keep[static_cast<std::size_t>(k)]];
    }
    d.phi = d.u * d.s.cwiseSqrt().asDiagonal();
    return d;
  }

  /// Maps coordinates back to weights on the original columns.
  Matrix to_weights(const Matrix& v) const {
    if (!dual) return v;
    const Matrix a = u * s.cwiseSqrt().cwiseInverse().asDiagonal() * v;
    Matrix w = SparseMatrix(x.transpose()) * a;
    w -= mu * a.colwise().sum();
    return w;
  }
};

// ---- ridge -----------------------------------------------------------------

struct RidgeModel {
  Vector weights;
  double intercept = 0.0;
  double alpha = 1.0;
  std::uint64_t column_hash = 0;

  Vector predict(const SparseMatrix& X) const {
    if (X.cols() != weights.size()) throw Error(Errc::LengthMismatch, "ridge: column count differs from training");
    Vector out = X * weights;
    out.array() += intercept;
    return out;
  }
  Vector predict(const Matrix& X) const { return predict(to_sparse(X)); }
};

/// Fits all requested penalties against one prepared design.
class RidgeSolver {
 public:
  RidgeSolver(const LinearDesign& d, const Vector& y) : d_(d) {
    if (y.size() != d.rows()) throw Error(Errc::LengthMismatch, "ridge: rows of X and y differ");
    ymean_ = y.mean();
    const Vector yc = y.array() - ymean_;
    proj_ = d.phi.transpose() * yc;
    if (!d.dual) gram_ = d.phi.transpose() * d.phi;
  }

  RidgeModel fit(double alpha) const {
    if (alpha < 0.0 || !std::isfinite(alpha)) throw Error(Errc::InvalidArgument, "ridge alpha must be >= 0");
    Vector v;
    if (d_.dual) {
      if (alpha == 0.0) throw Error(Errc::SingularSystem, "more columns than rows with alpha = 0");
      v = proj_.array() / (d_.s.array() + alpha);
    } else {
      Matrix a = gram_;
      a.diagonal().array() += alpha;
      Eigen::LDLT<Matrix> ldlt(a);
      const Vector dd = ldlt.vectorD();
      const double scale = std::max(1.0, dd.cwiseAbs().maxCoeff());
      if (ldlt.info() != Eigen::Success || (dd.size() > 0 && dd.cwiseAbs().minCoeff() <= 1e-13 * scale))
        throw Error(Errc::SingularSystem, "normal equations are singular");
      v = ldlt.solve(proj_);
    }
    RidgeModel m;
    m.alpha = alpha;
    m.weights = d_.to_weights(v);
    m.intercept = ymean_ - d_.mu.dot(m.weights);
    return m;
  }

 private:
  const LinearDesign& d_;
  double ymean_ = 0.0;
  Vector proj_;
  Matrix gram_;
};

inline RidgeModel ridge_fit(const SparseMatrix& X, const Vector& y, double alpha) {
  const auto d = LinearDesign::prepare(X);
  return RidgeSolver(d, y).fit(alpha);
}
inline RidgeModel ridge_fit(const Matrix& X, const Vector& y, double alpha) { return ridge_fit(to_sparse(X), y, alpha); }

// ---- logistic --------------------------------------------------------------

struct LogisticModel {
  Matrix weights;  // p x 3, columns ordered -1, 0, 1
  Vector intercepts = Vector::Zero(3);
  double C = 1.0;
  bool converged = false;
  std::size_t iterations = 0;
  double grad_norm = 0.0;
  std::uint64_t column_hash = 0;

  Matrix predict_proba(const SparseMatrix& X) const {
    if (X.cols() != weights.rows()) throw Error(Errc::LengthMismatch, "logistic: column count differs from training");
    Matrix z = X * weights;
    z.rowwise() += intercepts.transpose();
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      const double m = z.row(i).maxCoeff();
      z.row(i) = (z.row(i).array() - m).exp();
      z.row(i) /= z.row(i).sum();
    }
    return z;
  }
  Matrix predict_proba(const Matrix& X) const { return predict_proba(to_sparse(X)); }

  std::vector<int> predict(const SparseMatrix& X) const {
    const Matrix p = predict_proba(X);
    std::vector<int> out(static_cast<std::size_t>(p.rows()));
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      Eigen::Index k = 0;
      p.row(i).maxCoeff(&k);
      out[static_cast<std::size_t>(i)] = kClasses[static_cast<std::size_t>(k)];
    }
    return out;
  }
  std::vector<int> predict(const Matrix& X) const { return predict(to_sparse(X)); }
};

struct LogisticObjective {
  double value = 0.0;
  Matrix grad_w;
  Vector grad_b;
};

/// Sum of multinomial cross-entropy plus ||W||^2 / (2C); intercepts are not
/// penalized.
inline LogisticObjective logistic_objective(const Matrix& X, std::span<const std::size_t> y, const Matrix& W,
                                            const Vector& b, double C) {
  Matrix z = X * W;
  z.rowwise() += b.transpose();
  LogisticObjective o;
  Matrix g(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    const auto e = (z.row(i).array() - m).exp();
    const double s = e.sum();
    o.value += m + std::log(s) - z(i, static_cast<Eigen::Index>(y[static_cast<std::size_t>(i)]));
    g.row(i) = e / s;
    g(i, static_cast<Eigen::Index>(y[static_cast<std::size_t>(i)])) -= 1.0;
  }
  o.value += W.squaredNorm() / (2.0 * C);
  o.grad_w = X.transpose() * g + W / C;
  o.grad_b = g.colwise().sum().transpose();
  return o;
}

struct LogisticOptions {
  double tol = 1e-6;
  std::size_t max_iter = 10000;
};

struct LogisticState {
  Matrix v;
  Vector b;
};

/// Full-batch gradient descent with Armijo backtracking. The step along each
/// coordinate row is scaled by 1 / (curv_i / 4 + 1 / C), where curv_i is the
/// squared norm of design column i; trial steps start from the
/// Barzilai-Borwein estimate in that metric.
inline LogisticState logistic_descent(const Matrix& phi, const Vector& curv, std::span<const std::size_t> y, double C,
                                      LogisticState x, const LogisticOptions& opt, std::size_t* iterations,
                                      double* grad_norm, bool* converged) {
  const Vector mv = (0.25 * curv.array() + 1.0 / C).inverse();
  const double mb = 1.0 / (0.25 * static_cast<double>(std::max<Eigen::Index>(1, phi.rows())));
  auto obj = logistic_objective(phi, y, x.v, x.b, C);
  auto gnorm = [](const LogisticObjective& o) {
    return std::max(o.grad_w.size() ? o.grad_w.cwiseAbs().maxCoeff() : 0.0, o.grad_b.cwiseAbs().maxCoeff());
  };
  double step = 1.0;
  std::size_t it = 0;
  *converged = false;
  for (; it < opt.max_iter; ++it) {
    if (gnorm(obj) < opt.tol) {
      *converged = true;
      break;
    }
    const Matrix dv = mv.asDiagonal() * obj.grad_w;
    const Vector db = mb * obj.grad_b;
    const double gmg = obj.grad_w.cwiseProduct(dv).sum() + obj.grad_b.dot(db);
    LogisticState trial;
    LogisticObjective next;
    double t = step;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      trial.v = x.v - t * dv;
      trial.b = x.b - t * db;
      next = logistic_objective(phi, y, trial.v, trial.b, C);
      // Near the optimum the predicted decrease drops below the rounding
      // error of the summed loss; there a shrinking gradient decides.
      const bool below_rounding = t * gmg < 256.0 * std::numeric_limits<double>::epsilon() * std::abs(obj.value);
      const bool ok = below_rounding ? next.grad_w.cwiseProduct(mv.asDiagonal() * next.grad_w).sum() +
                                               mb * next.grad_b.squaredNorm() <
                                           gmg
                                     : next.value <= obj.value - 1e-4 * t * gmg;
      if (ok) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    const Matrix sv = trial.v - x.v;
    const Vector sb = trial.b - x.b;
    const double sy = sv.cwiseProduct(next.grad_w - obj.grad_w).sum() + sb.dot(next.grad_b - obj.grad_b);
    const double sms = (mv.cwiseInverse().asDiagonal() * sv).cwiseProduct(sv).sum() + sb.squaredNorm() / mb;
    step = sy > 0.0 ? std::min(sms / sy, 1e6) : 2.0 * t;
    x = std::move(trial);
    obj = std::move(next);
  }
  if (!*converged && gnorm(obj) < opt.tol) *converged = true;
  *iterations = it;
  *grad_norm = gnorm(obj);
  return x;
}

inline std::vector<std::size_t> class_indices(std::span<const int> labels) {
  std::vector<std::size_t> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) y[i] = class_index(labels[i]);
  return y;
}

/// Works in an orthogonal basis of the design so that the per-coordinate
/// step scaling matches the curvature of the quadratic part exactly.
class LogisticSolver {
 public:
  LogisticSolver(const LinearDesign& d, std::span<const int> labels, LogisticOptions opt = {})
      : d_(d), y_(class_indices(labels)), opt_(opt) {
    if (static_cast<Eigen::Index>(labels.size()) != d.rows())
      throw Error(Errc::LengthMismatch, "logistic: rows of X and labels differ");
    if (d.dual) {
      basis_ = d.phi;
      curv_ = d.s;
    } else {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(d.phi.transpose() * d.phi);
      rot_ = eig.eigenvectors();
      curv_ = eig.eigenvalues().cwiseMax(0.0);
      basis_ = d.phi * rot_;
    }
    warm_.v = Matrix::Zero(basis_.cols(), 3);
    warm_.b = Vector::Zero(3);
  }

  /// Successive calls start from the previous solution.
  LogisticModel fit(double C) {
    if (!(C > 0.0) || !std::isfinite(C)) throw Error(Errc::InvalidArgument, "logistic C must be > 0");
    LogisticModel m;
    m.C = C;
    warm_ = logistic_descent(basis_, curv_, y_, C, warm_, opt_, &m.iterations, &m.grad_norm, &m.converged);
    m.weights = d_.to_weights(d_.dual ? warm_.v : Matrix(rot_ * warm_.v));
    m.intercepts = warm_.b - (d_.mu.transpose() * m.weights).transpose();
    return m;
  }

 private:
  const LinearDesign& d_;
  std::vector<std::size_t> y_;
  LogisticOptions opt_;
  Matrix basis_;
  Matrix rot_;
  Vector curv_;
  LogisticState warm_;
};

inline LogisticModel logistic_fit(const SparseMatrix& X, std::span<const int> labels, double C,
                                  LogisticOptions opt = {}) {
  const auto d = LinearDesign::prepare(X);
  return LogisticSolver(d, labels, opt).fit(C);
}
inline LogisticModel logistic_fit(const Matrix& X, std::span<const int> labels, double C, LogisticOptions opt = {}) {
  return logistic_fit(to_sparse(X), labels, C, opt);
}

// ---- grid search -----------------------------------------------------------

inline std::vector<double> log_grid(double lo_exp, double hi_exp, std::size_t points) {
  std::vector<double> g;
  for (std::size_t i = 0; i < points; ++i) {
    const double e = points == 1 ? lo_exp : lo_exp + (hi_exp - lo_exp) * static_cast<double>(i) / static_cast<double>(points - 1);
    g.push_back(std::pow(10.0, e));
  }
  return g;
}

inline std::vector<double> default_ridge_grid() { return log_grid(-3, 8, 12); }
inline std::vector<double> default_logistic_grid() { return log_grid(-4, 4, 9); }

struct GridSearchPlan {
  std::vector<double> grid;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
};

/// Fold of each row: a seeded Fisher-Yates permutation dealt round-robin.
inline std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds == 0) throw Error(Errc::InvalidArgument, "need at least one fold");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(perm[i - 1], perm[pick(rng)]);
  }
  std::vector<std::size_t> fold(n);
  for (std::size_t k = 0; k < n; ++k) fold[perm[k]] = k % folds;
  return fold;
}

template <class Model>
struct GridResult {
  double best = 0.0;
  std::vector<double> grid;    // deduplicated, in evaluation order
  std::vector<double> scores;  // mean fold score per grid point
  Model model;
};

namespace detail {

inline std::vector<double> dedup(std::vector<double> g, bool descending) {
  if (g.empty()) throw Error(Errc::InvalidArgument, "empty hyperparameter grid");
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  if (descending) std::reverse(g.begin(), g.end());
  return g;
}

struct Split {
  std::vector<std::size_t> train, test;
};

inline std::vector<Split> make_splits(std::size_t n, const GridSearchPlan& plan) {
  const std::size_t k = std::max<std::size_t>(2, std::min(plan.folds, n));
  if (n < 2) throw Error(Errc::InsufficientData, "cross-validation needs at least 2 rows");
  const auto fold = fold_assignment(n, k, plan.seed);
  std::vector<Split> s(k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t f = 0; f < k; ++f) (fold[i] == f ? s[f].test : s[f].train).push_back(i);
  return s;
}

inline SparseMatrix take_rows(const SparseMatrix& X, std::span<const std::size_t> rows) {
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (SparseMatrix::InnerIterator it(X, static_cast<Eigen::Index>(rows[i])); it; ++it)
      trip.emplace_back(static_cast<int>(i), static_cast<int>(it.col()), it.value());
  return build_sparse(rows.size(), static_cast<std::size_t>(X.cols()), trip);
}

}  // namespace detail

/// Lowest mean fold MSE wins; ties go to the larger alpha.
inline GridResult<RidgeModel> ridge_grid_search(const SparseMatrix& X, const Vector& y, const GridSearchPlan& plan) {
  GridResult<RidgeModel> res;
  res.grid = detail::dedup(plan.grid, true);
  res.scores.assign(res.grid.size(), 0.0);
  const auto splits = detail::make_splits(static_cast<std::size_t>(X.rows()), plan);
  for (const auto& sp : splits) {
    const SparseMatrix xtr = detail::take_rows(X, sp.train), xte = detail::take_rows(X, sp.test);
    Vector ytr(static_cast<Eigen::Index>(sp.train.size())), yte(static_cast<Eigen::Index>(sp.test.size()));
    for (std::size_t i = 0; i < sp.train.size(); ++i) ytr[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(sp.train[i])];
    for (std::size_t i = 0; i < sp.test.size(); ++i) yte[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(sp.test[i])];
    const auto d = LinearDesign::prepare(xtr);
    const RidgeSolver solver(d, ytr);
    for (std::size_t g = 0; g < res.grid.size(); ++g)
      res.scores[g] += (solver.fit(res.grid[g]).predict(xte) - yte).squaredNorm() / static_cast<double>(yte.size());
  }
  std::size_t best = 0;
  for (std::size_t g = 0; g < res.grid.size(); ++g) {
    res.scores[g] /= static_cast<double>(splits.size());
    if (res.scores[g] < res.scores[best]) best = g;
  }
  res.best = res.grid[best];
  res.model = ridge_fit(X, y, res.best);
  return res;
}

/// Highest mean fold accuracy wins; ties go to the smaller C.
inline GridResult<LogisticModel> logistic_grid_search(const SparseMatrix& X, std::span<const int> labels,
                                                      const GridSearchPlan& plan, LogisticOptions opt = {}) {
  GridResult<LogisticModel> res;
  res.grid = detail::dedup(plan.grid, false);
  res.scores.assign(res.grid.size(), 0.0);
  const auto splits = detail::make_splits(labels.size(), plan);
  for (const auto& sp : splits) {
    const SparseMatrix xtr = detail::take_rows(X, sp.train), xte = detail::take_rows(X, sp.test);
    std::vector<int> ytr, yte;
    for (auto i : sp.train) ytr.push_back(labels[i]);
    for (auto i : sp.test) yte.push_back(labels[i]);
    const auto d = LinearDesign::prepare(xtr);
    LogisticSolver solver(d, ytr, opt);
    for (std::size_t g = 0; g < res.grid.size(); ++g) {
      const auto pred = solver.fit(res.grid[g]).predict(xte);
      std::size_t hit = 0;
      for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == yte[i];
      res.scores[g] += static_cast<double>(hit) / static_cast<double>(yte.size());
    }
  }
  std::size_t best = 0;
  for (std::size_t g = 0; g < res.grid.size(); ++g) {
    res.scores[g] /= static_cast<double>(splits.size());
    if (res.scores[g] > res.scores[best]) best = g;
  }
  res.best = res.grid[best];
  const auto d = LinearDesign::prepare(X);
  LogisticSolver solver(d, labels, opt);
  for (std::size_t g = 0; g <= best; ++g) res.model = solver.fit(res.grid[g]);
  return res;
}

// ---- baselines -------------------------------------------------------------

inline constexpr std::size_t kBaselineSeeds = 10;

struct TrainStats {
  double mean = 0.0;
  double sd = 0.0;  // population
  int majority = 0;
};

/// Majority ties go to the lowest class label.
inline TrainStats train_stats(std::span<const double> y, std::span<const int> labels) {
  TrainStats s;
  if (!y.empty()) {
    s.mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double v = 0.0;
    for (double x : y) v += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(v / static_cast<double>(y.size()));
  }
  std::array<std::size_t, 3> cnt{};
  for (int c : labels) ++cnt[class_index(c)];
  s.majority = kClasses[static_cast<std::size_t>(std::max_element(cnt.begin(), cnt.end()) - cnt.begin())];
  return s;
}

inline std::vector<double> predict_train_mean(const TrainStats& s, std::size_t n) { return std::vector<double>(n, s.mean); }
inline std::vector<double> predict_zero(std::size_t n) { return std::vector<double>(n, 0.0); }
inline std::vector<int> predict_majority(const TrainStats& s, std::size_t n) { return std::vector<int>(n, s.majority); }

inline std::vector<double> predict_random_gaussian(const TrainStats& s, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(s.mean, s.sd > 0.0 ? s.sd : 0.0);
  std::vector<double> out(n);
  for (auto& v : out) v = s.sd > 0.0 ? dist(rng) : s.mean;
  return out;
}

inline std::vector<int> predict_random_class(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(-1, 1);
  std::vector<int> out(n);
  for (auto& v : out) v = dist(rng);
  return out;
}

// ---- stacking --------------------------------------------------------------

enum class Task { Regression, Classification, Correlation };

constexpr std::string_view to_string(Task t) {
  switch (t) {
    case Task::Regression: return "regression";
    case Task::Classification: return "classification";
    case Task::Correlation: return "correlation";
  }
  return "?";
}

inline Task parse_task(std::string_view s) {
  const std::string l = to_lower(s);
  if (l == "regression" || l == "reg") return Task::Regression;
  if (l == "classification" || l == "clf" || l == "class") return Task::Classification;
  if (l == "correlation" || l == "corr") return Task::Correlation;
  throw Error(Errc::InvalidArgument, "unknown task '" + std::string(s) + "'");
}

/// Meta features: one column per base for regression; three probability
/// columns (-1, 0, 1) per base for classification.
struct StackedModel {
  Task task = Task::Regression;
  std::vector<std::string> bases;
  bool degenerate = false;  // all bases agree; predictions pass the first base through
  RidgeModel ridge;
  LogisticModel logistic;

  std::size_t width() const { return task == Task::Regression ? 1 : 3; }

  Vector predict_values(const Matrix& meta) const {
    if (task != Task::Regression) throw Error(Errc::InvalidArgument, "stacked model is a classifier");
    if (degenerate) return meta.col(0);
    return ridge.predict(meta);
  }

  Matrix predict_proba(const Matrix& meta) const {
    if (task != Task::Classification) throw Error(Errc::InvalidArgument, "stacked model is a regressor");
    if (degenerate) return meta.leftCols(3);
    return logistic.predict_proba(meta);
  }

  std::vector<int> predict_classes(const Matrix& meta) const {
    const Matrix p = predict_proba(meta);
    std::vector<int> out(static_cast<std::size_t>(p.rows()));
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      Eigen::Index k = 0;
      p.row(i).maxCoeff(&k);
      out[static_cast<std::size_t>(i)] = kClasses[static_cast<std::size_t>(k)];
    }
    return out;
  }
};

inline bool bases_identical(const Matrix& meta, std::size_t width) {
  const Eigen::Index w = static_cast<Eigen::Index>(width);
  for (Eigen::Index b = w; b < meta.cols(); b += w)
    if (meta.middleCols(b, w) != meta.leftCols(w)) return false;
  return true;
}

/// The meta model is tuned by cross-validation on the rows given, which
/// should be held out from base-model training.
inline StackedModel stack_regression(std::vector<std::string> bases, const Matrix& meta, const Vector& y,
                                     const GridSearchPlan& plan) {
  if (bases.size() < 2) throw Error(Errc::InvalidArgument, "stacking needs at least two base models");
  if (static_cast<std::size_t>(meta.cols()) != bases.size()) throw Error(Errc::LengthMismatch, "one column per base");
  StackedModel m;
  m.task = Task::Regression;
  m.bases = std::move(bases);
  if (bases_identical(meta, 1)) {
    m.degenerate = true;
    return m;
  }
  m.ridge = ridge_grid_search(to_sparse(meta), y, plan).model;
  return m;
}

inline StackedModel stack_classification(std::vector<std::string> bases, const Matrix& meta,
                                         std::span<const int> labels, const GridSearchPlan& plan,
                                         LogisticOptions opt = {}) {
  if (bases.size() < 2) throw Error(Errc::InvalidArgument, "stacking needs at least two base models");
  if (static_cast<std::size_t>(meta.cols()) != 3 * bases.size())
    throw Error(Errc::LengthMismatch, "three probability columns per base");
  StackedModel m;
  m.task = Task::Classification;
  m.bases = std::move(bases);
  if (bases_identical(meta, 3)) {
    m.degenerate = true;
    return m;
  }
  m.logistic = logistic_grid_search(to_sparse(meta), labels, plan, opt).model;
  return m;
}

// ---- persistence -----------------------------------------------------------

inline constexpr std::string_view kModelMagic = "ecall-model";
inline constexpr int kModelVersion = 1;

inline void write_model(std::ostream& os, const RidgeModel& m) {
  os << kModelMagic << ' ' << kModelVersion << "\nkind ridge\ncolumn_hash " << m.column_hash << "\nalpha "
     << exact(m.alpha) << "\ncolumns " << m.weights.size() << "\nintercept " << exact(m.intercept) << '\n';
  for (Eigen::Index j = 0; j < m.weights.size(); ++j) os << exact(m.weights[j]) << '\n';
  os << "end\n";
}

inline void write_model(std::ostream& os, const LogisticModel& m) {
  os << kModelMagic << ' ' << kModelVersion << "\nkind logistic\ncolumn_hash " << m.column_hash << "\nC "
     << exact(m.C) << "\nconverged " << (m.converged ? 1 : 0) << "\niterations " << m.iterations << "\ngrad_norm "
     << exact(m.grad_norm) << "\ncolumns " << m.weights.rows() << "\nintercept " << exact(m.intercepts[0]) << ' '
     << exact(m.intercepts[1]) << ' ' << exact(m.intercepts[2]) << '\n';
  for (Eigen::Index j = 0; j < m.weights.rows(); ++j)
    os << exact(m.weights(j, 0)) << ' ' << exact(m.weights(j, 1)) << ' ' << exact(m.weights(j, 2)) << '\n';
  os << "end\n";
}

inline void write_model(std::ostream& os, const StackedModel& m) {
  os << kModelMagic << ' ' << kModelVersion << "\nkind stacked\ntask " << to_string(m.task) << "\nbases";
  for (const auto& b : m.bases) os << ' ' << b;
  os << "\ndegenerate " << (m.degenerate ? 1 : 0) << '\n';
  if (!m.degenerate) {
    if (m.task == Task::Regression) write_model(os, m.ridge);
    else write_model(os, m.logistic);
  }
  os << "end\n";
}

namespace detail {

inline std::string expect_key(std::istream& is, std::string_view key) {
  std::string line;
  if (!std::getline(is, line)) throw Error(Errc::MalformedInput, "model file truncated before '" + std::string(key) + "'");
  const auto sp = line.find(' ');
  if (line.substr(0, sp) != key) throw Error(Errc::MalformedInput, "expected '" + std::string(key) + "', got '" + line + "'");
  return sp == std::string::npos ? "" : line.substr(sp + 1);
}

inline double num(const std::string& s) { return csv::to_double(std::string(trim(s))); }

inline std::string read_header(std::istream& is) {
  std::string magic;
  int version = 0;
  std::string line;
  if (!std::getline(is, line)) throw Error(Errc::MalformedInput, "empty model file");
  std::istringstream hs(line);
  hs >> magic >> version;
  if (magic != kModelMagic) throw Error(Errc::MalformedInput, "not a model file");
  if (version != kModelVersion) throw Error(Errc::MalformedInput, "unsupported model version " + std::to_string(version));
  return expect_key(is, "kind");
}

inline RidgeModel read_ridge_body(std::istream& is) {
  RidgeModel m;
  m.column_hash = std::stoull(expect_key(is, "column_hash"));
  m.alpha = num(expect_key(is, "alpha"));
  const auto p = static_cast<Eigen::Index>(num(expect_key(is, "columns")));
  m.intercept = num(expect_key(is, "intercept"));
  m.weights.resize(p);
  std::string line;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!std::getline(is, line)) throw Error(Errc::MalformedInput, "model weights truncated");
    m.weights[j] = num(line);
  }
  expect_key(is, "end");
  return m;
}

inline LogisticModel read_logistic_body(std::istream& is) {
  LogisticModel m;
  m.column_hash = std::stoull(expect_key(is, "column_hash"));
  m.C = num(expect_key(is, "C"));
  m.converged = num(expect_key(is, "converged")) != 0.0;
  m.iterations = static_cast<std::size_t>(num(expect_key(is, "iterations")));
  m.grad_norm = num(expect_key(is, "grad_norm"));
  const auto p = static_cast<Eigen::Index>(num(expect_key(is, "columns")));
  auto triple = [](const std::string& s) {
    const auto parts = split_whitespace(s);
    if (parts.size() != 3) throw Error(Errc::MalformedInput, "expected three values, got '" + s + "'");
    return std::array<double, 3>{num(parts[0]), num(parts[1]), num(parts[2])};
  };
  const auto b = triple(expect_key(is, "intercept"));
  m.intercepts = Vector::Map(b.data(), 3);
  m.weights.resize(p, 3);
  std::string line;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!std::getline(is, line)) throw Error(Errc::MalformedInput, "model weights truncated");
    const auto w = triple(line);
    for (int k = 0; k < 3; ++k) m.weights(j, k) = w[static_cast<std::size_t>(k)];
  }
  expect_key(is, "end");
  return m;
}

}  // namespace detail

inline RidgeModel read_ridge(std::istream& is) {
  if (detail::read_header(is) != "ridge") throw Error(Errc::MalformedInput, "model is not a ridge model");
  return detail::read_ridge_body(is);
}

inline LogisticModel read_logistic(std::istream& is) {
  if (detail::read_header(is) != "logistic") throw Error(Errc::MalformedInput, "model is not a logistic model");
  return detail::read_logistic_body(is);
}

inline StackedModel read_stacked(std::istream& is) {
  if (detail::read_header(is) != "stacked") throw Error(Errc::MalformedInput, "model is not a stacked model");
  StackedModel m;
  m.task = parse_task(detail::expect_key(is, "task"));
  m.bases = split_whitespace(detail::expect_key(is, "bases"));
  m.degenerate = detail::num(detail::expect_key(is, "degenerate")) != 0.0;
  if (!m.degenerate) {
    if (m.task == Task::Regression) m.ridge = read_ridge(is);
    else m.logistic = read_logistic(is);
  }
  detail::expect_key(is, "end");
  return m;
}

}  // namespace ecall
