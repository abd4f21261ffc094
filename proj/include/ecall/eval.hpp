#pragma once

// Regression and classification metrics, percent error reduction against a
// trivial baseline, and per-sector accuracy.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ecall/csv.hpp"
#include "ecall/error.hpp"
#include "ecall/text.hpp"

namespace ecall {

struct RegressionMetrics {
  double mse = 0.0;
  double r2 = 0.0;
  double pct_err = 0.0;
};

struct ClassificationMetrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double pct_err = 0.0;
};

inline double pct_err_regression(double mse, double baseline_mse) {
  if (!(baseline_mse > 0.0)) throw Error(Errc::InvalidArgument, "baseline MSE must be positive");
  return 100.0 * (baseline_mse - mse) / baseline_mse;
}

inline double pct_err_classification(double accuracy, double baseline_acc) {
  if (!(baseline_acc > 0.0)) throw Error(Errc::InvalidArgument, "baseline accuracy must be positive");
  return 100.0 * (accuracy - baseline_acc) / baseline_acc;
}

/// A constant target gives R^2 = 0 by convention.
inline RegressionMetrics regression_metrics(std::span<const double> y_true, std::span<const double> y_pred,
                                            double baseline_mse) {
  if (y_true.size() != y_pred.size())
    throw Error(Errc::LengthMismatch, std::to_string(y_true.size()) + " vs " + std::to_string(y_pred.size()));
  if (y_true.empty()) throw Error(Errc::InsufficientData, "no rows to evaluate");
  const double n = static_cast<double>(y_true.size());
  double mean = 0.0;
  for (double v : y_true) mean += v;
  mean /= n;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
    ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
  }
  RegressionMetrics m;
  m.mse = ss_res / n;
  m.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
  m.pct_err = pct_err_regression(m.mse, baseline_mse);
  return m;
}

/// Rows are true classes, columns predicted, both in order -1, 0, 1.
using Confusion = std::array<std::array<double, 3>, 3>;

inline Confusion confusion_matrix(std::span<const int> truth, std::span<const int> pred) {
  if (truth.size() != pred.size())
    throw Error(Errc::LengthMismatch, std::to_string(truth.size()) + " vs " + std::to_string(pred.size()));
  Confusion c{};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < -1 || truth[i] > 1 || pred[i] < -1 || pred[i] > 1)
      throw Error(Errc::InvalidArgument, "class labels must be -1, 0 or 1");
    c[static_cast<std::size_t>(truth[i] + 1)][static_cast<std::size_t>(pred[i] + 1)] += 1.0;
  }
  return c;
}

/// Unweighted mean of per-class F1; a class with no true and no predicted
/// rows contributes 0. Works on counts or on proportions.
inline double macro_f1(const Confusion& c) {
  double sum = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    double tp = c[k][k], fp = 0.0, fn = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      if (j == k) continue;
      fp += c[j][k];
      fn += c[k][j];
    }
    const double denom = 2.0 * tp + fp + fn;
    sum += denom > 0.0 ? 2.0 * tp / denom : 0.0;
  }
  return sum / 3.0;
}

inline ClassificationMetrics classification_metrics(std::span<const int> truth, std::span<const int> pred,
                                                    double baseline_acc) {
  const Confusion c = confusion_matrix(truth, pred);
  if (truth.empty()) throw Error(Errc::InsufficientData, "no rows to evaluate");
  ClassificationMetrics m;
  m.accuracy = (c[0][0] + c[1][1] + c[2][2]) / static_cast<double>(truth.size());
  m.macro_f1 = macro_f1(c);
  m.pct_err = pct_err_classification(m.accuracy, baseline_acc);
  return m;
}

/// Macro-F1 of always predicting `predicted` when the true classes occur with
/// the given shares (order -1, 0, 1).
inline double constant_predictor_macro_f1(std::array<double, 3> priors, int predicted) {
  Confusion c{};
  const auto k = static_cast<std::size_t>(predicted + 1);
  for (std::size_t t = 0; t < 3; ++t) c[t][k] = priors[t];
  return macro_f1(c);
}

// ---- per-sector breakdown --------------------------------------------------

struct SectorScore {
  std::string sector;
  std::size_t support = 0;
  std::size_t correct = 0;
  double accuracy() const { return support ? static_cast<double>(correct) / static_cast<double>(support) : 0.0; }
};

/// Sorted by support (corpus share), descending, then name. Sectors without
/// rows are not listed.
inline std::vector<SectorScore> sector_breakdown(std::span<const std::string> sectors, std::span<const int> truth,
                                                 std::span<const int> pred) {
  if (sectors.size() != truth.size() || truth.size() != pred.size())
    throw Error(Errc::LengthMismatch, "sector, truth and prediction lengths differ");
  std::map<std::string, SectorScore> m;
  for (std::size_t i = 0; i < sectors.size(); ++i) {
    auto& s = m[sectors[i]];
    s.sector = sectors[i];
    ++s.support;
    s.correct += truth[i] == pred[i];
  }
  std::vector<SectorScore> out;
  for (auto& [_, s] : m) out.push_back(s);
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.support > b.support; });
  return out;
}

inline void write_sector_csv(std::ostream& os, std::span<const SectorScore> rows) {
  os << "sector,support,accuracy\n";
  for (const auto& s : rows) os << csv::row({s.sector, std::to_string(s.support), exact(s.accuracy())}) << '\n';
}

inline void write_sector_chart(std::ostream& os, std::span<const SectorScore> rows, int width = 40) {
  std::size_t total = 0;
  for (const auto& s : rows) total += s.support;
  char buf[256];
  for (const auto& s : rows) {
    const int bar = static_cast<int>(std::lround(s.accuracy() * width));
    const double share = total ? 100.0 * static_cast<double>(s.support) / static_cast<double>(total) : 0.0;
    std::snprintf(buf, sizeof buf, "%-24s %5.1f%% |%-*s| %.3f\n", s.sector.c_str(), share, width,
                  std::string(static_cast<std::size_t>(bar), '#').c_str(), s.accuracy());
    os << buf;
  }
}

// ---- result tables ---------------------------------------------------------

struct ResultRow {
  std::string features;
  std::string model;
  std::string scope;
  std::string task;
  double primary = 0.0;    // MSE or accuracy
  double secondary = 0.0;  // R^2 or macro-F1
  double pct_err = 0.0;
  bool has_pct = true;
};

inline void write_results_csv(std::ostream& os, std::span<const ResultRow> rows) {
  os << "features,model,scope,task,mse_or_acc,r2_or_f1,pct_err\n";
  for (const auto& r : rows)
    os << csv::row({r.features, r.model, r.scope, r.task, exact(r.primary), exact(r.secondary),
                    r.has_pct ? exact(r.pct_err) : ""})
       << '\n';
}

inline void write_results_table(std::ostream& os, std::span<const ResultRow> rows) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %-18s %-5s %-15s %10s %10s %8s\n", "Features", "Model", "Scope", "Task",
                "MSE/Acc", "R2/F1", "% err");
  os << buf;
  for (const auto& r : rows) {
    const bool reg = r.task == "regression";
    char pct[32] = "--";
    if (r.has_pct) std::snprintf(pct, sizeof pct, "%.1f", r.pct_err);
    std::snprintf(buf, sizeof buf, reg ? "%-16s %-18s %-5s %-15s %10.5f %10.4f %8s\n"
                                       : "%-16s %-18s %-5s %-15s %10.3f %10.3f %8s\n",
                  r.features.c_str(), r.model.c_str(), r.scope.c_str(), r.task.c_str(), r.primary, r.secondary, pct);
    os << buf;
  }
}

}  // namespace ecall
