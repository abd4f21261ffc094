#pragma once

// Pearson correlations between pragmatic features and analyst stance with a
// Bonferroni-corrected significance threshold.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "ecall/csv.hpp"
#include "ecall/error.hpp"
#include "ecall/pragmatics.hpp"
#include "ecall/timeutil.hpp"

namespace ecall {

enum class Stance { Bearish = 1, Neutral = 2, Bullish = 3 };

inline Stance stance_from_rating(int rating) {
  if (rating < 1 || rating > 5) throw Error(Errc::InvalidArgument, "rating must be 1-5, got " + std::to_string(rating));
  if (rating <= 2) return Stance::Bearish;
  if (rating == 3) return Stance::Neutral;
  return Stance::Bullish;
}

struct AnalystStance {
  std::string analyst_id;
  int rating = 3;
  Stance stance = Stance::Neutral;
};

struct RatingRecord {
  std::string analyst_id;
  std::string ticker;
  Timestamp date{};
  int rating = 3;
};

inline std::vector<RatingRecord> read_ratings(std::istream& in) {
  const auto t = csv::read(in, {"analyst_id", "ticker", "date", "rating"});
  const auto ia = t.column("analyst_id"), it = t.column("ticker"), id = t.column("date"), ir = t.column("rating");
  std::vector<RatingRecord> out;
  for (const auto& row : t.rows) {
    const double r = csv::to_double(row[ir]);
    if (r != std::floor(r) || r < 1 || r > 5) throw Error(Errc::MalformedInput, "rating must be an integer 1-5");
    out.push_back({row[ia], row[it], parse_timestamp(row[id]), static_cast<int>(r)});
  }
  return out;
}

inline void write_ratings(std::ostream& os, std::span<const RatingRecord> rows) {
  os << "analyst_id,ticker,date,rating\n";
  for (const auto& r : rows)
    os << csv::row({r.analyst_id, r.ticker, format_timestamp(r.date), std::to_string(r.rating)}) << '\n';
}

/// Latest rating per (analyst, ticker) strictly before a given time.
class RatingIndex {
 public:
  explicit RatingIndex(std::span<const RatingRecord> rows) {
    for (const auto& r : rows) by_key_[key(r.analyst_id, r.ticker)].push_back(r);
    for (auto& [_, v] : by_key_)
      std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.date < b.date; });
  }

  std::optional<int> before(const std::string& analyst, const std::string& ticker, Timestamp when) const {
    const auto it = by_key_.find(key(analyst, ticker));
    if (it == by_key_.end()) return std::nullopt;
    std::optional<int> out;
    for (const auto& r : it->second) {
      if (r.date >= when) break;
      out = r.rating;
    }
    return out;
  }

 private:
  static std::string key(const std::string& analyst, const std::string& ticker) {
    return to_lower(trim(analyst)) + '\x1f' + ticker;
  }
  std::map<std::string, std::vector<RatingRecord>> by_key_;
};

struct PearsonResult {
  double r = 0.0;
  double p = 1.0;
  std::size_t n = 0;
};

/// Two-sided p-value of a sample correlation under the null, from the
/// Student-t distribution with n-2 degrees of freedom.
inline double correlation_p_value(double r, std::size_t n) {
  if (n < 3) throw Error(Errc::InsufficientData, "need n >= 3");
  const double df = static_cast<double>(n - 2);
  const double r2 = r * r;
  if (r2 >= 1.0) return 0.0;
  const double t2 = r2 * df / (1.0 - r2);
  return std::clamp(boost::math::ibeta(df / 2.0, 0.5, df / (df + t2)), 0.0, 1.0);
}

/// Pairs are summed in sorted order so the result does not depend on the
/// order in which observations arrive.
inline PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error(Errc::LengthMismatch, std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  const std::size_t n = x.size();
  if (n < 3) throw Error(Errc::InsufficientData, "pearson needs n >= 3, got " + std::to_string(n));

  std::vector<std::pair<double, double>> xy(n);
  for (std::size_t i = 0; i < n; ++i) xy[i] = {x[i], y[i]};
  std::sort(xy.begin(), xy.end());

  double sx = 0, sy = 0;
  for (const auto& [a, b] : xy) {
    sx += a;
    sy += b;
  }
  const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
  double sxx = 0, syy = 0, sxy = 0;
  for (const auto& [a, b] : xy) {
    sxx += (a - mx) * (a - mx);
    syy += (b - my) * (b - my);
    sxy += (a - mx) * (b - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(Errc::ConstantVector, "pearson input is constant");
  const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return {r, correlation_p_value(r, n), n};
}

inline double bonferroni_threshold(double alpha, std::size_t m) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::InvalidArgument, "alpha must lie in (0,1)");
  if (m == 0) throw Error(Errc::InvalidArgument, "number of tests must be >= 1");
  return alpha / static_cast<double>(m);
}

struct CorrelationRow {
  std::size_t feature = 0;  // 1-based
  double r = 0.0;
  double p = 1.0;
  std::size_t n = 0;
  bool significant = false;
  bool constant = false;
};

struct StudyResult {
  std::vector<CorrelationRow> rows;
  double threshold = 0.0;
  std::size_t n = 0;
};

struct StudyObservation {
  PragmaticVector features{};
  Stance stance = Stance::Neutral;
};

/// Correlates each feature with the ordinal stance code (1, 2, 3). A feature
/// that is constant over the sample gets r = 0, p = 1 and is flagged.
inline StudyResult run_study(std::span<const StudyObservation> obs, double alpha = 0.05) {
  if (obs.size() < 3)
    throw Error(Errc::InsufficientData, "correlation study needs >= 3 question turns, got " + std::to_string(obs.size()));
  StudyResult res;
  res.n = obs.size();
  res.threshold = bonferroni_threshold(alpha, kNumPragmatic);
  std::vector<double> s(obs.size()), x(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) s[i] = static_cast<double>(obs[i].stance);
  for (std::size_t f = 0; f < kNumPragmatic; ++f) {
    for (std::size_t i = 0; i < obs.size(); ++i) x[i] = obs[i].features[f];
    CorrelationRow row{f + 1, 0.0, 1.0, obs.size(), false, false};
    try {
      const auto pr = pearson(x, s);
      row.r = pr.r;
      row.p = pr.p;
      row.significant = pr.p < res.threshold;
    } catch (const Error& e) {
      if (e.code() != Errc::ConstantVector) throw;
      row.constant = true;
    }
    res.rows.push_back(row);
  }
  return res;
}

inline void write_study_csv(std::ostream& os, const StudyResult& res) {
  os << csv::row({"no", "feature", "r", "p", "n", "significant"}) << '\n';
  for (const auto& row : res.rows)
    os << csv::row({std::to_string(row.feature), std::string(kFeatureNames[row.feature - 1]), exact(row.r), exact(row.p),
                    std::to_string(row.n), row.significant ? "1" : "0"})
       << '\n';
}

inline void write_study_table(std::ostream& os, const StudyResult& res) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-4s %-26s %9s %11s\n", "No.", "Feature", "r", "p");
  os << buf;
  for (const auto& row : res.rows) {
    const std::string no = std::to_string(row.feature) + (row.significant ? "*" : "");
    char p[32];
    if (row.p < 1e-4) std::snprintf(p, sizeof p, "<1e-4");
    else std::snprintf(p, sizeof p, "%.4f", row.p);
    std::snprintf(buf, sizeof buf, "%-4s %-26s %9.4f %11s%s\n", no.c_str(),
                  std::string(kFeatureNames[row.feature - 1]).c_str(), row.r, p, row.constant ? "  (constant)" : "");
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "Total %zu question turns; * marks p < %g\n", res.n, res.threshold);
  os << buf;
}

}  // namespace ecall
