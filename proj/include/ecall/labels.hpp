#pragma once

// Prediction targets: the average percent change of analysts' price targets
// around a call, and its three-way binning.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ecall/csv.hpp"
#include "ecall/error.hpp"
#include "ecall/text.hpp"
#include "ecall/timeutil.hpp"

namespace ecall {

inline constexpr double kNegativeThreshold = -0.0167;
inline constexpr int kPreCallMonths = 3;
inline constexpr std::chrono::days kPostCallDays{14};

struct PriceTargetRecord {
  std::string analyst_id;
  std::string ticker;
  Timestamp timestamp{};
  double price_target = 0.0;
};

struct TargetPair {
  double before = 0.0;
  double after = 0.0;
};

/// Latest target in [call - 3 months, call) and latest in (call, call + 14
/// days] for one analyst on one ticker. Records stamped exactly at the call
/// belong to neither window.
inline std::optional<TargetPair> select_targets(std::span<const PriceTargetRecord> records, Timestamp call) {
  const Timestamp pre_lo = add_calendar_months(call, -kPreCallMonths);
  const Timestamp post_hi = call + kPostCallDays;
  std::optional<std::pair<Timestamp, double>> b, a;
  for (const auto& r : records) {
    if (r.timestamp >= pre_lo && r.timestamp < call) {
      if (!b || r.timestamp >= b->first) b = {r.timestamp, r.price_target};
    } else if (r.timestamp > call && r.timestamp <= post_hi) {
      if (!a || r.timestamp >= a->first) a = {r.timestamp, r.price_target};
    }
  }
  if (!b || !a) return std::nullopt;
  return TargetPair{b->second, a->second};
}

inline double percent_change(std::span<const TargetPair> pairs) {
  if (pairs.empty()) throw Error(Errc::EmptyAnalystSet, "no analyst has targets on both sides of the call");
  double sum = 0.0;
  for (const auto& p : pairs) {
    if (!(p.before > 0.0)) throw Error(Errc::InvalidArgument, "price target before the call must be positive");
    sum += (p.after - p.before) / p.before;
  }
  return sum / static_cast<double>(pairs.size());
}

inline int classify_change(double y) {
  if (!std::isfinite(y)) throw Error(Errc::InvalidArgument, "label value is not finite");
  if (y < kNegativeThreshold) return -1;
  if (y <= 0.0) return 0;
  return 1;
}

struct CallLabel {
  std::string call_id;
  double y = 0.0;
  int c = 0;
  std::size_t analysts = 0;
};

struct CallKey {
  std::string call_id;
  std::string ticker;
  Timestamp datetime{};
};

/// Labels every call that has at least one analyst with targets in both
/// windows; calls without such analysts are reported in `skipped`.
inline std::vector<CallLabel> build_labels(std::span<const CallKey> calls, std::span<const PriceTargetRecord> records,
                                           std::vector<std::string>* skipped = nullptr) {
  std::map<std::string, std::map<std::string, std::vector<PriceTargetRecord>>> by_ticker;
  for (const auto& r : records) by_ticker[r.ticker][r.analyst_id].push_back(r);
  std::vector<CallLabel> out;
  for (const auto& call : calls) {
    std::vector<TargetPair> pairs;
    if (const auto it = by_ticker.find(call.ticker); it != by_ticker.end()) {
      for (auto& [analyst, recs] : it->second)
        if (const auto p = select_targets(recs, call.datetime)) pairs.push_back(*p);
    }
    if (pairs.empty()) {
      if (skipped) skipped->push_back(call.call_id);
      continue;
    }
    const double y = percent_change(pairs);
    out.push_back({call.call_id, y, classify_change(y), pairs.size()});
  }
  return out;
}

inline std::vector<PriceTargetRecord> read_price_targets(std::istream& in) {
  const auto t = csv::read(in, {"analyst_id", "ticker", "timestamp", "price_target"});
  const auto ia = t.column("analyst_id"), it = t.column("ticker"), ts = t.column("timestamp"),
             ip = t.column("price_target");
  std::vector<PriceTargetRecord> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    PriceTargetRecord r{row[ia], row[it], parse_timestamp(row[ts]), csv::to_double(row[ip])};
    if (!(r.price_target > 0.0)) throw Error(Errc::MalformedInput, "non-positive price target for " + r.analyst_id);
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_labels(std::ostream& os, std::span<const CallLabel> labels) {
  os << "call_id,y,c,n_analysts\n";
  for (const auto& l : labels)
    os << csv::row({l.call_id, exact(l.y), std::to_string(l.c), std::to_string(l.analysts)}) << '\n';
}

inline std::vector<CallLabel> read_labels(std::istream& in) {
  const auto t = csv::read(in, {"call_id", "y", "c", "n_analysts"});
  std::vector<CallLabel> out;
  for (const auto& row : t.rows)
    out.push_back({row[t.column("call_id")], csv::to_double(row[t.column("y")]),
                   static_cast<int>(csv::to_double(row[t.column("c")])),
                   static_cast<std::size_t>(csv::to_double(row[t.column("n_analysts")]))});
  return out;
}

}  // namespace ecall
