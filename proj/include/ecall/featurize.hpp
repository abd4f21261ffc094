#pragma once

// Per-call feature vectors: market snapshot, bag of words and averaged
// pragmatic features, with all statistics fit on training rows only.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Sparse>
#include <nlohmann/json.hpp>

#include "ecall/corpus.hpp"
#include "ecall/csv.hpp"
#include "ecall/error.hpp"
#include "ecall/pragmatics.hpp"
#include "ecall/text.hpp"
#include "ecall/timeutil.hpp"

namespace ecall {

enum class Scope { WholeDoc, QAOnly };

constexpr std::string_view to_string(Scope s) { return s == Scope::QAOnly ? "qa" : "wd"; }

inline Scope parse_scope(std::string_view s) {
  const std::string l = to_lower(s);
  if (l == "wd" || l == "wholedoc" || l == "whole") return Scope::WholeDoc;
  if (l == "qa" || l == "qaonly") return Scope::QAOnly;
  throw Error(Errc::InvalidArgument, "unknown scope '" + std::string(s) + "' (wd|qa)");
}

inline bool in_scope(const Turn& t, Scope scope) { return scope == Scope::WholeDoc || t.section == Section::QA; }

inline void require_scope(const Call& call, Scope scope) {
  if (scope == Scope::QAOnly && !call.has_qa_section())
    throw Error(Errc::NoQASection, "call '" + call.id + "' has no question-answer section");
}

// ---- scaling ---------------------------------------------------------------

/// Column mean and population standard deviation. Constant columns scale to 0.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> sd;

  bool fitted() const { return !mean.empty(); }

  static Standardizer fit(const std::vector<std::vector<double>>& rows, std::size_t dims) {
    Standardizer s;
    s.mean.assign(dims, 0.0);
    s.sd.assign(dims, 0.0);
    if (rows.empty()) return s;
    const double n = static_cast<double>(rows.size());
    for (const auto& r : rows)
      for (std::size_t j = 0; j < dims; ++j) s.mean[j] += r[j];
    for (auto& m : s.mean) m /= n;
    for (const auto& r : rows)
      for (std::size_t j = 0; j < dims; ++j) s.sd[j] += (r[j] - s.mean[j]) * (r[j] - s.mean[j]);
    for (auto& v : s.sd) v = std::sqrt(v / n);
    return s;
  }

  std::vector<double> transform(std::span<const double> x) const {
    if (!fitted()) throw Error(Errc::NoTrainingStats, "standardizer used before fit");
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = sd[j] > 0.0 ? (x[j] - mean[j]) / sd[j] : 0.0;
    return out;
  }

  std::vector<double> inverse(std::span<const double> z) const {
    std::vector<double> out(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) out[j] = sd[j] > 0.0 ? z[j] * sd[j] + mean[j] : mean[j];
    return out;
  }
};

// ---- market ----------------------------------------------------------------

inline constexpr std::size_t kNumMarket = 10;

inline constexpr std::array<std::string_view, kNumMarket> kMarketColumns = {
    "open", "high", "low", "volume", "vol30", "vol10", "pe", "rel_pe", "ebit_yield", "earn_yield"};

struct MarketSnapshot {
  std::string ticker;
  Timestamp date{};
  std::array<std::optional<double>, kNumMarket> values{};
};

/// Imputation means and scaling, both from training snapshots.
struct MarketStats {
  Standardizer scale;
  bool fitted() const { return scale.fitted(); }
};

inline std::vector<double> impute(const MarketSnapshot& s, std::span<const double> means) {
  std::vector<double> x(kNumMarket);
  for (std::size_t j = 0; j < kNumMarket; ++j) x[j] = s.values[j] ? *s.values[j] : means[j];
  return x;
}

inline MarketStats fit_market_stats(std::span<const MarketSnapshot> train) {
  std::array<double, kNumMarket> sum{};
  std::array<std::size_t, kNumMarket> cnt{};
  for (const auto& s : train)
    for (std::size_t j = 0; j < kNumMarket; ++j)
      if (s.values[j]) {
        sum[j] += *s.values[j];
        ++cnt[j];
      }
  std::vector<double> means(kNumMarket, 0.0);
  for (std::size_t j = 0; j < kNumMarket; ++j) means[j] = cnt[j] ? sum[j] / static_cast<double>(cnt[j]) : 0.0;
  std::vector<std::vector<double>> rows;
  rows.reserve(train.size());
  for (const auto& s : train) rows.push_back(impute(s, means));
  MarketStats st;
  st.scale = Standardizer::fit(rows, kNumMarket);
  if (rows.empty()) st.scale.mean = means;
  return st;
}

inline std::vector<double> market_vector(const MarketSnapshot& s, const MarketStats& stats) {
  if (!stats.fitted()) throw Error(Errc::NoTrainingStats, "market statistics have not been fit");
  return stats.scale.transform(impute(s, stats.scale.mean));
}

inline std::vector<MarketSnapshot> read_market_csv(std::istream& in) {
  std::vector<std::string> req = {"ticker", "date"};
  for (auto c : kMarketColumns) req.emplace_back(c);
  const auto t = csv::read(in, req);
  std::vector<std::size_t> idx;
  for (auto c : kMarketColumns) idx.push_back(t.column(c));
  std::vector<MarketSnapshot> out;
  for (const auto& row : t.rows) {
    MarketSnapshot s;
    s.ticker = row[t.column("ticker")];
    s.date = parse_timestamp(row[t.column("date")]);
    for (std::size_t j = 0; j < kNumMarket; ++j) s.values[j] = csv::to_optional_double(row[idx[j]]);
    for (std::size_t j : {0u, 1u, 2u, 3u})
      if (s.values[j] && *s.values[j] < 0.0)
        throw Error(Errc::MalformedInput, "negative " + std::string(kMarketColumns[j]) + " for " + s.ticker);
    out.push_back(std::move(s));
  }
  return out;
}

inline void write_market_csv(std::ostream& os, std::span<const MarketSnapshot> rows) {
  std::vector<std::string> h = {"ticker", "date"};
  for (auto c : kMarketColumns) h.emplace_back(c);
  os << csv::row(h) << '\n';
  for (const auto& s : rows) {
    std::vector<std::string> f = {s.ticker, format_date(s.date)};
    for (const auto& v : s.values) f.push_back(v ? exact(*v) : "");
    os << csv::row(f) << '\n';
  }
}

inline constexpr std::chrono::days kMarketLookback{10};

/// Latest snapshot dated strictly before the call's calendar day and no more
/// than ten days earlier. Returns an all-missing snapshot when none exists.
class MarketIndex {
 public:
  explicit MarketIndex(std::span<const MarketSnapshot> rows) {
    for (const auto& r : rows) by_ticker_[r.ticker].push_back(r);
    for (auto& [_, v] : by_ticker_)
      std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.date < b.date; });
  }

  MarketSnapshot prior_to(const std::string& ticker, Timestamp call) const {
    MarketSnapshot empty;
    empty.ticker = ticker;
    const auto it = by_ticker_.find(ticker);
    if (it == by_ticker_.end()) return empty;
    const Timestamp day = std::chrono::floor<std::chrono::days>(call);
    const MarketSnapshot* best = nullptr;
    for (const auto& s : it->second) {
      if (s.date >= day) break;
      if (s.date >= day - kMarketLookback) best = &s;
    }
    return best ? *best : empty;
  }

 private:
  std::map<std::string, std::vector<MarketSnapshot>> by_ticker_;
};

// ---- bag of words ----------------------------------------------------------

inline constexpr std::size_t kMaxVocabulary = 100000;

inline bool is_content_tag(std::string_view ud) {
  static constexpr std::array<std::string_view, 8> tags = {"ADJ", "ADV", "AUX", "INTJ", "NOUN", "PRON", "PROPN", "VERB"};
  return std::find(tags.begin(), tags.end(), ud) != tags.end();
}

inline std::string vocab_key(const AnnotatedToken& t) { return to_lower(t.surface) + "|" + t.ud; }

struct Vocabulary {
  std::vector<std::string> entries;
  std::unordered_map<std::string, std::size_t> index;

  std::size_t size() const { return entries.size(); }

  std::optional<std::size_t> find(const std::string& key) const {
    const auto it = index.find(key);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }

  static Vocabulary from_entries(std::vector<std::string> entries) {
    Vocabulary v;
    v.entries = std::move(entries);
    for (std::size_t i = 0; i < v.entries.size(); ++i) v.index.emplace(v.entries[i], i);
    return v;
  }
};

/// Ranks content-word keys by training frequency, ties lexicographic, and
/// keeps the top `cap`. Calls lacking a Q&A section contribute nothing under
/// QAOnly.
inline Vocabulary build_vocabulary(std::span<const Call> train, Scope scope, std::size_t cap = kMaxVocabulary) {
  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& call : train)
    for (const auto& turn : call.turns) {
      if (!in_scope(turn, scope)) continue;
      for (const auto& tok : turn.tokens)
        if (is_content_tag(tok.ud)) ++freq[vocab_key(tok)];
    }
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; });
  if (ranked.size() > cap) ranked.resize(cap);
  std::vector<std::string> entries;
  entries.reserve(ranked.size());
  for (auto& [k, _] : ranked) entries.push_back(std::move(k));
  return Vocabulary::from_entries(std::move(entries));
}

/// Sorted (column, count) pairs.
using SparseCounts = std::vector<std::pair<std::size_t, double>>;

inline SparseCounts bow_vector(const Call& call, const Vocabulary& vocab, Scope scope) {
  require_scope(call, scope);
  std::map<std::size_t, double> counts;
  for (const auto& turn : call.turns) {
    if (!in_scope(turn, scope)) continue;
    for (const auto& tok : turn.tokens)
      if (is_content_tag(tok.ud))
        if (const auto j = vocab.find(vocab_key(tok))) counts[*j] += 1.0;
  }
  return {counts.begin(), counts.end()};
}

// ---- pragmatics ------------------------------------------------------------

inline PragmaticVector mean_vector(std::span<const PragmaticVector> vs) {
  PragmaticVector m{};
  if (vs.empty()) return m;
  for (const auto& v : vs)
    for (std::size_t j = 0; j < kNumPragmatic; ++j) m[j] += v[j];
  for (auto& x : m) x /= static_cast<double>(vs.size());
  return m;
}

inline PragmaticVector aggregate_pragmatics(const Call& call, const LexiconSet& lex, Scope scope) {
  require_scope(call, scope);
  std::vector<PragmaticVector> vs;
  for (const auto& turn : call.turns)
    if (in_scope(turn, scope)) vs.push_back(extract_pragmatic_vector(turn, lex));
  return mean_vector(vs);
}

// ---- feature matrices ------------------------------------------------------

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct FeatureMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> columns;
  SparseMatrix X;
  Scope scope = Scope::WholeDoc;

  std::size_t rows() const { return row_ids.size(); }
  std::size_t cols() const { return columns.size(); }
};

inline std::uint64_t manifest_hash(std::span<const std::string> columns) {
  std::uint64_t h = fnv1a("ecall-columns");
  for (const auto& c : columns) h = fnv1a(c + "\n", h);
  return h;
}

inline SparseMatrix build_sparse(std::size_t rows, std::size_t cols,
                                 const std::vector<Eigen::Triplet<double>>& triplets) {
  SparseMatrix X(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  X.setFromTriplets(triplets.begin(), triplets.end());
  X.makeCompressed();
  return X;
}

/// Column-wise concatenation of matrices sharing the same rows.
inline FeatureMatrix hstack(const std::vector<const FeatureMatrix*>& parts) {
  if (parts.empty()) throw Error(Errc::InvalidArgument, "nothing to concatenate");
  FeatureMatrix out;
  out.row_ids = parts.front()->row_ids;
  out.scope = parts.front()->scope;
  std::vector<Eigen::Triplet<double>> trip;
  std::size_t offset = 0;
  for (const auto* m : parts) {
    if (m->row_ids != out.row_ids) throw Error(Errc::LengthMismatch, "feature blocks have different rows");
    for (Eigen::Index r = 0; r < m->X.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(m->X, r); it; ++it)
        trip.emplace_back(static_cast<int>(r), static_cast<int>(offset + static_cast<std::size_t>(it.col())), it.value());
    out.columns.insert(out.columns.end(), m->columns.begin(), m->columns.end());
    offset += m->cols();
  }
  out.X = build_sparse(out.rows(), out.cols(), trip);
  return out;
}

inline FeatureMatrix select_rows(const FeatureMatrix& m, std::span<const std::size_t> rows) {
  FeatureMatrix out;
  out.columns = m.columns;
  out.scope = m.scope;
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row_ids.push_back(m.row_ids[rows[i]]);
    for (SparseMatrix::InnerIterator it(m.X, static_cast<Eigen::Index>(rows[i])); it; ++it)
      trip.emplace_back(static_cast<int>(i), static_cast<int>(it.col()), it.value());
  }
  out.X = build_sparse(out.rows(), out.cols(), trip);
  return out;
}

/// Triplet file `row,col,value` (zero-based, non-zeros only) plus a manifest
/// listing the scope, row ids and column names.
inline void write_triplets(std::ostream& os, const FeatureMatrix& m) {
  os << "row,col,value\n";
  for (Eigen::Index r = 0; r < m.X.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(m.X, r); it; ++it)
      os << r << ',' << it.col() << ',' << exact(it.value()) << '\n';
}

inline nlohmann::json manifest_json(const FeatureMatrix& m) {
  return {{"scope", std::string(to_string(m.scope))},
          {"rows", m.row_ids},
          {"columns", m.columns},
          {"column_hash", manifest_hash(m.columns)}};
}

inline FeatureMatrix read_feature_matrix(std::istream& triplets, const nlohmann::json& manifest) {
  FeatureMatrix m;
  try {
    m.scope = parse_scope(manifest.at("scope").get<std::string>());
    m.row_ids = manifest.at("rows").get<std::vector<std::string>>();
    m.columns = manifest.at("columns").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedInput, std::string("feature manifest: ") + e.what());
  }
  const auto t = csv::read(triplets, {"row", "col", "value"});
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    const auto r = static_cast<std::size_t>(csv::to_double(row[0]));
    const auto c = static_cast<std::size_t>(csv::to_double(row[1]));
    if (r >= m.rows() || c >= m.cols()) throw Error(Errc::MalformedInput, "triplet index out of range");
    trip.emplace_back(static_cast<int>(r), static_cast<int>(c), csv::to_double(row[2]));
  }
  m.X = build_sparse(m.rows(), m.cols(), trip);
  return m;
}

inline FeatureMatrix dense_block(std::vector<std::string> row_ids, std::vector<std::string> columns,
                                 const std::vector<std::vector<double>>& rows, Scope scope) {
  FeatureMatrix m;
  m.row_ids = std::move(row_ids);
  m.columns = std::move(columns);
  m.scope = scope;
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      if (rows[i][j] != 0.0) trip.emplace_back(static_cast<int>(i), static_cast<int>(j), rows[i][j]);
  m.X = build_sparse(m.row_ids.size(), m.columns.size(), trip);
  return m;
}

// ---- fitted featurizer -----------------------------------------------------

/// Everything learned from the training split that later splits reuse.
struct FeaturizerState {
  Scope scope = Scope::WholeDoc;
  Vocabulary vocab;
  MarketStats market;
  Standardizer pragmatic;
};

inline std::vector<std::string> market_column_names() {
  std::vector<std::string> c;
  for (auto n : kMarketColumns) c.push_back("mkt:" + std::string(n));
  return c;
}

inline std::vector<std::string> pragmatic_column_names() {
  std::vector<std::string> c;
  for (std::size_t i = 0; i < kNumPragmatic; ++i) c.push_back("prag:" + feature_column(i));
  return c;
}

inline std::vector<std::string> bow_column_names(const Vocabulary& v) {
  std::vector<std::string> c;
  c.reserve(v.size());
  for (const auto& e : v.entries) c.push_back("bow:" + e);
  return c;
}

struct CallFeatures {
  const Call* call = nullptr;
  MarketSnapshot market;
  PragmaticVector pragmatic{};  // already aggregated for the scope
};

inline FeaturizerState fit_featurizer(std::span<const CallFeatures> train, Scope scope) {
  FeaturizerState st;
  st.scope = scope;
  std::vector<Call> calls;
  std::vector<MarketSnapshot> snaps;
  std::vector<std::vector<double>> prag;
  for (const auto& cf : train) {
    calls.push_back(*cf.call);
    snaps.push_back(cf.market);
    prag.emplace_back(cf.pragmatic.begin(), cf.pragmatic.end());
  }
  st.vocab = build_vocabulary(calls, scope);
  st.market = fit_market_stats(snaps);
  st.pragmatic = Standardizer::fit(prag, kNumPragmatic);
  return st;
}

struct FeatureBlocks {
  FeatureMatrix market;
  FeatureMatrix bow;
  FeatureMatrix pragmatic;
};

inline FeatureBlocks transform_features(std::span<const CallFeatures> rows, const FeaturizerState& st) {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> mkt, prag;
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ids.push_back(rows[i].call->id);
    mkt.push_back(market_vector(rows[i].market, st.market));
    prag.push_back(st.pragmatic.transform(rows[i].pragmatic));
    for (const auto& [j, v] : bow_vector(*rows[i].call, st.vocab, st.scope))
      trip.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
  }
  FeatureBlocks b;
  b.market = dense_block(ids, market_column_names(), mkt, st.scope);
  b.pragmatic = dense_block(ids, pragmatic_column_names(), prag, st.scope);
  b.bow.row_ids = ids;
  b.bow.columns = bow_column_names(st.vocab);
  b.bow.scope = st.scope;
  b.bow.X = build_sparse(ids.size(), st.vocab.size(), trip);
  return b;
}

inline nlohmann::json featurizer_to_json(const FeaturizerState& st) {
  return {{"scope", std::string(to_string(st.scope))},
          {"vocabulary", st.vocab.entries},
          {"market_mean", st.market.scale.mean},
          {"market_sd", st.market.scale.sd},
          {"pragmatic_mean", st.pragmatic.mean},
          {"pragmatic_sd", st.pragmatic.sd}};
}

inline FeaturizerState featurizer_from_json(const nlohmann::json& j) {
  try {
    FeaturizerState st;
    st.scope = parse_scope(j.at("scope").get<std::string>());
    st.vocab = Vocabulary::from_entries(j.at("vocabulary").get<std::vector<std::string>>());
    st.market.scale.mean = j.at("market_mean").get<std::vector<double>>();
    st.market.scale.sd = j.at("market_sd").get<std::vector<double>>();
    st.pragmatic.mean = j.at("pragmatic_mean").get<std::vector<double>>();
    st.pragmatic.sd = j.at("pragmatic_sd").get<std::vector<double>>();
    return st;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedInput, std::string("featurizer state: ") + e.what());
  }
}

}  // namespace ecall
