#pragma once

// The twenty per-turn pragmatic features: entity counts, concreteness,
// predicate temporal orientation, lexicon ratios and turn structure.

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ecall/corpus.hpp"
#include "ecall/csv.hpp"
#include "ecall/lexicons.hpp"
#include "ecall/text.hpp"

namespace ecall {

inline constexpr std::size_t kNumPragmatic = 20;

enum Feature : std::size_t {
  F1NeEvent,
  F2NeNumber,
  F3NeOrgLoc,
  F4NePerson,
  F5NeProduct,
  F6Concreteness,
  F7Past,
  F8Present,
  F9Future,
  F10PosSent,
  F11NegSent,
  F12Hedge,
  F13Modal,
  F14Uncertain,
  F15Constraining,
  F16Litigious,
  F17TurnOrder,
  F18NumTokens,
  F19NumPredicates,
  F20NumSentences,
};

inline constexpr std::array<std::string_view, kNumPragmatic> kFeatureNames = {
    "Named entities event", "Named entities number", "Named entities org/loc", "Named entities person",
    "Named entities product", "Concreteness ratio", "Num past preds", "Num present preds", "Num future preds",
    "Positive sentiment", "Negative sentiment", "Hedging", "Modal", "Uncertain", "Constraining", "Litigious",
    "Turn order", "Num tokens", "Num predicates", "Num sentences"};

inline std::string feature_column(std::size_t i) { return "f" + std::to_string(i + 1); }

using PragmaticVector = std::array<double, kNumPragmatic>;

// ---- entities --------------------------------------------------------------

enum class EntityGroup { Event, Number, OrgLoc, Person, Product };

inline const std::unordered_map<std::string, EntityGroup>& entity_group_map() {
  static const std::unordered_map<std::string, EntityGroup> m = {
      {"EVENT", EntityGroup::Event},          {"ORDINAL", EntityGroup::Number},
      {"MONEY", EntityGroup::Number},         {"PERCENT", EntityGroup::Number},
      {"CARDINAL", EntityGroup::Number},      {"TIME", EntityGroup::Number},
      {"DATE", EntityGroup::Number},          {"QUANTITY", EntityGroup::Number},
      {"LOC", EntityGroup::OrgLoc},           {"NORP", EntityGroup::OrgLoc},
      {"FACILITY", EntityGroup::OrgLoc},      {"GPE", EntityGroup::OrgLoc},
      {"LOCATION", EntityGroup::OrgLoc},      {"ORGANIZATION", EntityGroup::OrgLoc},
      {"PERSON", EntityGroup::Person},        {"PRODUCT", EntityGroup::Product},
  };
  return m;
}

inline std::optional<EntityGroup> entity_group(const std::string& label) {
  const auto& m = entity_group_map();
  const auto it = m.find(label);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

struct EntityFeatures {
  std::array<double, 5> counts{};  // event, number, org/loc, person, product
  double concreteness = 0.0;
  std::vector<std::string> unknown_labels;
};

/// Counts lexicalized entity tokens per coarse group. Concreteness divides
/// the grouped entity tokens by the word count; tokens with an unknown label
/// are reported and left out of both.
inline EntityFeatures entity_features(const Turn& turn) {
  EntityFeatures f;
  std::size_t entities = 0;
  for (const auto& t : turn.tokens) {
    if (!t.entity) continue;
    if (const auto g = entity_group(*t.entity)) {
      f.counts[static_cast<std::size_t>(*g)] += 1.0;
      ++entities;
    } else {
      f.unknown_labels.push_back(*t.entity);
    }
  }
  const std::size_t n = turn.token_count();
  f.concreteness = n == 0 ? 0.0 : static_cast<double>(entities) / static_cast<double>(n);
  return f;
}

// ---- predicates ------------------------------------------------------------

enum class Tense { Past, Present, Future };

constexpr std::string_view to_string(Tense t) {
  switch (t) {
    case Tense::Past: return "past";
    case Tense::Present: return "present";
    case Tense::Future: return "future";
  }
  return "?";
}

inline constexpr std::size_t kTenseWindow = 3;

struct Predicate {
  std::size_t index = 0;
  std::string ptb;
  std::vector<std::string> window;  // up to 3 preceding lowercased tokens in the sentence
};

/// Every verb-tagged token that is not an auxiliary.
inline std::vector<Predicate> extract_predicates(const Turn& turn) {
  std::vector<Predicate> out;
  auto sentence_begin = [&](std::size_t i) {
    for (const auto& s : turn.sentences)
      if (i >= s.begin && i < s.end) return s.begin;
    return std::size_t{0};
  };
  for (std::size_t i = 0; i < turn.tokens.size(); ++i) {
    const auto& t = turn.tokens[i];
    if (!is_verb_ptb(t.ptb) || t.ud == "AUX" || t.entity) continue;
    Predicate p{i, t.ptb, {}};
    const std::size_t lo = std::max(sentence_begin(i), i >= kTenseWindow ? i - kTenseWindow : 0);
    for (std::size_t k = lo; k < i; ++k) p.window.push_back(to_lower(turn.tokens[k].surface));
    out.push_back(std::move(p));
  }
  return out;
}

inline Tense temporal_orientation(const Predicate& p) {
  if (p.ptb == "VBD" || p.ptb == "VBN") return Tense::Past;
  auto has = [&](std::initializer_list<std::string_view> words) {
    for (const auto& w : p.window)
      for (auto m : words)
        if (w == m) return true;
    return false;
  };
  if (has({"will", "'ll", "shall", "wo"})) return Tense::Future;
  if (has({"was", "were"})) return Tense::Past;
  return Tense::Present;
}

// ---- lexicon ratios --------------------------------------------------------

struct LexicalRatios {
  double positive = 0, negative = 0, hedge = 0, modal = 0, uncertain = 0, constraining = 0, litigious = 0;
  double modal_weak = 0, modal_moderate = 0, modal_strong = 0;  // diagnostics
};

inline LexicalRatios lexical_ratios(const Turn& turn, const LexiconSet& lex) {
  LexicalRatios r;
  const std::size_t n = turn.token_count();
  if (n == 0) return r;
  const std::span<const AnnotatedToken> toks(turn.tokens);
  auto ratio = [&](const PhraseMatcher& m) {
    return std::min(1.0, static_cast<double>(m.count(toks)) / static_cast<double>(n));
  };
  r.positive = ratio(lex.positive_m);
  r.negative = ratio(lex.negative_m);
  r.hedge = ratio(lex.hedge_m);
  r.modal = ratio(lex.modal_m);
  r.uncertain = ratio(lex.uncertain_m);
  r.constraining = ratio(lex.constraining_m);
  r.litigious = ratio(lex.litigious_m);
  r.modal_weak = ratio(lex.weak_m);
  r.modal_moderate = ratio(lex.moderate_m);
  r.modal_strong = ratio(lex.strong_m);
  return r;
}

// ---- composition -----------------------------------------------------------

struct PragmaticDiagnostics {
  std::vector<std::string> unknown_entity_labels;
  double modal_weak = 0, modal_moderate = 0, modal_strong = 0;
};

inline PragmaticVector extract_pragmatic_vector(const Turn& turn, const LexiconSet& lex,
                                                PragmaticDiagnostics* diag = nullptr) {
  PragmaticVector v{};
  const EntityFeatures ent = entity_features(turn);
  for (std::size_t g = 0; g < 5; ++g) v[g] = ent.counts[g];
  v[F6Concreteness] = ent.concreteness;

  const auto preds = extract_predicates(turn);
  for (const auto& p : preds) {
    switch (temporal_orientation(p)) {
      case Tense::Past: v[F7Past] += 1; break;
      case Tense::Present: v[F8Present] += 1; break;
      case Tense::Future: v[F9Future] += 1; break;
    }
  }

  const LexicalRatios r = lexical_ratios(turn, lex);
  v[F10PosSent] = r.positive;
  v[F11NegSent] = r.negative;
  v[F12Hedge] = r.hedge;
  v[F13Modal] = r.modal;
  v[F14Uncertain] = r.uncertain;
  v[F15Constraining] = r.constraining;
  v[F16Litigious] = r.litigious;

  v[F17TurnOrder] = turn.turn_order;
  v[F18NumTokens] = static_cast<double>(turn.token_count());
  v[F19NumPredicates] = static_cast<double>(preds.size());
  v[F20NumSentences] = static_cast<double>(turn.sentences.size());

  if (diag) {
    diag->unknown_entity_labels = ent.unknown_labels;
    diag->modal_weak = r.modal_weak;
    diag->modal_moderate = r.modal_moderate;
    diag->modal_strong = r.modal_strong;
  }
  return v;
}

// ---- CSV -------------------------------------------------------------------

struct TurnFeatures {
  std::string call_id;
  std::string speaker;
  Section section = Section::Presentation;
  SpeakerType speaker_type = SpeakerType::Analyst;
  PragmaticVector values{};
};

inline std::vector<TurnFeatures> call_features(const Call& call, const LexiconSet& lex,
                                               std::vector<std::string>* warnings = nullptr) {
  std::vector<TurnFeatures> out;
  out.reserve(call.turns.size());
  for (const auto& t : call.turns) {
    PragmaticDiagnostics d;
    out.push_back({call.id, t.speaker_name, t.section, t.speaker_type, extract_pragmatic_vector(t, lex, &d)});
    if (warnings)
      for (const auto& l : d.unknown_entity_labels)
        warnings->push_back(std::string(to_string(Errc::UnknownEntityLabel)) + ": '" + l + "' in call " + call.id);
  }
  return out;
}

inline std::vector<std::string> feature_csv_header() {
  std::vector<std::string> h = {"call_id", "speaker", "speaker_type", "section"};
  for (std::size_t i = 0; i < kNumPragmatic; ++i) h.push_back(feature_column(i));
  return h;
}

inline void write_feature_csv(std::ostream& os, const std::vector<TurnFeatures>& rows) {
  os << csv::row(feature_csv_header()) << '\n';
  for (const auto& r : rows) {
    std::vector<std::string> f = {r.call_id, r.speaker, std::string(to_string(r.speaker_type)),
                                  std::string(to_string(r.section))};
    for (double v : r.values) f.push_back(exact(v));
    os << csv::row(f) << '\n';
  }
}

}  // namespace ecall
