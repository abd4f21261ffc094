#pragma once

#include <algorithm>
#include <filesystem>
#include <istream>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ecall/annotate.hpp"
#include "ecall/error.hpp"
#include "ecall/text.hpp"
#include "ecall/token.hpp"

namespace ecall {

enum class LexiconCategory {
  PosFin,
  PosGen,
  NegFin,
  NegGen,
  HedgeUni,
  HedgeMulti,
  ModalWeak,
  ModalModerate,
  ModalStrong,
  Uncertain,
  Constraining,
  Litigious,
};

using Phrase = std::vector<std::string>;

struct Lexicon {
  std::string name;
  LexiconCategory category = LexiconCategory::PosFin;
  std::set<std::string> unigrams;
  std::set<Phrase> phrases;  // every phrase has >= 2 tokens
  std::size_t duplicates_dropped = 0;

  std::size_t size() const { return unigrams.size() + phrases.size(); }
  bool empty() const { return size() == 0; }
  bool contains(const Phrase& entry) const {
    return entry.size() == 1 ? unigrams.contains(entry.front()) : phrases.contains(entry);
  }
};

/// Splits a lexicon entry into tokens the same way running text is tokenized,
/// so "don't know" matches the token pair ("do", "n't", "know").
inline Phrase entry_tokens(std::string_view entry) {
  Phrase p;
  for (auto& t : tokenize(to_lower(trim(entry)))) p.push_back(std::move(t));
  return p;
}

inline void add_entry(Lexicon& lex, const Phrase& p) {
  if (p.empty()) return;
  const bool fresh = p.size() == 1 ? lex.unigrams.insert(p.front()).second : lex.phrases.insert(p).second;
  if (!fresh) ++lex.duplicates_dropped;
}

/// Line-oriented lexicon text: UTF-8, one term per line, multi-word terms
/// space separated, lines starting with '#' ignored. Entries are lowercased.
inline Lexicon parse_lexicon(std::istream& in, std::string name, LexiconCategory category) {
  Lexicon lex;
  lex.name = std::move(name);
  lex.category = category;
  for (std::string line; std::getline(in, line);) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    add_entry(lex, entry_tokens(t));
  }
  return lex;
}

inline Lexicon load_lexicon(const std::filesystem::path& path, LexiconCategory category) {
  std::istringstream in(read_file(path.string()));
  return parse_lexicon(in, path.stem().string(), category);
}

inline Lexicon union_of(std::string name, LexiconCategory category, std::initializer_list<const Lexicon*> parts) {
  Lexicon out;
  out.name = std::move(name);
  out.category = category;
  for (const Lexicon* l : parts) {
    out.unigrams.insert(l->unigrams.begin(), l->unigrams.end());
    out.phrases.insert(l->phrases.begin(), l->phrases.end());
  }
  return out;
}

struct MergedSentimentLexicon {
  Lexicon positive;
  Lexicon negative;
  /// Terms found with both polarities, as "term -> polarity" lines.
  std::vector<std::string> override_log;
};

/// Unions the financial and general-purpose lists per polarity. A term that
/// ends up in both unions takes the financial lexicon's polarity; without a
/// financial verdict it is dropped from both. "question" and "questions" are
/// removed from the negative side.
inline MergedSentimentLexicon merge_sentiment(const Lexicon& fin_pos, const Lexicon& fin_neg, const Lexicon& gen_pos,
                                              const Lexicon& gen_neg) {
  MergedSentimentLexicon m;
  m.positive = union_of("positive", LexiconCategory::PosFin, {&fin_pos, &gen_pos});
  m.negative = union_of("negative", LexiconCategory::NegFin, {&fin_neg, &gen_neg});

  std::vector<Phrase> conflicts;
  for (const auto& u : m.positive.unigrams)
    if (m.negative.unigrams.contains(u)) conflicts.push_back({u});
  for (const auto& p : m.positive.phrases)
    if (m.negative.phrases.contains(p)) conflicts.push_back(p);

  auto erase = [](Lexicon& lex, const Phrase& p) {
    if (p.size() == 1) lex.unigrams.erase(p.front());
    else lex.phrases.erase(p);
  };
  for (const auto& term : conflicts) {
    const bool fin_says_pos = fin_pos.contains(term);
    const bool fin_says_neg = fin_neg.contains(term);
    const std::string label = join(term, " ");
    if (fin_says_neg && !fin_says_pos) {
      erase(m.positive, term);
      m.override_log.push_back(label + " -> negative");
    } else if (fin_says_pos && !fin_says_neg) {
      erase(m.negative, term);
      m.override_log.push_back(label + " -> positive");
    } else {
      erase(m.positive, term);
      erase(m.negative, term);
      m.override_log.push_back(label + " -> dropped");
    }
  }
  m.negative.unigrams.erase("question");
  m.negative.unigrams.erase("questions");
  return m;
}

/// Token-level trie for greedy longest-match counting. Matching is
/// left-to-right and non-overlapping; a phrase hit consumes its tokens and
/// counts once. Entity tokens never match and break phrases.
class PhraseMatcher {
 public:
  PhraseMatcher() : nodes_(1) {}

  explicit PhraseMatcher(const Lexicon& lex) : nodes_(1) {
    for (const auto& u : lex.unigrams) insert({u});
    for (const auto& p : lex.phrases) insert(p);
  }

  struct Match {
    std::size_t begin;
    std::size_t length;
  };

  std::vector<Match> matches(std::span<const AnnotatedToken> tokens) const {
    std::vector<Match> out;
    std::vector<std::string> lowered(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i)
      if (!tokens[i].is_entity()) lowered[i] = to_lower(tokens[i].surface);

    std::size_t i = 0;
    while (i < tokens.size()) {
      std::size_t best = 0;
      std::size_t node = 0;
      for (std::size_t j = i; j < tokens.size() && !tokens[j].is_entity(); ++j) {
        const auto it = nodes_[node].next.find(lowered[j]);
        if (it == nodes_[node].next.end()) break;
        node = it->second;
        if (nodes_[node].terminal) best = j - i + 1;
      }
      if (best > 0) {
        out.push_back({i, best});
        i += best;
      } else {
        ++i;
      }
    }
    return out;
  }

  std::size_t count(std::span<const AnnotatedToken> tokens) const { return matches(tokens).size(); }

 private:
  struct Node {
    std::unordered_map<std::string, std::size_t> next;
    bool terminal = false;
  };

  void insert(const Phrase& p) {
    std::size_t node = 0;
    for (const auto& tok : p) {
      auto it = nodes_[node].next.find(tok);
      if (it == nodes_[node].next.end()) {
        nodes_.push_back({});
        it = nodes_[node].next.emplace(tok, nodes_.size() - 1).first;
      }
      node = it->second;
    }
    nodes_[node].terminal = true;
  }

  std::vector<Node> nodes_;
};

inline std::size_t count_matches(std::span<const AnnotatedToken> tokens, const Lexicon& lexicon) {
  return PhraseMatcher(lexicon).count(tokens);
}

/// Every lexicon the pragmatic features need, with matchers prebuilt.
struct LexiconSet {
  MergedSentimentLexicon sentiment;
  Lexicon hedge;  // unigram + multi-word hedges
  Lexicon modal_weak, modal_moderate, modal_strong;
  Lexicon modal;  // union of the three modal strengths
  Lexicon uncertain, constraining, litigious;

  PhraseMatcher positive_m, negative_m, hedge_m, modal_m, weak_m, moderate_m, strong_m, uncertain_m,
      constraining_m, litigious_m;

  void build_matchers() {
    positive_m = PhraseMatcher(sentiment.positive);
    negative_m = PhraseMatcher(sentiment.negative);
    hedge_m = PhraseMatcher(hedge);
    modal_m = PhraseMatcher(modal);
    weak_m = PhraseMatcher(modal_weak);
    moderate_m = PhraseMatcher(modal_moderate);
    strong_m = PhraseMatcher(modal_strong);
    uncertain_m = PhraseMatcher(uncertain);
    constraining_m = PhraseMatcher(constraining);
    litigious_m = PhraseMatcher(litigious);
  }
};

/// File names expected inside a lexicon directory.
struct LexiconFiles {
  static constexpr const char* fin_positive = "lm_positive.txt";
  static constexpr const char* fin_negative = "lm_negative.txt";
  static constexpr const char* gen_positive = "socal_positive.txt";
  static constexpr const char* gen_negative = "socal_negative.txt";
  static constexpr const char* hedge_uni = "hedge_unigrams.txt";
  static constexpr const char* hedge_multi = "hedge_multiword.txt";
  static constexpr const char* modal_weak = "lm_modal_weak.txt";
  static constexpr const char* modal_moderate = "lm_modal_moderate.txt";
  static constexpr const char* modal_strong = "lm_modal_strong.txt";
  static constexpr const char* uncertain = "lm_uncertainty.txt";
  static constexpr const char* constraining = "lm_constraining.txt";
  static constexpr const char* litigious = "lm_litigious.txt";
};

struct LexiconLoadReport {
  std::map<std::string, std::size_t> term_counts;
  std::vector<std::string> warnings;
};

inline LexiconSet load_lexicon_set(const std::filesystem::path& dir, LexiconLoadReport* report = nullptr) {
  auto load = [&](const char* file, LexiconCategory cat) {
    Lexicon lex = load_lexicon(dir / file, cat);
    if (report) {
      report->term_counts[lex.name] = lex.size();
      if (lex.empty()) report->warnings.push_back(std::string(to_string(Errc::EmptyLexicon)) + ": " + file);
    }
    return lex;
  };
  LexiconSet set;
  const Lexicon fin_pos = load(LexiconFiles::fin_positive, LexiconCategory::PosFin);
  const Lexicon fin_neg = load(LexiconFiles::fin_negative, LexiconCategory::NegFin);
  const Lexicon gen_pos = load(LexiconFiles::gen_positive, LexiconCategory::PosGen);
  const Lexicon gen_neg = load(LexiconFiles::gen_negative, LexiconCategory::NegGen);
  set.sentiment = merge_sentiment(fin_pos, fin_neg, gen_pos, gen_neg);
  const Lexicon hedge_uni = load(LexiconFiles::hedge_uni, LexiconCategory::HedgeUni);
  const Lexicon hedge_multi = load(LexiconFiles::hedge_multi, LexiconCategory::HedgeMulti);
  set.hedge = union_of("hedge", LexiconCategory::HedgeUni, {&hedge_uni, &hedge_multi});
  set.modal_weak = load(LexiconFiles::modal_weak, LexiconCategory::ModalWeak);
  set.modal_moderate = load(LexiconFiles::modal_moderate, LexiconCategory::ModalModerate);
  set.modal_strong = load(LexiconFiles::modal_strong, LexiconCategory::ModalStrong);
  set.modal = union_of("modal", LexiconCategory::ModalWeak, {&set.modal_weak, &set.modal_moderate, &set.modal_strong});
  set.uncertain = load(LexiconFiles::uncertain, LexiconCategory::Uncertain);
  set.constraining = load(LexiconFiles::constraining, LexiconCategory::Constraining);
  set.litigious = load(LexiconFiles::litigious, LexiconCategory::Litigious);
  set.build_matchers();
  return set;
}

}  // namespace ecall
