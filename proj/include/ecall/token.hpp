#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ecall {

/// Penn Treebank tags (45 including punctuation) as emitted by common taggers.
inline constexpr std::array<std::string_view, 45> kPtbTags = {
    "CC",  "CD",  "DT",  "EX",  "FW",  "IN",  "JJ",  "JJR",  "JJS", "LS",   "MD",   "NN",
    "NNS", "NNP", "NNPS", "PDT", "POS", "PRP", "PRP$", "RB", "RBR", "RBS",  "RP",   "SYM",
    "TO",  "UH",  "VB",  "VBD", "VBG", "VBN", "VBP", "VBZ",  "WDT", "WP",  "WP$",  "WRB",
    "$",   "#",   "``",  "''",  "-LRB-", "-RRB-", ",", ".",  ":"};

/// Universal Dependencies v2 coarse part-of-speech tags.
inline constexpr std::array<std::string_view, 17> kUdTags = {
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"};

inline bool is_ptb_tag(std::string_view tag) {
  return std::find(kPtbTags.begin(), kPtbTags.end(), tag) != kPtbTags.end();
}

inline bool is_ud_tag(std::string_view tag) {
  return std::find(kUdTags.begin(), kUdTags.end(), tag) != kUdTags.end();
}

inline bool is_verb_ptb(std::string_view tag) {
  return tag == "VB" || tag == "VBD" || tag == "VBG" || tag == "VBN" || tag == "VBP" || tag == "VBZ";
}

struct AnnotatedToken {
  std::string surface;
  std::string ptb;
  std::string ud;
  std::optional<std::string> entity;  // fine-grained OntoNotes label
  std::optional<int> span_id;         // present iff entity is present

  bool is_punct() const { return ud == "PUNCT"; }
  bool is_entity() const { return entity.has_value(); }

  friend bool operator==(const AnnotatedToken&, const AnnotatedToken&) = default;
};

/// Half-open token index range [begin, end).
struct SentenceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const SentenceSpan&, const SentenceSpan&) = default;
};

struct Annotation {
  std::vector<AnnotatedToken> tokens;
  std::vector<SentenceSpan> sentences;
};

/// Pluggable annotation backend. The built-in RuleAnnotator implements it;
/// externally produced annotations come in through sidecar files instead.
class Annotator {
 public:
  virtual ~Annotator() = default;
  virtual Annotation annotate(std::string_view text) const = 0;
};

/// Splits a token list into sentences at sentence-final punctuation. Used for
/// pre-annotated input that carries no explicit sentence boundaries.
inline std::vector<SentenceSpan> sentences_from_punctuation(const std::vector<AnnotatedToken>& tokens) {
  std::vector<SentenceSpan> out;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& s = tokens[i].surface;
    if (tokens[i].ptb == "." || s == "?" || s == "!") {
      out.push_back({begin, i + 1});
      begin = i + 1;
    }
  }
  if (begin < tokens.size()) out.push_back({begin, tokens.size()});
  return out;
}

/// Number of non-punctuation tokens. This is the token count used for the
/// short-turn filter and as the denominator of every per-turn ratio.
inline std::size_t word_count(const std::vector<AnnotatedToken>& tokens) {
  return static_cast<std::size_t>(
      std::count_if(tokens.begin(), tokens.end(), [](const AnnotatedToken& t) { return !t.is_punct(); }));
}

}  // namespace ecall
