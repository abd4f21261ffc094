#pragma once

// Built-in rule annotator: PTB-style tokenizer, lexicon + suffix POS tagger,
// fixed PTB->UD mapping with auxiliary detection, and pattern/gazetteer
// entity rules producing OntoNotes labels.

#include <cctype>
#include <optional>
#include <algorithm>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ecall/gazetteer.hpp"
#include "ecall/text.hpp"
#include "ecall/token.hpp"

namespace ecall {

namespace detail {

/// Matches [currency][sign]digits[,ddd...][.digits][%].
inline bool is_number_like(std::string_view s) {
  for (std::string_view cur : {"$", "\xE2\x82\xAC", "\xC2\xA3"}) {
    if (s.starts_with(cur)) {
      s.remove_prefix(cur.size());
      break;
    }
  }
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) s.remove_prefix(1);
  if (!s.empty() && s.back() == '%') s.remove_suffix(1);
  const auto digit = [](char c) { return c >= '0' && c <= '9'; };
  std::size_t i = 0, lead = 0;
  while (i < s.size() && digit(s[i])) ++i, ++lead;
  if (lead == 0) return false;
  bool grouped = false;
  while (i < s.size() && s[i] == ',') {
    if (lead > 3 && !grouped) return false;
    if (i + 4 > s.size() || !digit(s[i + 1]) || !digit(s[i + 2]) || !digit(s[i + 3])) return false;
    i += 4;
    grouped = true;
  }
  if (i < s.size() && s[i] == '.') {
    ++i;
    const std::size_t frac = i;
    while (i < s.size() && digit(s[i])) ++i;
    if (i == frac) return false;
  }
  return i == s.size();
}

inline bool gazetteer_number_word(const std::string& lower) {
  return gazetteer::number_words().contains(lower) && lower != "one";
}

inline bool is_period_code(std::string_view s) {
  // Q1..Q4, 1Q..4Q, H1/H2, FY17 / FY2017
  const auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (s.size() == 2) {
    const char a = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    const char b = static_cast<char>(std::toupper(static_cast<unsigned char>(s[1])));
    if (a == 'Q' && b >= '1' && b <= '4') return true;
    if (b == 'Q' && a >= '1' && a <= '4') return true;
    if (a == 'H' && (b == '1' || b == '2')) return true;
  }
  if ((s.size() == 4 || s.size() == 6) && s.starts_with("FY"))
    return std::all_of(s.begin() + 2, s.end(), digit);
  return false;
}

inline bool starts_upper(std::string_view s) {
  return !s.empty() && std::isupper(static_cast<unsigned char>(s.front()));
}

inline bool all_caps_acronym(std::string_view s) {
  if (s.size() < 2 || s.size() > 6) return false;
  int letters = 0;
  for (char c : s) {
    if (std::isupper(static_cast<unsigned char>(c))) ++letters;
    else if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '&' || c == '.')) return false;
  }
  return letters >= 2;
}

inline bool is_punct_surface(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (std::isalnum(static_cast<unsigned char>(c))) return false;
  return true;
}

inline const std::unordered_map<std::string, std::string>& closed_class() {
  static const std::unordered_map<std::string, std::string> m = [] {
    std::unordered_map<std::string, std::string> t;
    auto add = [&t](std::initializer_list<const char*> words, const char* tag) {
      for (auto w : words) t.emplace(w, tag);
    };
    add({"the", "a", "an", "this", "that", "these", "those", "each", "every", "some", "any", "no",
         "another", "either", "neither", "all", "both"},
        "DT");
    add({"i", "you", "he", "she", "it", "we", "they", "me", "him", "us", "them", "myself", "yourself",
         "ourselves", "themselves", "itself", "something", "anything", "nothing", "everything", "someone",
         "anyone", "everyone", "one"},
        "PRP");
    add({"my", "your", "his", "her", "its", "our", "their"}, "PRP$");
    add({"what", "who", "whom"}, "WP");
    add({"which", "whatever"}, "WDT");
    add({"how", "when", "where", "why"}, "WRB");
    add({"of", "in", "on", "at", "for", "with", "by", "from", "about", "into", "over", "after",
         "before", "between", "through", "during", "under", "without", "within", "via", "than", "as",
         "if", "because", "since", "while", "although", "though", "whether", "per", "toward",
         "towards", "across", "against", "among", "upon", "around", "versus", "vs.", "despite",
         "throughout", "beyond", "unlike", "till", "until", "whereas", "onto", "amid"},
        "IN");
    add({"to"}, "TO");
    add({"and", "or", "but", "nor", "plus"}, "CC");
    add({"will", "would", "can", "could", "may", "might", "shall", "should", "must", "'ll", "wo", "ca",
         "'d", "ought"},
        "MD");
    add({"not", "n't", "very", "also", "just", "really", "now", "then", "still", "already", "only",
         "even", "too", "quite", "maybe", "perhaps", "again", "here", "ago", "so", "well", "almost",
         "ever", "never", "always", "often", "soon", "later", "yet", "rather", "somewhat", "instead",
         "together", "away", "back", "forward", "ahead", "further", "anyway", "therefore", "thus",
         "however", "hence", "else", "once", "twice", "overall", "up", "down", "out", "off", "sort",
         "kind"},
        "RB");
    add({"more", "less", "better", "worse", "higher", "lower", "greater", "larger", "smaller",
         "bigger", "stronger", "weaker", "faster", "slower"},
        "JJR");
    add({"most", "least", "best", "worst", "highest", "lowest", "largest", "biggest", "strongest"}, "JJS");
    add({"yes", "yeah", "oh", "okay", "ok", "hi", "hello", "wow", "uh", "um", "thanks"}, "UH");
    add({"there"}, "EX");
    add({"is", "'s", "has", "does"}, "VBZ");
    add({"am", "are", "'re", "'m", "'ve"}, "VBP");
    add({"was", "were", "had", "did"}, "VBD");
    add({"be", "do", "have"}, "VB");
    add({"been", "done"}, "VBN");
    add({"being", "having", "doing"}, "VBG");
    return t;
  }();
  return m;
}

inline const std::unordered_set<std::string>& be_forms() {
  static const std::unordered_set<std::string> s = {"be", "is", "am", "are", "was", "were", "been",
                                                    "being", "'s", "'re", "'m"};
  return s;
}

inline const std::unordered_set<std::string>& have_forms() {
  static const std::unordered_set<std::string> s = {"have", "has", "had", "having", "'ve", "'d"};
  return s;
}

inline const std::unordered_set<std::string>& do_forms() {
  static const std::unordered_set<std::string> s = {"do", "does", "did"};
  return s;
}

/// Irregular past tense (VBD) and participle (VBN) forms.
inline const std::unordered_map<std::string, std::pair<std::string, std::string>>& irregular_verbs() {
  // surface -> (tag when unambiguous, base)
  static const std::unordered_map<std::string, std::pair<std::string, std::string>> m = {
      {"grew", {"VBD", "grow"}},     {"grown", {"VBN", "grow"}},   {"saw", {"VBD", "see"}},
      {"seen", {"VBN", "see"}},      {"went", {"VBD", "go"}},      {"gone", {"VBN", "go"}},
      {"came", {"VBD", "come"}},     {"took", {"VBD", "take"}},    {"taken", {"VBN", "take"}},
      {"gave", {"VBD", "give"}},     {"given", {"VBN", "give"}},   {"began", {"VBD", "begin"}},
      {"begun", {"VBN", "begin"}},   {"wrote", {"VBD", "write"}},  {"written", {"VBN", "write"}},
      {"knew", {"VBD", "know"}},     {"known", {"VBN", "know"}},   {"rose", {"VBD", "rise"}},
      {"risen", {"VBN", "rise"}},    {"fell", {"VBD", "fall"}},    {"fallen", {"VBN", "fall"}},
      {"drove", {"VBD", "drive"}},   {"driven", {"VBN", "drive"}}, {"chose", {"VBD", "choose"}},
      {"chosen", {"VBN", "choose"}}, {"spoke", {"VBD", "speak"}},  {"spoken", {"VBN", "speak"}},
      {"showed", {"VBD", "show"}},   {"shown", {"VBN", "show"}},   {"ran", {"VBD", "run"}},
      {"won", {"VBD", "win"}},       {"broke", {"VBD", "break"}},  {"broken", {"VBN", "break"}},
      {"made", {"VBD*", "make"}},    {"said", {"VBD*", "say"}},    {"found", {"VBD*", "find"}},
      {"held", {"VBD*", "hold"}},    {"got", {"VBD*", "get"}},     {"gotten", {"VBN", "get"}},
      {"told", {"VBD*", "tell"}},    {"thought", {"VBD*", "think"}}, {"felt", {"VBD*", "feel"}},
      {"kept", {"VBD*", "keep"}},    {"left", {"VBD*", "leave"}},  {"meant", {"VBD*", "mean"}},
      {"paid", {"VBD*", "pay"}},     {"sold", {"VBD*", "sell"}},   {"spent", {"VBD*", "spend"}},
      {"bought", {"VBD*", "buy"}},   {"brought", {"VBD*", "bring"}}, {"built", {"VBD*", "build"}},
      {"led", {"VBD*", "lead"}},     {"lost", {"VBD*", "lose"}},   {"met", {"VBD*", "meet"}},
      {"sent", {"VBD*", "send"}},    {"stood", {"VBD*", "stand"}}, {"understood", {"VBD*", "understand"}},
      {"heard", {"VBD*", "hear"}},   {"caught", {"VBD*", "catch"}}, {"taught", {"VBD*", "teach"}},
  };
  return m;
}

/// Base forms of frequent verbs. A form ending in -s whose stem is listed is
/// tagged VBZ when it follows a nominal.
inline const std::unordered_set<std::string>& base_verbs() {
  static const std::unordered_set<std::string> s = {
      "grow", "increase", "decrease", "see", "expect", "think", "talk", "update", "continue", "drive",
      "bring", "help", "give", "make", "take", "get", "go", "come", "say", "know", "want", "look",
      "need", "use", "work", "provide", "improve", "deliver", "invest", "launch", "reach", "follow",
      "move", "focus", "believe", "guess", "mean", "vary", "happen", "build", "sell", "buy", "hold",
      "pay", "spend", "ask", "tell", "feel", "keep", "leave", "let", "put", "run", "seem", "show",
      "try", "call", "find", "begin", "start", "plan", "remain", "become", "change", "expand",
      "reduce", "gain", "lose", "win", "accelerate", "slow", "decline", "rise", "fall", "impact",
      "affect", "add", "offer", "create", "manage", "understand", "explain", "share", "comment",
      "elaborate", "clarify", "quantify", "discuss", "anticipate", "estimate", "deploy", "achieve",
      "generate", "compete", "return", "trend", "monetize", "outperform", "recover", "benefit",
      "operate", "execute", "target", "hit", "miss", "beat", "exceed", "lead", "mention", "announce",
      "report", "include", "reflect", "drop", "compare", "contribute", "close", "open", "stay",
      "depend", "appear", "suggest", "assume", "tend", "break", "speak", "write", "choose", "lower",
      "raise", "cut", "set", "sign", "ship", "order", "shift", "end", "wonder", "hope", "like",
      "love", "thank", "appreciate", "note", "characterize", "frame", "walk", "give", "rebound",
      "resolve", "settle", "spend", "earn", "fund", "sustain", "moderate", "normalize", "turn"};
  return s;
}

inline const std::unordered_set<std::string>& adjectives() {
  static const std::unordered_set<std::string> s = {
      "good", "nice", "great", "strong", "weak", "big", "small", "high", "low", "new", "old", "other",
      "same", "last", "next", "first", "total", "recent", "current", "much", "many", "few", "several",
      "long", "short", "little", "large", "full", "whole", "key", "able", "clear", "main", "top",
      "early", "late", "real", "sure", "solid", "healthy", "robust", "positive", "negative", "gross",
      "net", "organic", "overall", "prior", "previous", "specific", "certain", "broad", "core",
      "different", "similar", "flat", "modest", "significant", "incremental", "underlying", "right",
      "wrong", "bad", "best", "fine", "free", "open", "fair", "hard", "easy", "double", "mobile",
      "digital", "global", "domestic", "international", "medical", "financial", "operating",
      "terrible", "delicate", "slight", "excellent", "impressive", "outstanding", "remarkable",
      "tough", "difficult", "challenging", "favorable", "unfavorable", "stable", "steady",
      "sequential", "annual", "quarterly", "upcoming", "likely", "possible", "potential", "profound",
      "unique", "compelling", "conscious", "responsive", "traditional", "qualitative", "quantitative",
      "fiscal", "such", "own", "only", "various", "additional", "general"};
  return s;
}

inline const std::unordered_set<std::string>& ing_nouns() {
  static const std::unordered_set<std::string> s = {
      "morning", "evening", "thing",    "something", "nothing", "anything", "everything", "spring",
      "king",    "ring",    "string",   "ceiling",   "building", "pricing", "funding",  "financing",
      "marketing", "earnings", "offering", "spending", "meeting", "beginning", "opening", "during",
      "housing", "clothing", "outstanding", "ongoing", "setting", "timing", "training", "backlog"};
  return s;
}

inline const std::unordered_set<std::string>& subordinators() {
  static const std::unordered_set<std::string> s = {"if", "because", "since", "while", "although",
                                                    "though", "whether", "whereas", "until", "till",
                                                    "unless", "once"};
  return s;
}

inline const std::unordered_set<std::string>& abbreviations() {
  static const std::unordered_set<std::string> s = {
      "inc.", "corp.", "co.", "ltd.", "mr.", "mrs.", "ms.", "dr.", "jr.", "sr.", "vs.", "etc.",
      "e.g.", "i.e.", "u.s.", "u.k.", "jan.", "feb.", "aug.", "sept.", "sep.", "oct.", "nov.",
      "dec.", "a.m.", "p.m.", "st.", "no."};
  return s;
}

inline std::string normalize_quotes(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    // U+2018/U+2019 (E2 80 98/99) -> ', U+201C/U+201D (E2 80 9C/9D) -> ",
    // U+2013/U+2014 dashes -> "--"
    if (c == 0xE2 && i + 2 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0x80) {
      const unsigned char d = static_cast<unsigned char>(text[i + 2]);
      if (d == 0x98 || d == 0x99) { out += '\''; i += 2; continue; }
      if (d == 0x9C || d == 0x9D) { out += '"'; i += 2; continue; }
      if (d == 0x93 || d == 0x94) { out += " -- "; i += 2; continue; }
    }
    out += (c == '_') ? ' ' : static_cast<char>(c);
  }
  return out;
}

}  // namespace detail

namespace detail {
/// "U.S.", "A.B.C." style initialisms.
inline bool is_initials(std::string_view s) {
  if (s.size() < 4 || s.size() % 2 != 0) return false;
  for (std::size_t i = 0; i < s.size(); i += 2)
    if (!std::isalpha(static_cast<unsigned char>(s[i])) || s[i + 1] != '.') return false;
  return true;
}
}  // namespace detail

/// PTB-style tokenization: punctuation split from words, contractions split
/// into clitics ("won't" -> "wo" "n't", "we'll" -> "we" "'ll"), numbers with
/// separators, currency prefixes and percent signs kept whole. Underscores
/// are treated as whitespace so that lexicalized entity surfaces stay
/// unambiguous.
inline std::vector<std::string> tokenize(std::string_view raw) {
  const std::string text = detail::normalize_quotes(raw);
  std::vector<std::string> out;
  for (std::string chunk : split_whitespace(text)) {
    std::vector<std::string> trailing;
    // leading punctuation
    while (!chunk.empty() && std::string_view("\"'([{`").find(chunk.front()) != std::string_view::npos &&
           chunk.size() > 1 && !(chunk.front() == '\'' && std::isalpha(static_cast<unsigned char>(chunk[1])) &&
                                 chunk.size() <= 3)) {
      out.emplace_back(1, chunk.front());
      chunk.erase(0, 1);
    }
    // trailing punctuation, peeled right to left
    for (;;) {
      if (chunk.size() <= 1) break;
      if (chunk.size() >= 3 && chunk.ends_with("...")) {
        trailing.insert(trailing.begin(), "...");
        chunk.resize(chunk.size() - 3);
        continue;
      }
      const char c = chunk.back();
      if (std::string_view(",;:!?\")]}'").find(c) != std::string_view::npos) {
        if (c == '\'' && chunk.size() > 2 && (chunk[chunk.size() - 2] == 's' || chunk[chunk.size() - 2] == 'S')) {
          // plural possessive: investors'
          trailing.insert(trailing.begin(), "'");
          chunk.pop_back();
          continue;
        }
        trailing.insert(trailing.begin(), std::string(1, c));
        chunk.pop_back();
        continue;
      }
      if (c == '.') {
        const std::string lower = to_lower(chunk);
        if (detail::abbreviations().contains(lower)) break;
        if (detail::is_initials(chunk)) break;
        trailing.insert(trailing.begin(), ".");
        chunk.pop_back();
        continue;
      }
      break;
    }
    if (chunk == "--" || chunk == "-" || chunk == "...") {
      out.push_back(chunk);
    } else if (!chunk.empty()) {
      // clitics
      const std::string lower = to_lower(chunk);
      std::optional<std::size_t> cut;
      if (lower == "cannot") {
        cut = 3;
      } else if (lower.size() > 3 && lower.ends_with("n't")) {
        cut = lower.size() - 3;
      } else {
        for (std::string_view clitic : {"'ll", "'re", "'ve", "'s", "'d", "'m"}) {
          if (lower.size() > clitic.size() && lower.ends_with(clitic)) {
            cut = lower.size() - clitic.size();
            break;
          }
        }
      }
      if (cut && *cut > 0) {
        out.push_back(chunk.substr(0, *cut));
        out.push_back(chunk.substr(*cut));
      } else {
        out.push_back(chunk);
      }
    }
    for (auto& t : trailing) out.push_back(std::move(t));
  }
  return out;
}

/// Maps a PTB tag to its UD coarse tag. Context-dependent cases (auxiliaries,
/// subordinating conjunctions, negation particles) are resolved by the caller.
inline std::string ptb_to_ud(std::string_view ptb) {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      {"CC", "CCONJ"}, {"CD", "NUM"},   {"DT", "DET"},   {"EX", "PRON"},   {"FW", "X"},
      {"IN", "ADP"},   {"JJ", "ADJ"},   {"JJR", "ADJ"},  {"JJS", "ADJ"},   {"LS", "X"},
      {"MD", "AUX"},   {"NN", "NOUN"},  {"NNS", "NOUN"}, {"NNP", "PROPN"}, {"NNPS", "PROPN"},
      {"PDT", "DET"},  {"POS", "PART"}, {"PRP", "PRON"}, {"PRP$", "PRON"}, {"RB", "ADV"},
      {"RBR", "ADV"},  {"RBS", "ADV"},  {"RP", "ADP"},   {"SYM", "SYM"},   {"TO", "PART"},
      {"UH", "INTJ"},  {"VB", "VERB"},  {"VBD", "VERB"}, {"VBG", "VERB"},  {"VBN", "VERB"},
      {"VBP", "VERB"}, {"VBZ", "VERB"}, {"WDT", "DET"},  {"WP", "PRON"},   {"WP$", "PRON"},
      {"WRB", "ADV"},  {"$", "SYM"},    {"#", "SYM"},    {"``", "PUNCT"},  {"''", "PUNCT"},
      {"-LRB-", "PUNCT"}, {"-RRB-", "PUNCT"}, {",", "PUNCT"}, {".", "PUNCT"}, {":", "PUNCT"}};
  const auto it = table.find(ptb);
  return it == table.end() ? "X" : std::string(it->second);
}

class RuleAnnotator final : public Annotator {
 public:
  Annotation annotate(std::string_view text) const override {
    Annotation ann;
    const auto words = tokenize(text);
    ann.tokens.reserve(words.size());
    for (const auto& w : words) ann.tokens.push_back({w, "", "", std::nullopt, std::nullopt});

    ann.sentences = split_sentences(ann.tokens);
    for (const auto& sent : ann.sentences) tag_sentence(ann.tokens, sent);
    int next_span = 0;
    for (const auto& sent : ann.sentences) find_entities(ann.tokens, sent, next_span);
    return ann;
  }

 private:
  static std::vector<SentenceSpan> split_sentences(const std::vector<AnnotatedToken>& tokens) {
    std::vector<SentenceSpan> out;
    std::size_t begin = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const auto& s = tokens[i].surface;
      if (s == "." || s == "?" || s == "!" || s == "...") {
        // absorb closing quotes/brackets into the sentence
        std::size_t end = i + 1;
        while (end < tokens.size() && (tokens[end].surface == "\"" || tokens[end].surface == ")" ||
                                       tokens[end].surface == "'"))
          ++end;
        out.push_back({begin, end});
        begin = end;
        i = end - 1;
      }
    }
    if (begin < tokens.size()) out.push_back({begin, tokens.size()});
    return out;
  }

  static std::string punct_tag(std::string_view s) {
    if (s == "." || s == "?" || s == "!" || s == "...") return ".";
    if (s == ",") return ",";
    if (s == ":" || s == ";" || s == "--" || s == "-") return ":";
    if (s == "(" || s == "[" || s == "{") return "-LRB-";
    if (s == ")" || s == "]" || s == "}") return "-RRB-";
    if (s == "\"" || s == "``") return "``";
    if (s == "'" || s == "''") return "''";
    if (s == "$") return "$";
    if (s == "#") return "#";
    return "SYM";
  }

  static bool is_nominal(std::string_view ptb) {
    return ptb == "NN" || ptb == "NNS" || ptb == "NNP" || ptb == "NNPS" || ptb == "PRP" || ptb == "CD" ||
           ptb == "EX" || ptb == "WP" || ptb == "WDT" || ptb == "DT";
  }

  /// Lexicon lookup first, then context, then suffix heuristics.
  static void tag_sentence(std::vector<AnnotatedToken>& toks, SentenceSpan sent) {
    const auto& closed = detail::closed_class();
    const auto& irregular = detail::irregular_verbs();
    const auto& verbs = detail::base_verbs();
    const auto& adjs = detail::adjectives();

    std::size_t first_word = sent.begin;
    while (first_word < sent.end && detail::is_punct_surface(toks[first_word].surface)) ++first_word;

    auto prev_tag = [&](std::size_t i, std::size_t back) -> std::string {
      std::size_t seen = 0;
      for (std::size_t j = i; j-- > sent.begin;) {
        if (toks[j].ptb == "," || toks[j].ptb == ":" || toks[j].ptb == "``" || toks[j].ptb == "''") continue;
        if (++seen == back) return toks[j].ptb;
      }
      return "";
    };
    auto prev_word = [&](std::size_t i, std::size_t back) -> std::string {
      std::size_t seen = 0;
      for (std::size_t j = i; j-- > sent.begin;) {
        if (detail::is_punct_surface(toks[j].surface)) continue;
        if (++seen == back) return to_lower(toks[j].surface);
      }
      return "";
    };
    auto after_have_or_be = [&](std::size_t i) {
      for (std::size_t back = 1; back <= 3; ++back) {
        const auto w = prev_word(i, back);
        if (w.empty()) break;
        if (detail::be_forms().contains(w) || detail::have_forms().contains(w)) return true;
        const auto t = prev_tag(i, back);
        if (t != "RB" && t != "RBR") break;
      }
      return false;
    };

    for (std::size_t i = sent.begin; i < sent.end; ++i) {
      auto& tok = toks[i];
      const std::string& s = tok.surface;
      const std::string lower = to_lower(s);
      const std::string p1 = prev_tag(i, 1);
      const std::string w1 = prev_word(i, 1);
      std::string tag;

      if (detail::is_punct_surface(s)) {
        tag = punct_tag(s);
      } else if (detail::is_number_like(s)) {
        tag = "CD";
      } else if (lower == "'s") {
        tag = (p1 == "PRP" || p1 == "EX" || p1 == "WP" || p1 == "WDT" || p1 == "DT" || w1 == "that" ||
               w1 == "it" || w1 == "there" || w1 == "here" || w1 == "what")
                  ? "VBZ"
                  : "POS";
      } else if (lower == "'d") {
        tag = "MD";
      } else if (s == "May" && i != first_word) {
        tag = "NNP";  // month name mid-sentence
      } else if (s == "US" || s == "U.S.") {
        tag = "NNP";
      } else if (lower == "that" && (p1.starts_with("NN") || p1.starts_with("VB"))) {
        tag = (p1.starts_with("NN")) ? "WDT" : "IN";
      } else if (lower == "like" && !p1.empty() && p1 != "PRP" && p1 != "MD" && p1 != "TO") {
        tag = "IN";
      } else if (lower == "kind" || lower == "sort") {
        tag = (i + 1 < sent.end && to_lower(toks[i + 1].surface) == "of") ? "RB" : "NN";
      } else if (lower == "up" || lower == "out" || lower == "down" || lower == "off") {
        tag = p1.starts_with("VB") ? "RP" : "RB";
      } else if (closed.contains(lower) && !(lower == "one" && (p1 == "DT" || p1 == "JJ" || p1 == "CD"))) {
        tag = closed.at(lower);
        if (lower == "have" || lower == "do" || lower == "be") {
          if (p1 == "MD" || p1 == "TO") tag = "VB";
          else if (lower != "be" && (p1 == "PRP" || p1.starts_with("NN") || p1 == "WP")) tag = "VBP";
        }
        if (lower == "that" && (p1.empty())) tag = "DT";
        if (lower == "there") {
          const std::string next = i + 1 < sent.end ? to_lower(toks[i + 1].surface) : std::string();
          const bool existential = detail::be_forms().contains(next) ||
                                   (closed.contains(next) && closed.at(next) == "MD");
          if (!existential) tag = "RB";
        }
      } else if (detail::gazetteer_number_word(lower)) {
        tag = "CD";
      } else if (irregular.contains(lower)) {
        const auto& [itag, base] = irregular.at(lower);
        if (itag == "VBD*") tag = after_have_or_be(i) ? "VBN" : "VBD";
        else tag = itag;
        if (tag == "VBD" && after_have_or_be(i)) tag = "VBN";
      } else if (detail::all_caps_acronym(s) && s != "I") {
        tag = "NNP";
      } else if (detail::starts_upper(s) && i != first_word && s != "I") {
        tag = "NNP";
      } else if (i == first_word && detail::starts_upper(s) && is_known_word(lower) == false &&
                 (gazetteer::first_names().contains(lower) || gazetteer::places().contains(lower) ||
                  gazetteer::nationalities().contains(lower))) {
        tag = "NNP";
      } else if (gazetteer::products().contains(s)) {
        tag = "NNP";
      } else if (adjs.contains(lower)) {
        tag = "JJ";
      } else if (verbs.contains(lower)) {
        if (p1 == "MD" || p1 == "TO") tag = "VB";
        else if (w1 == "do" || w1 == "does" || w1 == "did" || w1 == "n't" || w1 == "not") tag = "VB";
        else if (p1 == "PRP" || p1 == "NNS" || p1 == "WDT" || p1 == "WP" || p1 == "RB") tag = "VBP";
        else if (p1 == "DT" || p1.starts_with("JJ") || p1 == "PRP$" || p1 == "IN" || p1 == "POS" || p1 == "CD")
          tag = "NN";
        else if (p1.empty()) tag = "VB";  // imperative / sentence-initial
        else tag = "NN";
      } else if (lower.size() > 4 && lower.ends_with("ing") && !detail::ing_nouns().contains(lower)) {
        tag = (p1 == "DT" || p1 == "PRP$" || p1 == "JJ") ? "NN" : "VBG";
      } else if (lower.size() > 3 && lower.ends_with("ed")) {
        if (after_have_or_be(i)) tag = "VBN";
        else if (p1 == "DT" || p1 == "PRP$" || p1.starts_with("JJ")) tag = "JJ";
        else tag = "VBD";
      } else if (lower.size() > 3 && lower.ends_with("s") && !lower.ends_with("ss") &&
                 verbs.contains(lower.substr(0, lower.size() - 1)) &&
                 (p1.starts_with("NN") || p1 == "PRP" || p1 == "WDT" || p1 == "WP" || p1 == "RB")) {
        tag = "VBZ";
      } else if (lower.size() > 4 && lower.ends_with("es") &&
                 verbs.contains(lower.substr(0, lower.size() - 2)) &&
                 (p1.starts_with("NN") || p1 == "PRP" || p1 == "WDT")) {
        tag = "VBZ";
      } else if (lower.size() > 3 && lower.ends_with("ly")) {
        tag = "RB";
      } else if (has_adjective_suffix(lower)) {
        tag = "JJ";
      } else if (lower.size() > 2 && lower.ends_with("s") && !lower.ends_with("ss") && !lower.ends_with("us") &&
                 !lower.ends_with("is")) {
        tag = "NNS";
      } else {
        tag = "NN";
      }
      tok.ptb = tag;
    }

    // UD mapping with auxiliary and particle resolution.
    for (std::size_t i = sent.begin; i < sent.end; ++i) {
      auto& tok = toks[i];
      const std::string lower = to_lower(tok.surface);
      std::string ud = ptb_to_ud(tok.ptb);
      if (is_verb_ptb(tok.ptb)) {
        if (detail::be_forms().contains(lower)) {
          ud = "AUX";
        } else if (detail::have_forms().contains(lower) || detail::do_forms().contains(lower)) {
          if (next_is_verb(toks, i, sent.end)) ud = "AUX";
        }
      }
      if ((lower == "not" || lower == "n't") && tok.ptb == "RB") ud = "PART";
      if (tok.ptb == "IN" && detail::subordinators().contains(lower)) ud = "SCONJ";
      if (tok.ptb == "IN" && lower == "that") ud = "SCONJ";
      tok.ud = ud;
    }
  }

  static bool next_is_verb(const std::vector<AnnotatedToken>& toks, std::size_t i, std::size_t end) {
    for (std::size_t j = i + 1; j < end && j <= i + 3; ++j) {
      const auto& t = toks[j].ptb;
      if (is_verb_ptb(t)) return true;
      if (t == "RB" || t == "PRP") continue;  // "have n't seen", "do you think"
      return false;
    }
    return false;
  }

  static bool is_known_word(const std::string& lower) {
    return detail::closed_class().contains(lower) || detail::adjectives().contains(lower) ||
           detail::base_verbs().contains(lower) || detail::irregular_verbs().contains(lower);
  }

  static bool has_adjective_suffix(std::string_view w) {
    if (w.size() < 6) return false;
    for (std::string_view suf : {"ful", "ous", "ive", "able", "ible", "ical", "less", "ary", "ish"})
      if (w.ends_with(suf)) return true;
    return false;
  }

  // ---- entity rules --------------------------------------------------------

  static void mark(std::vector<AnnotatedToken>& toks, std::size_t b, std::size_t e, std::string_view label,
                   int& next_span) {
    for (std::size_t k = b; k < e; ++k) {
      toks[k].entity = std::string(label);
      toks[k].span_id = next_span;
    }
    ++next_span;
  }

  static bool is_numeric_token(const AnnotatedToken& t) {
    return t.ptb == "CD" && detail::is_number_like(t.surface);
  }

  static std::size_t match_date(const std::vector<AnnotatedToken>& toks, std::size_t i, std::size_t end) {
    const std::string w = to_lower(toks[i].surface);
    auto lower_at = [&](std::size_t k) { return k < end ? to_lower(toks[k].surface) : std::string(); };
    auto is_year = [&](std::size_t k) {
      if (k >= end) return false;
      const auto& s = toks[k].surface;
      return s.size() == 4 && std::all_of(s.begin(), s.end(), ::isdigit) && (s[0] == '1' || s[0] == '2');
    };
    // Month [day][,][year]
    if (gazetteer::months().contains(w) && (detail::starts_upper(toks[i].surface)) &&
        !(w == "may" && toks[i].ptb == "MD")) {
      std::size_t j = i + 1;
      if (j < end && toks[j].ptb == "CD" && toks[j].surface.size() <= 2) ++j;
      if (j < end && toks[j].surface == "," && is_year(j + 1)) j += 2;
      else if (is_year(j)) ++j;
      return j - i;
    }
    if (gazetteer::weekdays().contains(w) && detail::starts_upper(toks[i].surface)) return 1;
    if (w == "today" || w == "yesterday" || w == "tomorrow") return 1;
    if (detail::is_period_code(toks[i].surface)) {
      return is_year(i + 1) ? 2 : 1;
    }
    if ((w == "fiscal" || w == "calendar") && is_year(i + 1)) return 2;
    if (is_year(i) && i + 1 >= end) return 1;
    if (is_year(i) && !gazetteer::scale_words().contains(lower_at(i + 1)) &&
        !gazetteer::quantity_units().contains(lower_at(i + 1)))
      return 1;
    // number + period noun: "two years", "12 months"
    if ((toks[i].ptb == "CD") && i + 1 < end && gazetteer::period_nouns().contains(lower_at(i + 1)) &&
        lower_at(i + 1) != "half") {
      std::size_t j = i + 2;
      if (lower_at(j) == "ago") ++j;
      return j - i;
    }
    // modifier+ period noun: "the first quarter", "last year"
    std::size_t j = i;
    while (j < end && j < i + 4 && gazetteer::period_modifiers().contains(lower_at(j))) ++j;
    if (j > i && j < end && gazetteer::period_nouns().contains(lower_at(j))) {
      // a lone determiner needs the head to be a calendar unit
      const std::string head = lower_at(j);
      if (j == i + 1 && (w == "the" || w == "that") &&
          !(head == "quarter" || head == "year" || head == "month" || head == "week"))
        return 0;
      std::size_t k = j + 1;
      if (is_year(k)) ++k;
      return k - i;
    }
    return 0;
  }

  static std::size_t proper_run(const std::vector<AnnotatedToken>& toks, std::size_t i, std::size_t end) {
    std::size_t j = i;
    while (j < end) {
      if (toks[j].ptb == "NNP" || toks[j].ptb == "NNPS") {
        ++j;
        continue;
      }
      // "Bank of America", "Procter & Gamble"
      if ((toks[j].surface == "of" || toks[j].surface == "&") && j > i && j + 1 < end &&
          (toks[j + 1].ptb == "NNP" || toks[j + 1].ptb == "NNPS")) {
        j += 2;
        continue;
      }
      break;
    }
    return j - i;
  }

  static std::string classify_proper(const std::vector<AnnotatedToken>& toks, std::size_t b, std::size_t e) {
    std::vector<std::string> lowered;
    for (std::size_t k = b; k < e; ++k) lowered.push_back(to_lower(toks[k].surface));
    const std::string joined = join(lowered, " ");
    if (gazetteer::events().contains(joined) || gazetteer::events().contains(lowered.front())) return "EVENT";
    if (const auto it = gazetteer::places().find(joined); it != gazetteer::places().end())
      return std::string(it->second);
    if (e - b == 1 && gazetteer::nationalities().contains(joined)) return "NORP";
    if (gazetteer::person_titles().contains(lowered.front())) return "PERSON";
    if (gazetteer::org_suffixes().contains(lowered.back())) return "ORGANIZATION";
    if (gazetteer::facility_heads().contains(lowered.back())) return "FACILITY";
    if (gazetteer::products().contains(toks[b].surface)) return "PRODUCT";
    if (gazetteer::first_names().contains(lowered.front())) return "PERSON";
    return "ORGANIZATION";
  }

  static void find_entities(std::vector<AnnotatedToken>& toks, SentenceSpan sent, int& next_span) {
    const std::size_t end = sent.end;
    auto lower_at = [&](std::size_t k) { return k < end ? to_lower(toks[k].surface) : std::string(); };
    std::size_t i = sent.begin;
    while (i < end) {
      const auto& tok = toks[i];
      const std::string w = to_lower(tok.surface);

      // MONEY: $4.6 [million]; 40 dollars
      if (tok.ptb == "CD" && !tok.surface.empty() &&
          (tok.surface[0] == '$' || tok.surface.starts_with("€") || tok.surface.starts_with("£"))) {
        std::size_t j = i + 1;
        if (gazetteer::scale_words().contains(lower_at(j))) ++j;
        mark(toks, i, j, "MONEY", next_span);
        i = j;
        continue;
      }
      if (is_numeric_token(tok) || (tok.ptb == "CD" && gazetteer::number_words().contains(w))) {
        std::size_t j = i + 1;
        if (gazetteer::scale_words().contains(lower_at(j))) ++j;
        const std::string nxt = lower_at(j);
        if (tok.surface.ends_with("%")) {
          mark(toks, i, i + 1, "PERCENT", next_span);
          i += 1;
          continue;
        }
        if (nxt == "percent" || nxt == "%" || nxt == "basis" || nxt == "bps") {
          std::size_t k = j + 1;
          if (nxt == "basis" && lower_at(k) == "points") ++k;
          if (nxt == "percent" && lower_at(k) == "points") ++k;
          mark(toks, i, k, "PERCENT", next_span);
          i = k;
          continue;
        }
        if (nxt == "dollars" || nxt == "cents" || nxt == "bucks") {
          mark(toks, i, j + 1, "MONEY", next_span);
          i = j + 1;
          continue;
        }
        if (gazetteer::quantity_units().contains(nxt)) {
          mark(toks, i, j + 1, "QUANTITY", next_span);
          i = j + 1;
          continue;
        }
      }
      if (const std::size_t len = match_date(toks, i, end); len > 0) {
        mark(toks, i, i + len, "DATE", next_span);
        i += len;
        continue;
      }
      if (w == "this" && (lower_at(i + 1) == "morning" || lower_at(i + 1) == "afternoon" ||
                          lower_at(i + 1) == "evening")) {
        mark(toks, i, i + 2, "TIME", next_span);
        i += 2;
        continue;
      }
      if (gazetteer::ordinal_words().contains(w) && (tok.ptb == "JJ" || tok.ptb == "RB" || tok.ptb == "NN")) {
        mark(toks, i, i + 1, "ORDINAL", next_span);
        ++i;
        continue;
      }
      if (tok.ptb == "CD") {
        std::size_t j = i + 1;
        while (j < end && (gazetteer::scale_words().contains(lower_at(j)) ||
                           (toks[j].ptb == "CD" && gazetteer::number_words().contains(lower_at(j)))))
          ++j;
        mark(toks, i, j, "CARDINAL", next_span);
        i = j;
        continue;
      }
      if (tok.ptb == "NNP" || tok.ptb == "NNPS") {
        std::size_t len = proper_run(toks, i, end);
        // a title word starts the run: "Mr. Smith"
        mark(toks, i, i + len, classify_proper(toks, i, i + len), next_span);
        i += len;
        continue;
      }
      if (gazetteer::person_titles().contains(w) && i + 1 < end && toks[i + 1].ptb == "NNP") {
        const std::size_t len = 1 + proper_run(toks, i + 1, end);
        mark(toks, i, i + len, "PERSON", next_span);
        i += len;
        continue;
      }
      ++i;
    }
  }
};

}  // namespace ecall
