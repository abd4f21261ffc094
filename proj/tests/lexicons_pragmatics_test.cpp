#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "ecall/annotate.hpp"
#include "ecall/pragmatics.hpp"
#include "support.hpp"

using namespace ecall;
using namespace ecall::test;

namespace {

const LexiconSet& lexicons() {
  static const LexiconSet set = load_lexicon_set(ECALL_LEXICON_DIR);
  return set;
}

Lexicon load(const char* file, LexiconCategory cat) {
  return load_lexicon(std::filesystem::path(ECALL_LEXICON_DIR) / file, cat);
}

Turn annotated(std::string_view text, int order = 1) {
  const auto a = RuleAnnotator().annotate(text);
  Turn t = make_turn(a.tokens, SpeakerType::Analyst, Section::QA, order);
  t.sentences = a.sentences;
  return lexicalize_entities(t);
}

/// Greedy longest match evaluated by trying every length at every position
/// against the lexicon's sets directly.
std::size_t greedy_oracle(const std::vector<AnnotatedToken>& toks, const Lexicon& lex) {
  std::size_t longest = 1;
  for (const auto& p : lex.phrases) longest = std::max(longest, p.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < toks.size();) {
    std::size_t taken = 0;
    for (std::size_t len = std::min(longest, toks.size() - i); len >= 1 && !taken; --len) {
      Phrase p;
      bool clean = true;
      for (std::size_t k = i; k < i + len; ++k) {
        clean = clean && !toks[k].is_entity();
        p.push_back(to_lower(toks[k].surface));
      }
      if (clean && lex.contains(p)) taken = len;
    }
    hits += taken ? 1 : 0;
    i += taken ? taken : 1;
  }
  return hits;
}

/// Largest number of non-overlapping lexicon hits over all tilings.
std::size_t max_tiling(const std::vector<AnnotatedToken>& toks, const Lexicon& lex) {
  std::vector<std::size_t> best(toks.size() + 1, 0);
  for (std::size_t i = toks.size(); i-- > 0;) {
    best[i] = best[i + 1];
    Phrase p;
    for (std::size_t k = i; k < toks.size() && !toks[k].is_entity(); ++k) {
      p.push_back(to_lower(toks[k].surface));
      if (lex.contains(p)) best[i] = std::max(best[i], 1 + best[k + 1]);
    }
  }
  return best[0];
}

}  // namespace

// ---- lexicon files -------------------------------------------------------------

TEST(Lexicons, ShippedListSizes) {
  const auto weak = load(LexiconFiles::modal_weak, LexiconCategory::ModalWeak);
  EXPECT_EQ(weak.unigrams.size(), 27u);
  EXPECT_TRUE(weak.phrases.empty());
  const auto multi = load(LexiconFiles::hedge_multi, LexiconCategory::HedgeMulti);
  EXPECT_EQ(multi.phrases.size(), 39u);
  EXPECT_TRUE(multi.unigrams.empty());
}

TEST(Lexicons, EntriesAreLowercaseTrimmedAndDisjoint) {
  for (const char* f : {LexiconFiles::fin_positive, LexiconFiles::fin_negative, LexiconFiles::gen_positive,
                        LexiconFiles::gen_negative, LexiconFiles::hedge_uni, LexiconFiles::hedge_multi,
                        LexiconFiles::modal_weak, LexiconFiles::modal_moderate, LexiconFiles::modal_strong,
                        LexiconFiles::uncertain, LexiconFiles::constraining, LexiconFiles::litigious}) {
    const auto lex = load(f, LexiconCategory::PosFin);
    EXPECT_FALSE(lex.empty()) << f;
    for (const auto& u : lex.unigrams) {
      EXPECT_EQ(u, to_lower(trim(u))) << f;
      EXPECT_FALSE(u.empty());
    }
    for (const auto& p : lex.phrases) {
      EXPECT_GE(p.size(), 2u) << f;
      for (const auto& w : p) EXPECT_EQ(w, to_lower(trim(w))) << f;
    }
  }
}

TEST(Lexicons, ParseLowercasesPhrasesAndDropsDuplicates) {
  std::istringstream in("# comment\nKind Of\nkind of\n  Booming \n\nbooming\n");
  const auto lex = parse_lexicon(in, "t", LexiconCategory::HedgeMulti);
  EXPECT_TRUE(lex.phrases.contains(Phrase{"kind", "of"}));
  EXPECT_TRUE(lex.unigrams.contains("booming"));
  EXPECT_EQ(lex.size(), 2u);
  EXPECT_EQ(lex.duplicates_dropped, 2u);
}

TEST(Lexicons, MissingFileIsIoFailure) {
  try {
    load_lexicon("/nonexistent/ecall/lexicon.txt", LexiconCategory::PosFin);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::IoFailure);
  }
}

TEST(Lexicons, EmptyListIsReportedAsWarning) {
  const ScratchDir dir("lex");
  for (const auto& e : std::filesystem::directory_iterator(ECALL_LEXICON_DIR))
    std::filesystem::copy_file(e.path(), dir.path() / e.path().filename());
  write_file((dir.path() / LexiconFiles::litigious).string(), "# nothing here\n");
  LexiconLoadReport report;
  const auto set = load_lexicon_set(dir.path(), &report);
  EXPECT_TRUE(set.litigious.empty());
  ASSERT_EQ(report.warnings.size(), 1u);
  EXPECT_NE(report.warnings[0].find("EmptyLexicon"), std::string::npos);
}

// ---- sentiment merge ------------------------------------------------------------

TEST(MergeSentiment, Examples) {
  const auto fp = make_lexicon({"booming"}), fn = make_lexicon({"challenging", "question", "questions", "loss"});
  const auto gp = make_lexicon({"challenging", "lovely"}), gn = make_lexicon({"awful"});
  const auto m = merge_sentiment(fp, fn, gp, gn);
  EXPECT_TRUE(m.negative.contains({"challenging"}));
  EXPECT_FALSE(m.positive.contains({"challenging"}));
  EXPECT_TRUE(m.positive.contains({"lovely"}));
  EXPECT_TRUE(m.negative.contains({"awful"}));
  EXPECT_FALSE(m.negative.contains({"question"}));
  EXPECT_FALSE(m.negative.contains({"questions"}));
  EXPECT_EQ(m.override_log, std::vector<std::string>{"challenging -> negative"});
}

TEST(MergeSentiment, ConflictWithoutFinancialVerdictIsDropped) {
  const auto m = merge_sentiment(make_lexicon({}), make_lexicon({}), make_lexicon({"sharp"}), make_lexicon({"sharp"}));
  EXPECT_TRUE(m.positive.empty());
  EXPECT_TRUE(m.negative.empty());
  EXPECT_EQ(m.override_log, std::vector<std::string>{"sharp -> dropped"});
}

TEST(MergeSentiment, ShippedListsResolveTheFourteenOverrides) {
  const auto& m = lexicons().sentiment;
  for (const char* w : {"unpredictably", "conviction", "correction", "force", "seriousness", "toleration", "missteps",
                        "overcome", "condone", "tolerate", "exonerate", "upset", "challenging", "unpredictable"}) {
    EXPECT_TRUE(m.negative.contains({w})) << w;
    EXPECT_FALSE(m.positive.contains({w})) << w;
  }
  EXPECT_EQ(m.override_log.size(), 14u);
  for (const auto& u : m.positive.unigrams) EXPECT_FALSE(m.negative.unigrams.contains(u)) << u;
  for (const auto& p : m.positive.phrases) EXPECT_FALSE(m.negative.phrases.contains(p));
  EXPECT_FALSE(m.negative.contains({"question"}));
  EXPECT_FALSE(m.negative.contains({"questions"}));
}

TEST(MergeSentiment, IdempotentAndOrderFree) {
  const auto fp = load(LexiconFiles::fin_positive, LexiconCategory::PosFin);
  const auto fn = load(LexiconFiles::fin_negative, LexiconCategory::NegFin);
  const auto gp = load(LexiconFiles::gen_positive, LexiconCategory::PosGen);
  const auto gn = load(LexiconFiles::gen_negative, LexiconCategory::NegGen);
  const auto m = merge_sentiment(fp, fn, gp, gn);
  const auto again = merge_sentiment(m.positive, m.negative, m.positive, m.negative);
  EXPECT_EQ(again.positive.unigrams, m.positive.unigrams);
  EXPECT_EQ(again.negative.unigrams, m.negative.unigrams);
  EXPECT_TRUE(again.override_log.empty());

  // Re-inserting every source entry in shuffled order gives the same merge.
  std::mt19937_64 rng(4);
  auto shuffled = [&](const Lexicon& l) {
    std::vector<Phrase> entries;
    for (const auto& u : l.unigrams) entries.push_back({u});
    for (const auto& p : l.phrases) entries.push_back(p);
    std::shuffle(entries.begin(), entries.end(), rng);
    Lexicon out;
    for (const auto& e : entries) add_entry(out, e);
    return out;
  };
  const auto other = merge_sentiment(shuffled(fp), shuffled(fn), shuffled(gp), shuffled(gn));
  EXPECT_EQ(other.positive.unigrams, m.positive.unigrams);
  EXPECT_EQ(other.negative.unigrams, m.negative.unigrams);
  EXPECT_EQ(other.override_log, m.override_log);
}

// ---- matching -------------------------------------------------------------------

TEST(CountMatches, Examples) {
  const auto hedge = make_lexicon({"kind of", "like"});
  const auto toks = words({"kind", "of", "like"});
  EXPECT_EQ(count_matches(toks, hedge), 2u);
  EXPECT_EQ(max_tiling(toks, hedge), 2u);
  EXPECT_EQ(count_matches({}, hedge), 0u);
  const auto pos = load(LexiconFiles::fin_positive, LexiconCategory::PosFin);
  EXPECT_EQ(count_matches(words({"booming"}), pos), 1u);
  EXPECT_EQ(count_matches(words({"Booming"}), pos), 1u);
}

TEST(CountMatches, LongestMatchWins) {
  const auto lex = make_lexicon({"a", "a little", "a little bit"});
  EXPECT_EQ(count_matches(words({"a", "little", "bit", "a"}), lex), 2u);
  const auto m = PhraseMatcher(lex).matches(words({"a", "little", "bit"}));
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].length, 3u);
}

TEST(CountMatches, EntitiesNeverMatchAndBreakPhrases) {
  const auto lex = make_lexicon({"first quarter", "first", "quarter"});
  std::vector<AnnotatedToken> toks = {entity("first", "ORDINAL", 0), word("quarter")};
  EXPECT_EQ(count_matches(toks, lex), 1u);
  toks = {entity("first_quarter", "DATE", 0)};
  EXPECT_EQ(count_matches(toks, lex), 0u);
}

TEST(CountMatches, EqualsGreedyOracleOnRandomInputs) {
  std::mt19937_64 rng(21);
  const std::vector<std::string> alphabet = {"a", "b", "c", "d"};
  auto pick = [&] { return alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)]; };
  for (int trial = 0; trial < 5000; ++trial) {
    Lexicon lex;
    const int entries = std::uniform_int_distribution<int>(1, 6)(rng);
    for (int e = 0; e < entries; ++e) {
      Phrase p;
      const int len = std::uniform_int_distribution<int>(1, 4)(rng);
      for (int k = 0; k < len; ++k) p.push_back(pick());
      add_entry(lex, p);
    }
    std::vector<AnnotatedToken> toks;
    const int n = std::uniform_int_distribution<int>(0, 12)(rng);
    for (int i = 0; i < n; ++i) {
      auto t = word(pick());
      if (std::bernoulli_distribution(0.5)(rng)) t.surface[0] = static_cast<char>(std::toupper(t.surface[0]));
      if (std::bernoulli_distribution(0.1)(rng)) {
        t.entity = "CARDINAL";
        t.span_id = i;
      }
      toks.push_back(t);
    }
    const std::size_t got = count_matches(toks, lex);
    ASSERT_EQ(got, greedy_oracle(toks, lex));
    EXPECT_LE(got, max_tiling(toks, lex));
  }
}

// Greedy longest-match is not monotone under appending: a trailing token can
// complete a long phrase that swallows several shorter hits.
TEST(CountMatches, AppendingCanLowerTheGreedyCount) {
  const auto lex = make_lexicon({"a b c d", "b", "c"});
  EXPECT_EQ(count_matches(words({"a", "b", "c"}), lex), 2u);
  EXPECT_EQ(count_matches(words({"a", "b", "c", "d"}), lex), 1u);
}

TEST(CountMatches, UnigramListsAreMonotoneUnderAppending) {
  std::mt19937_64 rng(2);
  const auto lex = make_lexicon({"a", "c"});
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<AnnotatedToken> toks;
    std::size_t prev = 0;
    for (int i = 0; i < 12; ++i) {
      toks.push_back(word(std::string(1, static_cast<char>('a' + std::uniform_int_distribution<int>(0, 3)(rng)))));
      const std::size_t now = count_matches(toks, lex);
      EXPECT_GE(now, prev);
      prev = now;
    }
  }
}

// ---- entities -----------------------------------------------------------------

TEST(EntityFeatures, GroupPartition) {
  const std::map<std::string, EntityGroup> expected = {
      {"EVENT", EntityGroup::Event},       {"ORDINAL", EntityGroup::Number},   {"MONEY", EntityGroup::Number},
      {"PERCENT", EntityGroup::Number},    {"CARDINAL", EntityGroup::Number},  {"TIME", EntityGroup::Number},
      {"DATE", EntityGroup::Number},       {"QUANTITY", EntityGroup::Number},  {"LOC", EntityGroup::OrgLoc},
      {"NORP", EntityGroup::OrgLoc},       {"FACILITY", EntityGroup::OrgLoc},  {"GPE", EntityGroup::OrgLoc},
      {"LOCATION", EntityGroup::OrgLoc},   {"ORGANIZATION", EntityGroup::OrgLoc}, {"PERSON", EntityGroup::Person},
      {"PRODUCT", EntityGroup::Product}};
  EXPECT_EQ(entity_group_map().size(), expected.size());
  for (const auto& [label, group] : expected) EXPECT_EQ(entity_group(label), group) << label;
  EXPECT_FALSE(entity_group("WORK_OF_ART"));
}

TEST(EntityFeatures, Examples) {
  auto toks = words({"we", "earned", "more", "than", "before", "in", "total", "sales"});
  toks.push_back(entity("$4.6_million", "MONEY", 0));
  toks.push_back(entity("$2_million", "MONEY", 1));
  const auto f = entity_features(make_turn(toks));
  EXPECT_EQ(f.counts[1], 2.0);
  EXPECT_DOUBLE_EQ(f.concreteness, 0.2);

  const auto none = entity_features(make_turn(words({"a", "b", "c"})));
  EXPECT_EQ(none.counts, (std::array<double, 5>{}));
  EXPECT_EQ(none.concreteness, 0.0);
}

TEST(EntityFeatures, UnknownLabelIsLoggedAndUncounted) {
  auto toks = words({"a", "b", "c"});
  toks.push_back(entity("Mona_Lisa", "WORK_OF_ART", 0));
  std::vector<std::string> warnings;
  Call c;
  c.id = "X";
  c.turns = {make_turn(toks)};
  const auto rows = call_features(c, lexicons(), &warnings);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("UnknownEntityLabel"), std::string::npos);
  EXPECT_EQ(rows[0].values[F6Concreteness], 0.0);
}

// Hand annotation of a sample company answer: 24 word tokens after
// lexicalization, 7 of them entities.
TEST(EntityFeatures, ConcretenessOfTheInterCompanySalesTurn) {
  std::vector<AnnotatedToken> t = {word("Yes", "UH", "INTJ"), punct(".")};
  int span = 0;
  auto e = [&](const char* s, const char* label) { t.push_back(entity(s, label, span++, "NNP", "PROPN")); };
  auto w = [&](std::initializer_list<const char*> ws) {
    for (const char* s : ws) t.push_back(word(s));
  };
  e("Andrew", "PERSON");
  w({"for"});
  e("the_quarter", "DATE");
  w({"the", "total", "inter-company", "sales", "for"});
  e("the_first_quarter", "DATE");
  w({"was", "roughly"});
  e("4.6_million", "MONEY");
  w({"and"});
  e("about_600,000", "MONEY");
  w({"was", "related", "to", "medical"});
  t.push_back(punct(","));
  w({"it", "was"});
  e("4_million", "MONEY");
  w({"via"});
  e("DSS", "ORGANIZATION");
  t.push_back(punct("."));
  const auto f = entity_features(make_turn(t));
  EXPECT_EQ(make_turn(t).token_count(), 24u);
  EXPECT_NEAR(f.concreteness, 0.29, 0.01);
}

// ---- predicates and tense --------------------------------------------------------

TEST(Predicates, Examples) {
  EXPECT_EQ(extract_predicates(annotated("revenue grew and margins improved")).size(), 2u);
  EXPECT_TRUE(extract_predicates(make_turn(words({"the", "strong", "quarter"}))).empty());
  const auto is_growing = extract_predicates(annotated("Revenue is growing."));
  ASSERT_EQ(is_growing.size(), 1u);
  EXPECT_EQ(is_growing[0].ptb, "VBG");
}

TEST(Predicates, TemporalOrientation) {
  auto orient = [](std::string_view text) {
    const auto p = extract_predicates(annotated(text));
    EXPECT_EQ(p.size(), 1u) << text;
    return p.empty() ? Tense::Present : temporal_orientation(p.back());
  };
  EXPECT_EQ(orient("Revenue grew."), Tense::Past);
  EXPECT_EQ(orient("We will grow."), Tense::Future);
  EXPECT_EQ(orient("It was growing."), Tense::Past);
  EXPECT_EQ(orient("It is growing."), Tense::Present);
  EXPECT_EQ(orient("We grow."), Tense::Present);
  EXPECT_EQ(orient("We'll grow."), Tense::Future);
}

TEST(Predicates, WindowPrecedenceAndSentenceLimit) {
  Predicate p{3, "VBG", {"was", "will", "be"}};
  EXPECT_EQ(temporal_orientation(p), Tense::Future);
  p.ptb = "VBN";
  EXPECT_EQ(temporal_orientation(p), Tense::Past);

  const auto t = make_turn({word("we", "PRP", "PRON"), word("will", "MD", "AUX"), punct("."),
                            word("grow", "VB", "VERB")});
  const auto preds = extract_predicates(t);
  ASSERT_EQ(preds.size(), 1u);
  EXPECT_TRUE(preds[0].window.empty());
  EXPECT_EQ(temporal_orientation(preds[0]), Tense::Present);
}

// ---- ratios and the full vector -----------------------------------------------------

TEST(LexicalRatios, Examples) {
  auto toks = words({"we", "saw", "a", "booming", "quarter", "across", "the", "retail", "segment", "overall"});
  const auto r = lexical_ratios(make_turn(toks), lexicons());
  EXPECT_DOUBLE_EQ(r.positive, 0.1);

  std::vector<AnnotatedToken> ents;
  for (int i = 0; i < 10; ++i) ents.push_back(entity("good", "CARDINAL", i));
  const auto z = lexical_ratios(make_turn(ents), lexicons());
  for (double v : {z.positive, z.negative, z.hedge, z.modal, z.uncertain, z.constraining, z.litigious}) EXPECT_EQ(v, 0.0);
}

TEST(PragmaticVector, MinimalTurn) {
  const auto t = make_turn(words({"the", "retail", "segment", "and", "the", "cloud", "segment", "and", "the", "rest"}),
                           SpeakerType::Analyst, Section::QA, 1);
  const auto v = extract_pragmatic_vector(t, lexicons());
  for (std::size_t j = 0; j < 16; ++j) EXPECT_EQ(v[j], 0.0) << feature_column(j);
  EXPECT_EQ(v[F17TurnOrder], 1.0);
  EXPECT_EQ(v[F18NumTokens], 10.0);
  EXPECT_EQ(v[F19NumPredicates], 0.0);
  EXPECT_EQ(v[F20NumSentences], 1.0);
}

TEST(PragmaticVector, ConstructedPredicates) {
  const auto t = make_turn({word("revenue"), word("grew", "VBD", "VERB"), word("and", "CC", "CCONJ"),
                            word("margins", "NNS"), word("improved", "VBD", "VERB"), punct("."),
                            word("we", "PRP", "PRON"), word("will", "MD", "AUX"), word("expand", "VB", "VERB"),
                            word("further", "RB", "ADV"), punct(".")});
  const auto v = extract_pragmatic_vector(t, lexicons());
  EXPECT_EQ(v[F7Past], 2.0);
  EXPECT_EQ(v[F8Present], 0.0);
  EXPECT_EQ(v[F9Future], 1.0);
  EXPECT_EQ(v[F19NumPredicates], 3.0);
  EXPECT_EQ(v[F20NumSentences], 2.0);
  EXPECT_EQ(v[F18NumTokens], 9.0);
}

TEST(PragmaticVector, SentimentTurnCalibration) {
  const auto v = extract_pragmatic_vector(annotated("Good morning, gentlemen. Nice job on the rebound quarter."),
                                          lexicons());
  EXPECT_NEAR(v[F10PosSent], 0.33, 0.05);
}

TEST(PragmaticVector, InvariantsOnRandomTurns) {
  std::mt19937_64 rng(17);
  const std::vector<std::string> vocab = {"good", "loss", "may", "might", "kind", "of", "perhaps", "must", "litigation",
                                          "will", "was", "growth", "the", "strong", "sort", "uncertain", "we", "could"};
  const std::vector<std::pair<std::string, std::string>> tags = {{"NN", "NOUN"}, {"VBD", "VERB"}, {"VB", "VERB"},
                                                                 {"VBZ", "AUX"}, {"MD", "AUX"},   {"JJ", "ADJ"},
                                                                 {"VBG", "VERB"}, {"VBN", "VERB"}, {"RB", "ADV"}};
  const std::vector<std::string> labels = {"MONEY", "PERSON", "GPE", "EVENT", "PRODUCT", "DATE"};
  for (int trial = 0; trial < 3000; ++trial) {
    std::vector<AnnotatedToken> toks;
    const int n = std::uniform_int_distribution<int>(1, 40)(rng);
    int span = 0;
    for (int i = 0; i < n; ++i) {
      const int kind = std::uniform_int_distribution<int>(0, 9)(rng);
      if (kind == 0) {
        toks.push_back(punct("."));
      } else if (kind == 1) {
        toks.push_back(entity("E", labels[std::uniform_int_distribution<std::size_t>(0, labels.size() - 1)(rng)], span++));
      } else {
        const auto& [ptb, ud] = tags[std::uniform_int_distribution<std::size_t>(0, tags.size() - 1)(rng)];
        toks.push_back(word(vocab[std::uniform_int_distribution<std::size_t>(0, vocab.size() - 1)(rng)], ptb, ud));
      }
    }
    const auto v = extract_pragmatic_vector(make_turn(toks, SpeakerType::Analyst, Section::QA, trial % 7 + 1),
                                            lexicons());
    EXPECT_EQ(v[F7Past] + v[F8Present] + v[F9Future], v[F19NumPredicates]);
    for (std::size_t j = F10PosSent; j <= F16Litigious; ++j) {
      EXPECT_GE(v[j], 0.0);
      EXPECT_LE(v[j], 1.0);
    }
    for (double x : v) EXPECT_GE(x, 0.0);
    const double ents = v[0] + v[1] + v[2] + v[3] + v[4];
    if (v[F18NumTokens] > 0) EXPECT_DOUBLE_EQ(v[F6Concreteness], ents / v[F18NumTokens]);
    EXPECT_GE(v[F6Concreteness], 0.0);
    EXPECT_LE(v[F6Concreteness], 1.0);
  }
}

TEST(PragmaticVector, AddingAnEntitySpanAddsOneTokenAndOneEntity) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 500; ++trial) {
    auto toks = words({"revenue", "in", "the", "segment", "rose", "sharply", "this", "year"});
    const auto before = entity_features(lexicalize_entities(make_turn(toks)));
    const std::size_t before_tokens = lexicalize_entities(make_turn(toks)).token_count();
    const int k = std::uniform_int_distribution<int>(1, 5)(rng);
    const auto at = static_cast<std::ptrdiff_t>(std::uniform_int_distribution<std::size_t>(0, toks.size())(rng));
    std::vector<AnnotatedToken> span;
    for (int i = 0; i < k; ++i) span.push_back(entity("p" + std::to_string(i), "ORGANIZATION", 99, "NNP", "PROPN"));
    toks.insert(toks.begin() + at, span.begin(), span.end());
    const auto t = lexicalize_entities(make_turn(toks));
    const auto after = entity_features(t);
    EXPECT_EQ(t.token_count(), before_tokens + 1);
    EXPECT_EQ(after.counts[2], before.counts[2] + 1);
  }
}

TEST(PragmaticVector, PermutingTurnsOnlyMovesTurnOrder) {
  Call c;
  c.id = "X";
  c.turns = {annotated("Revenue grew 12% to $4.6 million in the first quarter of this year.", 1),
             annotated("We will perhaps see some litigation risk, which may be uncertain.", 2),
             annotated("Good morning. Nice job on the strong rebound quarter, really impressive.", 3),
             annotated("Costs were higher than expected because freight and labor got worse.", 4)};
  const auto base = call_features(c, lexicons());
  Call p = c;
  std::vector<int> order = {3, 1, 4, 2};
  std::vector<Turn> shuffled;
  for (int o : order) shuffled.push_back(c.turns[static_cast<std::size_t>(o - 1)]);
  for (std::size_t i = 0; i < shuffled.size(); ++i) shuffled[i].turn_order = static_cast<int>(i + 1);
  p.turns = shuffled;
  const auto moved = call_features(p, lexicons());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& a = base[static_cast<std::size_t>(order[i] - 1)].values;
    const auto& b = moved[i].values;
    for (std::size_t j = 0; j < kNumPragmatic; ++j) {
      if (j == F17TurnOrder) EXPECT_EQ(b[j], static_cast<double>(i + 1));
      else EXPECT_EQ(a[j], b[j]) << feature_column(j);
    }
  }
}

TEST(PragmaticVector, CsvLayout) {
  Call c;
  c.id = "ACME_2016-05-03";
  c.turns = {annotated("Revenue grew 12% to $4.6 million in the first quarter of this year.", 1)};
  c.turns[0].speaker_name = "Jane, Roe";
  std::ostringstream os;
  write_feature_csv(os, call_features(c, lexicons()));
  std::istringstream in(os.str());
  const auto t = csv::read(in);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.header.size(), 24u);
  EXPECT_EQ(t.header[4], "f1");
  EXPECT_EQ(t.rows[0][t.column("speaker")], "Jane, Roe");
  EXPECT_EQ(t.rows[0][t.column("section")], "QA");
}
