#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "ecall/pipeline.hpp"
#include "support.hpp"

using namespace ecall;
using namespace ecall::test;

namespace {

template <class Fn>
Errc error_code(Fn fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no ecall::Error thrown";
  return Errc::InvalidArgument;
}

/// A synthetic corpus written under `dir`, with a config pointing at it.
RunConfig synth_config(const fs::path& dir, std::size_t calls, double signal = 0.8, std::uint64_t seed = 42) {
  RunConfig cfg;
  cfg.synth_dir = dir / "synth";
  cfg.corpus_dir = cfg.synth_dir / "corpus";
  cfg.market_csv = cfg.synth_dir / "market.csv";
  cfg.ratings_csv = cfg.synth_dir / "ratings.csv";
  cfg.targets_csv = cfg.synth_dir / "targets.csv";
  cfg.out_dir = dir / "work";
  cfg.seed = seed;
  cfg.synth.calls = calls;
  cfg.synth.signal = signal;
  std::ostringstream log;
  cmd_synth(cfg, log);
  return cfg;
}

EvalReport run_cell(RunConfig cfg, FeatureSet set, Task task) {
  std::ostringstream log;
  cfg.features = set;
  cfg.task = task;
  cmd_train(cfg, log);
  return cmd_evaluate(cfg, log);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  return out;
}

}  // namespace

// ---- configuration --------------------------------------------------------------------

TEST(Config, ParsesKeysCommentsAndRelativePaths) {
  std::istringstream in(
      "# run settings\n"
      "corpus = data/calls   # trailing comment\n"
      "\n"
      "train_years = 2009-2014\n"
      "validation_years = 2015\n"
      "test_years=2016-2017\n"
      "scope = qa\n"
      "task = regression\n"
      "features = ensemble\n"
      "seed = 7\n"
      "audit = yes\n"
      "synth.class_balance = 1, 2, 1\n");
  const auto cfg = parse_config(in, "/base");
  EXPECT_EQ(cfg.corpus_dir, fs::path("/base/data/calls"));
  EXPECT_EQ(cfg.train, (YearRange{2009, 2014}));
  EXPECT_EQ(cfg.validation, (YearRange{2015, 2015}));
  EXPECT_EQ(cfg.test, (YearRange{2016, 2017}));
  EXPECT_EQ(cfg.scope, Scope::QAOnly);
  EXPECT_EQ(cfg.task, Task::Regression);
  EXPECT_EQ(cfg.features, FeatureSet::Ensemble);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_TRUE(cfg.audit);
  EXPECT_EQ(cfg.synth.class_balance[1], 2.0);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, RejectsBadInput) {
  RunConfig cfg;
  EXPECT_EQ(error_code([&] { cfg.set("colour", "blue"); }), Errc::InvalidArgument);
  EXPECT_EQ(error_code([&] { cfg.set("seed", "-3"); }), Errc::InvalidArgument);
  EXPECT_EQ(error_code([&] { cfg.set("alpha", "lots"); }), Errc::InvalidArgument);
  EXPECT_EQ(error_code([&] { cfg.set("synth.class_balance", "1,2"); }), Errc::InvalidArgument);
  std::istringstream no_eq("scope qa\n");
  EXPECT_EQ(error_code([&] { parse_config(no_eq); }), Errc::MalformedInput);
  EXPECT_EQ(error_code([] { load_config("/nonexistent/ecall.conf"); }), Errc::IoFailure);

  EXPECT_EQ(error_code([] { parse_year_range("2015-2012"); }), Errc::InvalidArgument);
  EXPECT_EQ(error_code([] { parse_year_range("20x5"); }), Errc::InvalidArgument);
  EXPECT_EQ(to_string(parse_year_range(" 2016 ")), "2016");

  RunConfig overlap;
  overlap.validation = {2015, 2016};
  EXPECT_EQ(error_code([&] { overlap.validate(); }), Errc::InvalidArgument);
  RunConfig one_fold;
  one_fold.folds = 1;
  EXPECT_EQ(error_code([&] { one_fold.validate(); }), Errc::InvalidArgument);
  RunConfig alpha;
  alpha.alpha = 1.0;
  EXPECT_EQ(error_code([&] { alpha.validate(); }), Errc::InvalidArgument);
}

// ---- synthetic corpus --------------------------------------------------------------------

TEST(Synth, SameSeedSameCorpus) {
  SynthParams p;
  p.calls = 40;
  const auto a = generate_corpus(p), b = generate_corpus(p);
  ASSERT_EQ(a.transcripts.size(), 40u);
  for (std::size_t i = 0; i < 40; ++i) EXPECT_EQ(to_canonical_json(a.transcripts[i]), to_canonical_json(b.transcripts[i]));
  EXPECT_EQ(a.manifest, b.manifest);
  EXPECT_EQ(a.planted_class, b.planted_class);
  p.seed = 43;
  EXPECT_NE(to_canonical_json(generate_corpus(p).transcripts[0]), to_canonical_json(a.transcripts[0]));
}

TEST(Synth, PlantedLabelsAreRecoverable) {
  SynthParams p;
  p.calls = 120;
  const auto c = generate_corpus(p);
  std::vector<CallKey> keys;
  for (const auto& t : c.transcripts) keys.push_back({t.source_id, t.ticker, t.datetime});
  std::vector<std::string> skipped;
  const auto labels = build_labels(keys, c.targets, &skipped);
  EXPECT_TRUE(skipped.empty());
  for (const auto& l : labels) EXPECT_EQ(l.c, c.planted_class.at(l.call_id)) << l.call_id;
}

// ---- ingest -------------------------------------------------------------------------------

TEST(Ingest, ReportsMalformedFilesAndTheFailureRule) {
  ScratchDir dir("ingest");
  auto cfg = synth_config(dir.path(), 3);
  write_file((cfg.corpus_dir / "broken.json").string(), "{\"ticker\": ");
  std::ostringstream log;
  const auto rep = cmd_ingest(cfg, log);
  EXPECT_EQ(rep.entries.size(), 4u);
  EXPECT_EQ(rep.failed(), 1u);
  EXPECT_TRUE(rep.too_many_failures());
  std::size_t written = 0;
  for (const auto& e : fs::directory_iterator(WorkDir{cfg.out_dir}.annotated())) written += e.is_regular_file();
  EXPECT_EQ(written, 3u);
  EXPECT_NE(slurp(cfg.out_dir / "reports" / "ingest.txt").find("broken.json"), std::string::npos);

  IngestReport r;
  r.entries.resize(10);
  for (auto& e : r.entries) e.ok = true;
  r.entries[0].ok = false;
  EXPECT_FALSE(r.too_many_failures());
  r.entries[1].ok = false;
  EXPECT_TRUE(r.too_many_failures());
}

TEST(Ingest, RerunIsByteIdentical) {
  ScratchDir dir("rerun");
  auto cfg = synth_config(dir.path(), 20);
  std::ostringstream log;
  cfg.threads = 1;
  cmd_ingest(cfg, log);
  const auto first = tree(cfg.out_dir);
  cfg.threads = 4;
  cmd_ingest(cfg, log);
  EXPECT_EQ(tree(cfg.out_dir), first);
}

// ---- stage errors ----------------------------------------------------------------------------

TEST(Stages, MissingInputsAreReported) {
  ScratchDir dir("stages");
  auto cfg = synth_config(dir.path(), 100);
  std::ostringstream log;
  EXPECT_EQ(error_code([&] { cmd_featurize(cfg, log); }), Errc::MissingFeatures);
  cmd_ingest(cfg, log);
  EXPECT_EQ(error_code([&] { cmd_train(cfg, log); }), Errc::MissingFeatures);

  write_file(cfg.ratings_csv.string(), "analyst_id,ticker,date,rating\n");
  EXPECT_EQ(error_code([&] { cmd_correlate(cfg, log); }), Errc::InsufficientData);

  cmd_featurize(cfg, log);
  cfg.features = FeatureSet::Ensemble;
  EXPECT_EQ(error_code([&] { cmd_train(cfg, log); }), Errc::ModelNotFound);
  cfg.features = FeatureSet::BOW;
  EXPECT_EQ(error_code([&] { cmd_evaluate(cfg, log); }), Errc::ModelNotFound);
  cfg.task = Task::Correlation;
  EXPECT_EQ(error_code([&] { cmd_train(cfg, log); }), Errc::InvalidArgument);
}

// ---- label isolation ----------------------------------------------------------------------------

TEST(Leakage, TestLabelsOnlyReadWhileEvaluating) {
  ScratchDir dir("leak");
  auto cfg = synth_config(dir.path(), 200);
  std::ostringstream log;
  cmd_ingest(cfg, log);
  cmd_featurize(cfg, log);
  const fs::path feats = WorkDir{cfg.out_dir}.features(cfg.scope);
  EXPECT_EQ(error_code([&] { read_split_labels(feats, Split::Test); }), Errc::LeakageViolation);

  LabelAudit::instance().enable(true);
  {
    LabelAudit::Stage stage("train");
    EXPECT_EQ(error_code([] { LabelAudit::instance().record(Split::Test, "read"); }), Errc::LeakageViolation);
  }
  LabelAudit::instance().enable(true);
  run_cell(cfg, FeatureSet::BOW, Task::Classification);
  const auto log_lines = LabelAudit::instance().log();
  LabelAudit::instance().enable(false);
  std::size_t test_reads = 0;
  for (const auto& l : log_lines)
    if (l.ends_with(" test")) {
      EXPECT_EQ(l.rfind("evaluate ", 0), 0u) << l;
      ++test_reads;
    }
  EXPECT_GE(test_reads, 1u);
}

TEST(Leakage, TestLabelsDoNotChangeTrainedModels) {
  ScratchDir dir("perturb");
  auto cfg = synth_config(dir.path(), 200);
  std::ostringstream log;
  cmd_ingest(cfg, log);
  cmd_featurize(cfg, log);
  cfg.task = Task::Regression;
  const auto before = cmd_train(cfg, log);

  const fs::path test_labels = labels_path(WorkDir{cfg.out_dir}.features(cfg.scope), Split::Test);
  std::string text = slurp(test_labels);
  for (auto& ch : text)
    if (ch >= '1' && ch <= '8') ++ch;
  write_file(test_labels.string(), text);
  const auto after = cmd_train(cfg, log);
  EXPECT_EQ(after.model.ridge->weights, before.model.ridge->weights);
  EXPECT_EQ(after.best, before.best);
}

// ---- scopes ------------------------------------------------------------------------------------

TEST(Scopes, QAOnlyDropsPresentationOnlyCalls) {
  ScratchDir dir("scope");
  RunConfig cfg;
  cfg.synth.presentation_only_rate = 0.2;
  {
    auto made = synth_config(dir.path(), 120);
    made.synth.presentation_only_rate = 0.2;
    std::ostringstream log;
    cmd_synth(made, log);
    cfg = made;
  }
  std::ostringstream log;
  cmd_ingest(cfg, log);
  const auto calls = load_annotated(WorkDir{cfg.out_dir});
  std::size_t without_qa = 0;
  for (const auto& c : calls) without_qa += !c.has_qa_section();
  ASSERT_GT(without_qa, 0u);

  cfg.scope = Scope::QAOnly;
  const auto qa = cmd_featurize(cfg, log);
  EXPECT_EQ(qa.splits.no_qa.size(), without_qa);
  cfg.scope = Scope::WholeDoc;
  const auto wd = cmd_featurize(cfg, log);
  EXPECT_TRUE(wd.splits.no_qa.empty());
  std::size_t qa_rows = 0, wd_rows = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    qa_rows += qa.rows[s];
    wd_rows += wd.rows[s];
  }
  EXPECT_EQ(wd_rows - qa_rows, without_qa);
}

// ---- end to end -----------------------------------------------------------------------------------

TEST(EndToEnd, SameSeedSameReports) {
  std::map<std::string, std::string> first;
  for (int run = 0; run < 2; ++run) {
    ScratchDir dir("e2e");
    auto cfg = synth_config(dir.path(), 300);
    cfg.threads = run == 0 ? 1 : 4;
    std::ostringstream log;
    cmd_ingest(cfg, log);
    cmd_featurize(cfg, log);
    for (Task t : {Task::Regression, Task::Classification}) {
      for (FeatureSet f : {FeatureSet::Market, FeatureSet::Fusion, FeatureSet::Ensemble}) run_cell(cfg, f, t);
    }
    cmd_report(cfg, log);
    const auto reports = tree(cfg.out_dir / "reports");
    const auto models = tree(cfg.out_dir / "models");
    std::map<std::string, std::string> all = reports;
    for (const auto& [k, v] : models) all["models/" + k] = v;
    if (run == 0) first = all;
    else EXPECT_EQ(all, first);
  }
}

TEST(EndToEnd, StrongSignalIsLearned) {
  ScratchDir dir("strong");
  auto cfg = synth_config(dir.path(), 600, 1.0);
  std::ostringstream log;
  cmd_ingest(cfg, log);
  cmd_featurize(cfg, log);
  const auto r = run_cell(cfg, FeatureSet::BOW, Task::Classification);
  EXPECT_GT(r.classification.accuracy, 0.9);
  EXPECT_EQ(r.rows, 75u);
  std::size_t support = 0;
  for (const auto& s : r.sectors) support += s.support;
  EXPECT_EQ(support, r.rows);
}

TEST(EndToEnd, NoSignalStaysNearTheBaseline) {
  ScratchDir dir("null");
  auto cfg = synth_config(dir.path(), 600, 0.0);
  std::ostringstream log;
  cmd_ingest(cfg, log);
  cmd_featurize(cfg, log);
  const auto r = run_cell(cfg, FeatureSet::BOW, Task::Classification);
  EXPECT_LT(std::abs(r.classification.accuracy - r.baseline), 0.15);
}
