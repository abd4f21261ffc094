#pragma once

// Pipeline stages behind the command-line tool. Stages communicate through a
// work directory so each one can be rerun on its own:
//
//   annotated/<call>.json            ingest
//   reports/ingest.{json,txt}        ingest
//   reports/correlation.{csv,txt}    correlate
//   features/<scope>/...             featurize
//   models/<set>_<scope>_<task>.*    train
//   reports/eval_<set>_<scope>_<task>.json, sectors_*.{csv,txt}   evaluate
//   reports/results.{csv,txt}        report

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ecall/annotate.hpp"
#include "ecall/corpus.hpp"
#include "ecall/corpus_io.hpp"
#include "ecall/error.hpp"
#include "ecall/eval.hpp"
#include "ecall/featurize.hpp"
#include "ecall/labels.hpp"
#include "ecall/lexicons.hpp"
#include "ecall/models.hpp"
#include "ecall/pragmatics.hpp"
#include "ecall/study.hpp"
#include "ecall/synth.hpp"
#include "ecall/text.hpp"
#include "ecall/timeutil.hpp"

namespace ecall {

namespace fs = std::filesystem;

// ---- configuration ---------------------------------------------------------

struct YearRange {
  int first = 0;
  int last = 0;
  bool contains(int y) const { return y >= first && y <= last; }
  friend bool operator==(const YearRange&, const YearRange&) = default;
};

/// "2010-2015" or a single year "2016".
inline YearRange parse_year_range(std::string_view s) {
  const std::string t(trim(s));
  const auto dash = t.find('-', 1);
  try {
    std::size_t used = 0;
    YearRange r;
    r.first = std::stoi(t.substr(0, dash), &used);
    if (used != (dash == std::string::npos ? t.size() : dash)) throw std::invalid_argument(t);
    r.last = r.first;
    if (dash != std::string::npos) {
      const std::string rest = t.substr(dash + 1);
      r.last = std::stoi(rest, &used);
      if (used != rest.size()) throw std::invalid_argument(t);
    }
    if (r.last < r.first) throw Error(Errc::InvalidArgument, "year range '" + t + "' is reversed");
    return r;
  } catch (const std::logic_error&) {
    throw Error(Errc::InvalidArgument, "bad year range '" + t + "'");
  }
}

inline std::string to_string(const YearRange& r) {
  return r.first == r.last ? std::to_string(r.first) : std::to_string(r.first) + "-" + std::to_string(r.last);
}

enum class FeatureSet { Market, BOW, Pragmatic, Fusion, Ensemble };

constexpr std::string_view to_string(FeatureSet f) {
  switch (f) {
    case FeatureSet::Market: return "market";
    case FeatureSet::BOW: return "bow";
    case FeatureSet::Pragmatic: return "pragmatic";
    case FeatureSet::Fusion: return "fusion";
    case FeatureSet::Ensemble: return "ensemble";
  }
  return "?";
}

inline FeatureSet parse_feature_set(std::string_view s) {
  const std::string l = to_lower(trim(s));
  if (l == "market") return FeatureSet::Market;
  if (l == "bow" || l == "bag-of-words") return FeatureSet::BOW;
  if (l == "pragmatic" || l == "prag") return FeatureSet::Pragmatic;
  if (l == "fusion") return FeatureSet::Fusion;
  if (l == "ensemble") return FeatureSet::Ensemble;
  throw Error(Errc::InvalidArgument, "unknown feature set '" + std::string(s) + "'");
}

/// The stacking ensemble combines the market model with the fusion
/// (bag-of-words plus pragmatic) model.
inline const std::vector<FeatureSet>& ensemble_bases() {
  static const std::vector<FeatureSet> b = {FeatureSet::Market, FeatureSet::Fusion};
  return b;
}

inline bool parse_bool(std::string_view s) {
  const std::string l = to_lower(trim(s));
  if (l == "1" || l == "true" || l == "yes" || l == "on") return true;
  if (l == "0" || l == "false" || l == "no" || l == "off") return false;
  throw Error(Errc::InvalidArgument, "expected a boolean, got '" + std::string(s) + "'");
}

struct RunConfig {
  fs::path corpus_dir = "corpus";
  fs::path lexicon_dir = ECALL_LEXICON_DIR;
  fs::path market_csv = "market.csv";
  fs::path ratings_csv = "ratings.csv";
  fs::path targets_csv = "targets.csv";
  fs::path out_dir = "work";
  fs::path synth_dir = "synth";
  YearRange train{2010, 2015};
  YearRange validation{2016, 2016};
  YearRange test{2017, 2017};
  Scope scope = Scope::WholeDoc;
  Task task = Task::Classification;
  FeatureSet features = FeatureSet::BOW;
  std::uint64_t seed = 42;
  double alpha = 0.05;
  std::size_t folds = 5;
  std::size_t threads = 0;  // 0: one per hardware thread
  bool audit = false;
  SynthParams synth;

  /// Sets one key. Relative paths are taken against `base`.
  void set(std::string_view key, std::string_view value, const fs::path& base = {}) {
    const std::string k = to_lower(trim(key));
    const std::string v(trim(value));
    auto path = [&] { return base.empty() || fs::path(v).is_absolute() ? fs::path(v) : base / v; };
    auto uint = [&] {
      try {
        std::size_t used = 0;
        const auto n = std::stoull(v, &used);
        if (used != v.size() || v.front() == '-') throw std::invalid_argument(v);
        return static_cast<std::uint64_t>(n);
      } catch (const std::logic_error&) {
        throw Error(Errc::InvalidArgument, k + ": expected a non-negative integer, got '" + v + "'");
      }
    };
    auto real = [&] {
      try {
        return csv::to_double(v);
      } catch (const Error&) {
        throw Error(Errc::InvalidArgument, k + ": expected a number, got '" + v + "'");
      }
    };
    if (k == "corpus") corpus_dir = path();
    else if (k == "lexicons") lexicon_dir = path();
    else if (k == "market") market_csv = path();
    else if (k == "ratings") ratings_csv = path();
    else if (k == "targets") targets_csv = path();
    else if (k == "out") out_dir = path();
    else if (k == "train_years") train = parse_year_range(v);
    else if (k == "validation_years") validation = parse_year_range(v);
    else if (k == "test_years") test = parse_year_range(v);
    else if (k == "scope") scope = parse_scope(v);
    else if (k == "task") task = parse_task(v);
    else if (k == "features") features = parse_feature_set(v);
    else if (k == "seed") seed = uint();
    else if (k == "alpha") alpha = real();
    else if (k == "folds") folds = static_cast<std::size_t>(uint());
    else if (k == "threads") threads = static_cast<std::size_t>(uint());
    else if (k == "audit") audit = parse_bool(v);
    else if (k == "synth.out") synth_dir = path();
    else if (k == "synth.calls") synth.calls = static_cast<std::size_t>(uint());
    else if (k == "synth.signal") synth.signal = real();
    else if (k == "synth.sentiment") synth.sentiment = real();
    else if (k == "synth.tickers") synth.tickers = static_cast<std::size_t>(uint());
    else if (k == "synth.first_year") synth.first_year = static_cast<int>(uint());
    else if (k == "synth.last_year") synth.last_year = static_cast<int>(uint());
    else if (k == "synth.market_signal") synth.market_signal = real();
    else if (k == "synth.missing_rate") synth.missing_rate = real();
    else if (k == "synth.presentation_only_rate") synth.presentation_only_rate = real();
    else if (k == "synth.class_balance") {
      std::vector<double> w;
      std::string part;
      std::istringstream in(v);
      while (std::getline(in, part, ',')) w.push_back(csv::to_double(std::string(trim(part))));
      if (w.size() != 3) throw Error(Errc::InvalidArgument, "synth.class_balance needs three comma-separated weights");
      synth.class_balance = {w[0], w[1], w[2]};
    } else {
      throw Error(Errc::InvalidArgument, "unknown configuration key '" + k + "'");
    }
  }

  void validate() const {
    if (!(train.last < validation.first && validation.last < test.first))
      throw Error(Errc::InvalidArgument, "splits must be disjoint and ordered train < validation < test");
    if (folds < 2) throw Error(Errc::InvalidArgument, "folds must be >= 2");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::InvalidArgument, "alpha must lie in (0,1)");
    if (!(synth.signal >= 0.0 && synth.signal <= 1.0) || !(synth.sentiment >= 0.0 && synth.sentiment <= 1.0))
      throw Error(Errc::InvalidArgument, "synth.signal and synth.sentiment must lie in [0,1]");
    if (synth.first_year > synth.last_year) throw Error(Errc::InvalidArgument, "synth years are reversed");
    if (synth.tickers == 0) throw Error(Errc::InvalidArgument, "synth.tickers must be >= 1");
  }

  std::uint64_t sub(std::string_view name) const { return sub_seed(seed, name); }
};

/// `key = value` lines; `#` starts a comment; blank lines are ignored.
inline RunConfig parse_config(std::istream& in, const fs::path& base = {}, RunConfig cfg = {}) {
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::MalformedInput, "config line " + std::to_string(line_no) + ": expected key = value");
    cfg.set(line.substr(0, eq), line.substr(eq + 1), base);
  }
  return cfg;
}

inline RunConfig load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::IoFailure, "cannot open config " + file.string());
  return parse_config(in, file.parent_path());
}

// ---- work directory --------------------------------------------------------

struct WorkDir {
  fs::path root;

  fs::path annotated() const { return root / "annotated"; }
  fs::path reports() const { return root / "reports"; }
  fs::path features(Scope s) const { return root / "features" / std::string(to_string(s)); }
  fs::path models() const { return root / "models"; }
  static std::string cell(FeatureSet f, Scope s, Task t) {
    return std::string(to_string(f)) + "_" + std::string(to_string(s)) + "_" + std::string(to_string(t));
  }
  fs::path model(FeatureSet f, Scope s, Task t) const { return models() / (cell(f, s, t) + ".model"); }
};

inline std::string read_text(const fs::path& p, Errc missing = Errc::IoFailure) {
  if (!fs::exists(p)) throw Error(missing, p.string() + " does not exist");
  return read_file(p.string());
}

inline void write_text(const fs::path& p, const std::string& s) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  write_file(p.string(), s);
}

// ---- worker pool -----------------------------------------------------------

/// Runs fn(0..n-1) on a bounded set of threads. Callers write results by
/// index, so the output never depends on scheduling.
inline void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    });
  for (auto& th : pool) th.join();
}

// ---- label access ----------------------------------------------------------

enum class Split { Train, Validation, Test };

constexpr std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "?";
}

inline constexpr std::array<Split, 3> kSplits = {Split::Train, Split::Validation, Split::Test};

/// Records which stage touched which label split. With auditing on, a read
/// of test labels from any stage other than evaluate throws.
class LabelAudit {
 public:
  static LabelAudit& instance() {
    static LabelAudit a;
    return a;
  }

  void enable(bool on) {
    std::lock_guard lk(mu_);
    enabled_ = on;
    log_.clear();
  }
  bool enabled() const {
    std::lock_guard lk(mu_);
    return enabled_;
  }
  std::string stage() const {
    std::lock_guard lk(mu_);
    return stage_;
  }
  std::vector<std::string> log() const {
    std::lock_guard lk(mu_);
    return log_;
  }

  void record(Split split, std::string_view action) {
    std::lock_guard lk(mu_);
    if (!enabled_) return;
    log_.push_back(stage_ + " " + std::string(action) + " " + std::string(to_string(split)));
    if (split == Split::Test && action == "read" && stage_ != "evaluate")
      throw Error(Errc::LeakageViolation, "test labels read during stage '" + stage_ + "'");
  }

  class Stage {
   public:
    explicit Stage(std::string name) : prev_(instance().swap_stage(std::move(name))) {}
    ~Stage() { instance().swap_stage(std::move(prev_)); }
    Stage(const Stage&) = delete;
    Stage& operator=(const Stage&) = delete;

   private:
    std::string prev_;
  };

 private:
  std::string swap_stage(std::string s) {
    std::lock_guard lk(mu_);
    std::swap(stage_, s);
    return s;
  }
  mutable std::mutex mu_;
  bool enabled_ = false;
  std::string stage_ = "none";
  std::vector<std::string> log_;
};

struct EvalReport;
inline EvalReport cmd_evaluate(const RunConfig& cfg, std::ostream& log);

/// Proof of being inside the evaluate stage; only cmd_evaluate can make one.
class TestLabelAccess {
  TestLabelAccess() = default;
  friend EvalReport cmd_evaluate(const RunConfig& cfg, std::ostream& log);
};

inline fs::path labels_path(const fs::path& feature_dir, Split s) {
  return feature_dir / ("labels_" + std::string(to_string(s)) + ".csv");
}

namespace detail {
inline std::vector<CallLabel> load_labels(const fs::path& dir, ecall::Split s) {
  LabelAudit::instance().record(s, "read");
  std::istringstream in(read_text(labels_path(dir, s), Errc::MissingFeatures));
  return read_labels(in);
}
}  // namespace detail

/// Training and validation labels. Test labels need a TestLabelAccess.
inline std::vector<CallLabel> read_split_labels(const fs::path& feature_dir, Split s) {
  if (s == Split::Test) throw Error(Errc::LeakageViolation, "test labels are only readable while evaluating");
  return detail::load_labels(feature_dir, s);
}

inline std::vector<CallLabel> read_split_labels(const fs::path& feature_dir, Split s, const TestLabelAccess&) {
  return detail::load_labels(feature_dir, s);
}

// ---- ingest ----------------------------------------------------------------

struct IngestEntry {
  std::string file;
  std::string call_id;
  bool ok = false;
  std::string error;
  std::size_t raw_turns = 0;
  std::size_t operator_turns_removed = 0;
  std::size_t short_turns_removed = 0;
  std::size_t kept_turns = 0;
  bool has_qa = false;
  std::vector<std::string> notes;
};

struct IngestReport {
  std::vector<IngestEntry> entries;

  std::size_t failed() const {
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const auto& e) { return !e.ok; }));
  }
  /// More than 10% of the input files could not be turned into calls.
  bool too_many_failures() const { return failed() * 10 > entries.size(); }
};

inline nlohmann::json to_json(const IngestReport& r) {
  nlohmann::json j;
  j["files"] = r.entries.size();
  j["failed"] = r.failed();
  std::size_t turns = 0, op = 0, shrt = 0, kept = 0, no_qa = 0;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : r.entries) {
    turns += e.raw_turns;
    op += e.operator_turns_removed;
    shrt += e.short_turns_removed;
    kept += e.kept_turns;
    no_qa += e.ok && !e.has_qa;
    nlohmann::json je = {{"file", e.file}, {"call_id", e.call_id}, {"ok", e.ok}};
    if (!e.ok) je["error"] = e.error;
    else
      je.update({{"raw_turns", e.raw_turns},
                 {"operator_turns_removed", e.operator_turns_removed},
                 {"short_turns_removed", e.short_turns_removed},
                 {"kept_turns", e.kept_turns},
                 {"has_qa", e.has_qa},
                 {"notes", e.notes}});
    j["entries"].push_back(std::move(je));
  }
  j["totals"] = {{"raw_turns", turns},
                 {"operator_turns_removed", op},
                 {"short_turns_removed", shrt},
                 {"kept_turns", kept},
                 {"calls_without_qa", no_qa}};
  return j;
}

inline void write_ingest_text(std::ostream& os, const IngestReport& r) {
  const auto j = to_json(r);
  const auto& t = j["totals"];
  os << "files " << r.entries.size() << ", calls " << r.entries.size() - r.failed() << ", failed " << r.failed() << '\n'
     << "turns " << t["raw_turns"] << ", operator removed " << t["operator_turns_removed"] << ", short removed "
     << t["short_turns_removed"] << ", kept " << t["kept_turns"] << '\n'
     << "calls without a Q&A section " << t["calls_without_qa"] << '\n';
  for (const auto& e : r.entries)
    if (!e.ok) os << "dropped " << e.file << ": " << e.error << '\n';
}

/// Transcript files in a corpus directory: *.json (not *.ann.json) and
/// *.xml, sorted by name.
inline std::vector<fs::path> list_transcripts(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::IoFailure, "corpus directory " + dir.string() + " not found");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string name = e.path().filename().string();
    if (name.ends_with(".ann.json")) continue;
    if (name.ends_with(".json") || name.ends_with(".xml")) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline IngestEntry ingest_file(const fs::path& file, const Annotator& annotator, Call* out) {
  IngestEntry e;
  e.file = file.filename().string();
  e.call_id = file.stem().string();
  try {
    const auto format = file.extension() == ".xml" ? TranscriptFormat::XmlV1 : TranscriptFormat::CanonicalJson;
    const RawTranscript raw = parse_transcript(read_text(file), format, e.call_id);
    std::optional<std::vector<Annotation>> sidecar;
    const fs::path ann = file.parent_path() / (e.call_id + ".ann.json");
    if (fs::exists(ann)) sidecar = parse_annotation_sidecar(read_text(ann));
    BuildReport br;
    Call call = build_call(raw, annotator, sidecar ? &*sidecar : nullptr, &br);
    e.raw_turns = br.raw_turns;
    e.operator_turns_removed = br.operator_turns_removed;
    e.short_turns_removed = br.short_turns_removed;
    e.notes = br.notes;
    e.kept_turns = call.turns.size();
    e.has_qa = call.has_qa_section();
    if (call.turns.empty()) throw Error(Errc::EmptyCall, "no turns left after filtering");
    *out = std::move(call);
    e.ok = true;
  } catch (const std::exception& ex) {
    e.ok = false;
    e.error = ex.what();
  }
  return e;
}

inline IngestReport cmd_ingest(const RunConfig& cfg, std::ostream& log) {
  LabelAudit::Stage stage("ingest");
  const WorkDir work{cfg.out_dir};
  const auto files = list_transcripts(cfg.corpus_dir);
  const RuleAnnotator annotator;
  std::vector<Call> calls(files.size());
  IngestReport report;
  report.entries.resize(files.size());
  parallel_for(files.size(), cfg.threads, [&](std::size_t i) { report.entries[i] = ingest_file(files[i], annotator, &calls[i]); });

  std::set<std::string> ids;
  for (auto& e : report.entries)
    if (e.ok && !ids.insert(e.call_id).second) {
      e.ok = false;
      e.error = std::string(to_string(Errc::MalformedInput)) + ": duplicate call id " + e.call_id;
    }

  fs::remove_all(work.annotated());
  fs::create_directories(work.annotated());
  for (std::size_t i = 0; i < files.size(); ++i)
    if (report.entries[i].ok) write_text(work.annotated() / (calls[i].id + ".json"), call_to_json(calls[i]).dump() + "\n");
  write_text(work.reports() / "ingest.json", to_json(report).dump(2) + "\n");
  std::ostringstream txt;
  write_ingest_text(txt, report);
  write_text(work.reports() / "ingest.txt", txt.str());
  log << txt.str();
  return report;
}

inline std::vector<Call> load_annotated(const WorkDir& work) {
  if (!fs::is_directory(work.annotated()))
    throw Error(Errc::MissingFeatures, "no annotated corpus in " + work.root.string() + "; run ingest first");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(work.annotated()))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<Call> calls;
  for (const auto& f : files) {
    try {
      calls.push_back(call_from_json(nlohmann::json::parse(read_text(f))));
    } catch (const nlohmann::json::exception& ex) {
      throw Error(Errc::MalformedInput, f.string() + ": " + ex.what());
    }
  }
  if (calls.empty()) throw Error(Errc::MissingFeatures, "annotated corpus is empty; run ingest first");
  return calls;
}

// ---- correlate -------------------------------------------------------------

struct CorrelateOutcome {
  StudyResult study;
  std::size_t question_turns = 0;  // analyst turns in Q&A sections
  std::size_t matched = 0;         // of those, with a prior rating
};

/// Question turns paired with the asking analyst's latest rating before the
/// call. Analysts are matched on speaker name.
inline std::vector<StudyObservation> study_observations(std::span<const Call> calls, const RatingIndex& ratings,
                                                        const LexiconSet& lex, std::size_t threads,
                                                        std::size_t* question_turns = nullptr) {
  std::vector<std::vector<StudyObservation>> per_call(calls.size());
  std::vector<std::size_t> asked(calls.size(), 0);
  parallel_for(calls.size(), threads, [&](std::size_t i) {
    const Call& c = calls[i];
    for (const auto& t : c.turns) {
      if (t.speaker_type != SpeakerType::Analyst || t.section != Section::QA) continue;
      ++asked[i];
      const auto rating = ratings.before(t.speaker_name, c.ticker, c.datetime);
      if (!rating) continue;
      per_call[i].push_back({extract_pragmatic_vector(t, lex), stance_from_rating(*rating)});
    }
  });
  std::vector<StudyObservation> out;
  for (auto& v : per_call) out.insert(out.end(), v.begin(), v.end());
  if (question_turns) *question_turns = std::accumulate(asked.begin(), asked.end(), std::size_t{0});
  return out;
}

inline std::vector<RatingRecord> load_ratings(const fs::path& p) {
  std::istringstream in(read_text(p));
  return read_ratings(in);
}

inline CorrelateOutcome cmd_correlate(const RunConfig& cfg, std::ostream& log) {
  LabelAudit::Stage stage("correlate");
  const WorkDir work{cfg.out_dir};
  const auto calls = load_annotated(work);
  const auto rating_rows = load_ratings(cfg.ratings_csv);
  const RatingIndex ratings(rating_rows);
  const LexiconSet lex = load_lexicon_set(cfg.lexicon_dir);
  CorrelateOutcome out;
  const auto obs = study_observations(calls, ratings, lex, cfg.threads, &out.question_turns);
  out.matched = obs.size();
  if (obs.empty()) throw Error(Errc::InsufficientData, "no question turn has a prior rating from its analyst");
  out.study = run_study(obs, cfg.alpha);
  std::ostringstream c, t;
  write_study_csv(c, out.study);
  write_study_table(t, out.study);
  write_text(work.reports() / "correlation.csv", c.str());
  write_text(work.reports() / "correlation.txt", t.str());
  log << out.matched << " of " << out.question_turns << " question turns matched a prior rating\n" << t.str();
  return out;
}

// ---- featurize -------------------------------------------------------------

struct SplitRows {
  std::array<std::vector<std::size_t>, 3> rows;  // indices into the call list, per split
  std::vector<std::string> no_qa;                // dropped under QAOnly
  std::vector<std::string> unlabeled;
  std::vector<std::string> out_of_range;         // year outside every split
};

inline std::optional<Split> split_of(const RunConfig& cfg, Timestamp t) {
  const int y = year_of(t);
  if (cfg.train.contains(y)) return Split::Train;
  if (cfg.validation.contains(y)) return Split::Validation;
  if (cfg.test.contains(y)) return Split::Test;
  return std::nullopt;
}

inline SplitRows assign_splits(const RunConfig& cfg, std::span<const Call> calls,
                               const std::map<std::string, CallLabel>& labels, Scope scope) {
  SplitRows s;
  for (std::size_t i = 0; i < calls.size(); ++i) {
    const auto split = split_of(cfg, calls[i].datetime);
    if (!split) s.out_of_range.push_back(calls[i].id);
    else if (scope == Scope::QAOnly && !calls[i].has_qa_section()) s.no_qa.push_back(calls[i].id);
    else if (!labels.contains(calls[i].id)) s.unlabeled.push_back(calls[i].id);
    else s.rows[static_cast<std::size_t>(*split)].push_back(i);
  }
  return s;
}

inline void write_matrix(const fs::path& dir, const std::string& stem, const FeatureMatrix& m) {
  std::ostringstream t;
  write_triplets(t, m);
  write_text(dir / (stem + ".csv"), t.str());
  write_text(dir / (stem + ".manifest.json"), manifest_json(m).dump(1) + "\n");
}

inline FeatureMatrix read_matrix(const fs::path& dir, const std::string& stem) {
  const fs::path mf = dir / (stem + ".manifest.json");
  std::istringstream t(read_text(dir / (stem + ".csv"), Errc::MissingFeatures));
  return read_feature_matrix(t, nlohmann::json::parse(read_text(mf, Errc::MissingFeatures)));
}

struct FeaturizeOutcome {
  std::array<std::size_t, 3> rows{};
  SplitRows splits;
  std::size_t vocabulary = 0;
};

inline std::vector<PriceTargetRecord> load_targets(const fs::path& p) {
  std::istringstream in(read_text(p));
  return read_price_targets(in);
}

inline std::vector<MarketSnapshot> load_market(const fs::path& p) {
  std::istringstream in(read_text(p));
  return read_market_csv(in);
}

inline FeaturizeOutcome cmd_featurize(const RunConfig& cfg, std::ostream& log) {
  LabelAudit::Stage stage("featurize");
  const WorkDir work{cfg.out_dir};
  const auto calls = load_annotated(work);
  const auto targets = load_targets(cfg.targets_csv);
  const auto snapshots = load_market(cfg.market_csv);
  const MarketIndex market(snapshots);
  const LexiconSet lex = load_lexicon_set(cfg.lexicon_dir);

  std::vector<CallKey> keys;
  for (const auto& c : calls) keys.push_back({c.id, c.ticker, c.datetime});
  std::map<std::string, CallLabel> labels;
  for (auto& l : build_labels(keys, targets)) labels.emplace(l.call_id, l);

  FeaturizeOutcome out;
  out.splits = assign_splits(cfg, calls, labels, cfg.scope);
  std::vector<CallFeatures> feats(calls.size());
  parallel_for(calls.size(), cfg.threads, [&](std::size_t i) {
    feats[i].call = &calls[i];
    feats[i].market = market.prior_to(calls[i].ticker, calls[i].datetime);
    if (cfg.scope == Scope::WholeDoc || calls[i].has_qa_section())
      feats[i].pragmatic = aggregate_pragmatics(calls[i], lex, cfg.scope);
  });
  auto take = [&](Split s) {
    std::vector<CallFeatures> v;
    for (std::size_t i : out.splits.rows[static_cast<std::size_t>(s)]) v.push_back(feats[i]);
    return v;
  };
  const auto train = take(Split::Train);
  if (train.empty()) throw Error(Errc::InsufficientData, "training split has no labeled calls");
  const FeaturizerState state = fit_featurizer(train, cfg.scope);
  out.vocabulary = state.vocab.size();

  const fs::path dir = work.features(cfg.scope);
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_text(dir / "featurizer.json", featurizer_to_json(state).dump(1) + "\n");
  for (Split s : kSplits) {
    const auto rows = take(s);
    const std::string name(to_string(s));
    const FeatureBlocks b = transform_features(rows, state);
    write_matrix(dir, name + ".market", b.market);
    write_matrix(dir, name + ".bow", b.bow);
    write_matrix(dir, name + ".pragmatic", b.pragmatic);
    std::vector<CallLabel> ls;
    std::ostringstream sectors;
    sectors << "call_id,sector\n";
    for (const auto& r : rows) {
      ls.push_back(labels.at(r.call->id));
      sectors << csv::row({r.call->id, r.call->sector}) << '\n';
    }
    std::ostringstream lc;
    write_labels(lc, ls);
    LabelAudit::instance().record(s, "write");
    write_text(labels_path(dir, s), lc.str());
    write_text(dir / (name + ".sectors.csv"), sectors.str());
    out.rows[static_cast<std::size_t>(s)] = rows.size();
  }
  const nlohmann::json rep = {{"scope", std::string(to_string(cfg.scope))},
                              {"train_years", to_string(cfg.train)},
                              {"validation_years", to_string(cfg.validation)},
                              {"test_years", to_string(cfg.test)},
                              {"rows", {{"train", out.rows[0]}, {"validation", out.rows[1]}, {"test", out.rows[2]}}},
                              {"vocabulary", out.vocabulary},
                              {"excluded_no_qa", out.splits.no_qa},
                              {"excluded_unlabeled", out.splits.unlabeled},
                              {"excluded_out_of_range", out.splits.out_of_range}};
  write_text(dir / "report.json", rep.dump(2) + "\n");
  log << "scope " << to_string(cfg.scope) << ": train " << out.rows[0] << ", validation " << out.rows[1] << ", test "
      << out.rows[2] << " calls; vocabulary " << out.vocabulary << '\n'
      << "excluded: " << out.splits.no_qa.size() << " without Q&A, " << out.splits.unlabeled.size()
      << " without labels, " << out.splits.out_of_range.size() << " outside the split years\n";
  return out;
}

/// Design matrix of one feature set on one split.
inline FeatureMatrix load_design(const fs::path& feature_dir, FeatureSet set, Split s) {
  const std::string name(to_string(s));
  switch (set) {
    case FeatureSet::Market: return read_matrix(feature_dir, name + ".market");
    case FeatureSet::BOW: return read_matrix(feature_dir, name + ".bow");
    case FeatureSet::Pragmatic: return read_matrix(feature_dir, name + ".pragmatic");
    case FeatureSet::Fusion: {
      const auto b = read_matrix(feature_dir, name + ".bow");
      const auto p = read_matrix(feature_dir, name + ".pragmatic");
      return hstack({&b, &p});
    }
    case FeatureSet::Ensemble: break;
  }
  throw Error(Errc::InvalidArgument, "the ensemble has no design matrix of its own");
}

inline void check_rows(const FeatureMatrix& m, std::span<const CallLabel> labels) {
  if (m.rows() != labels.size()) throw Error(Errc::LengthMismatch, "feature rows and labels differ in count");
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (m.row_ids[i] != labels[i].call_id) throw Error(Errc::MalformedInput, "feature rows and labels are misaligned");
}

inline Vector label_values(std::span<const CallLabel> ls) {
  Vector y(static_cast<Eigen::Index>(ls.size()));
  for (std::size_t i = 0; i < ls.size(); ++i) y[static_cast<Eigen::Index>(i)] = ls[i].y;
  return y;
}

inline std::vector<int> label_classes(std::span<const CallLabel> ls) {
  std::vector<int> c;
  for (const auto& l : ls) c.push_back(l.c);
  return c;
}

// ---- train -----------------------------------------------------------------

/// Any trained model behind one interface: scalar predictions for
/// regression, class probabilities for classification.
struct TrainedModel {
  FeatureSet set = FeatureSet::BOW;
  Task task = Task::Regression;
  std::optional<RidgeModel> ridge;
  std::optional<LogisticModel> logistic;
  std::optional<StackedModel> stacked;
};

inline void require_trainable(const RunConfig& cfg) {
  if (cfg.task == Task::Correlation)
    throw Error(Errc::InvalidArgument, "the correlation task has no model; use the correlate command");
}

inline void save_model(const fs::path& p, const TrainedModel& m) {
  std::ostringstream os;
  if (m.ridge) write_model(os, *m.ridge);
  else if (m.logistic) write_model(os, *m.logistic);
  else write_model(os, *m.stacked);
  write_text(p, os.str());
}

inline TrainedModel load_model(const WorkDir& work, FeatureSet set, Scope scope, Task task) {
  const fs::path p = work.model(set, scope, task);
  if (!fs::exists(p)) throw Error(Errc::ModelNotFound, "no trained model " + WorkDir::cell(set, scope, task));
  std::istringstream in(read_text(p));
  TrainedModel m{set, task, {}, {}, {}};
  if (set == FeatureSet::Ensemble) m.stacked = read_stacked(in);
  else if (task == Task::Regression) m.ridge = read_ridge(in);
  else m.logistic = read_logistic(in);
  return m;
}

/// Model outputs on one split: predictions (n) or probabilities (n x 3).
inline Matrix model_outputs(const TrainedModel& m, const WorkDir& work, Scope scope, Split s) {
  const fs::path dir = work.features(scope);
  if (m.stacked) {
    std::vector<Matrix> parts;
    for (const auto& b : m.stacked->bases)
      parts.push_back(model_outputs(load_model(work, parse_feature_set(b), scope, m.task), work, scope, s));
    Matrix meta(parts.front().rows(), static_cast<Eigen::Index>(parts.size()) * parts.front().cols());
    for (std::size_t k = 0; k < parts.size(); ++k)
      meta.middleCols(static_cast<Eigen::Index>(k) * parts[k].cols(), parts[k].cols()) = parts[k];
    if (m.task == Task::Regression) return m.stacked->predict_values(meta);
    return m.stacked->predict_proba(meta);
  }
  const FeatureMatrix X = load_design(dir, m.set, s);
  const std::uint64_t h = manifest_hash(X.columns);
  if ((m.ridge && m.ridge->column_hash != h) || (m.logistic && m.logistic->column_hash != h))
    throw Error(Errc::MissingFeatures, "features changed since " + std::string(to_string(m.set)) +
                                           " was trained; retrain");
  if (m.ridge) return m.ridge->predict(X.X);
  return m.logistic->predict_proba(X.X);
}

inline std::vector<int> argmax_classes(const Matrix& p) {
  std::vector<int> out(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    Eigen::Index k = 0;
    p.row(i).maxCoeff(&k);
    out[static_cast<std::size_t>(i)] = kClasses[static_cast<std::size_t>(k)];
  }
  return out;
}

inline double validation_score(Task task, const Matrix& out, std::span<const CallLabel> labels) {
  if (labels.empty()) return 0.0;
  if (task == Task::Regression) {
    double s = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const double d = out(static_cast<Eigen::Index>(i), 0) - labels[i].y;
      s += d * d;
    }
    return s / static_cast<double>(labels.size());
  }
  const auto pred = argmax_classes(out);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) ok += pred[i] == labels[i].c;
  return static_cast<double>(ok) / static_cast<double>(labels.size());
}

struct TrainOutcome {
  TrainedModel model;
  double best = 0.0;  // alpha or C; 0 for a stacked model
  double validation = 0.0;  // MSE or accuracy
  bool converged = true;
};

inline TrainOutcome cmd_train(const RunConfig& cfg, std::ostream& log) {
  LabelAudit::Stage stage("train");
  require_trainable(cfg);
  const WorkDir work{cfg.out_dir};
  const fs::path dir = work.features(cfg.scope);
  if (!fs::exists(dir / "featurizer.json"))
    throw Error(Errc::MissingFeatures, "no features for scope " + std::string(to_string(cfg.scope)) + "; run featurize");
  const auto train_labels = read_split_labels(dir, Split::Train);
  const auto val_labels = read_split_labels(dir, Split::Validation);

  TrainOutcome out;
  out.model.set = cfg.features;
  out.model.task = cfg.task;
  nlohmann::json summary = {{"features", std::string(to_string(cfg.features))},
                            {"scope", std::string(to_string(cfg.scope))},
                            {"task", std::string(to_string(cfg.task))},
                            {"seed", cfg.seed},
                            {"train_rows", train_labels.size()},
                            {"validation_rows", val_labels.size()}};

  if (cfg.features == FeatureSet::Ensemble) {
    if (val_labels.size() < cfg.folds)
      throw Error(Errc::InsufficientData, "validation split is too small to tune the ensemble");
    std::vector<std::string> names;
    std::vector<Matrix> parts;
    for (FeatureSet b : ensemble_bases()) {
      const TrainedModel base = load_model(work, b, cfg.scope, cfg.task);
      names.emplace_back(to_string(b));
      parts.push_back(model_outputs(base, work, cfg.scope, Split::Validation));
    }
    Matrix meta(parts.front().rows(), static_cast<Eigen::Index>(parts.size()) * parts.front().cols());
    for (std::size_t k = 0; k < parts.size(); ++k)
      meta.middleCols(static_cast<Eigen::Index>(k) * parts[k].cols(), parts[k].cols()) = parts[k];
    if (cfg.task == Task::Regression) {
      const GridSearchPlan plan{default_ridge_grid(), cfg.folds, cfg.sub("stack-folds")};
      out.model.stacked = stack_regression(names, meta, label_values(val_labels), plan);
    } else {
      const GridSearchPlan plan{default_logistic_grid(), cfg.folds, cfg.sub("stack-folds")};
      const auto classes = label_classes(val_labels);
      out.model.stacked = stack_classification(names, meta, classes, plan);
      if (!out.model.stacked->degenerate) out.converged = out.model.stacked->logistic.converged;
    }
    summary["bases"] = names;
    summary["degenerate"] = out.model.stacked->degenerate;
  } else {
    const FeatureMatrix X = load_design(dir, cfg.features, Split::Train);
    check_rows(X, train_labels);
    if (train_labels.size() < cfg.folds) throw Error(Errc::InsufficientData, "fewer training rows than folds");
    const std::uint64_t hash = manifest_hash(X.columns);
    if (cfg.task == Task::Regression) {
      const GridSearchPlan plan{default_ridge_grid(), cfg.folds, cfg.sub("folds")};
      auto res = ridge_grid_search(X.X, label_values(train_labels), plan);
      res.model.column_hash = hash;
      out.best = res.best;
      out.model.ridge = res.model;
      summary["grid"] = res.grid;
      summary["cv_mse"] = res.scores;
      summary["alpha"] = res.best;
    } else {
      const GridSearchPlan plan{default_logistic_grid(), cfg.folds, cfg.sub("folds")};
      const auto classes = label_classes(train_labels);
      auto res = logistic_grid_search(X.X, classes, plan);
      res.model.column_hash = hash;
      out.best = res.best;
      out.converged = res.model.converged;
      out.model.logistic = res.model;
      summary["grid"] = res.grid;
      summary["cv_accuracy"] = res.scores;
      summary["C"] = res.best;
      summary["converged"] = res.model.converged;
      summary["iterations"] = res.model.iterations;
      summary["grad_norm"] = res.model.grad_norm;
    }
    summary["columns"] = X.cols();
  }

  if (!val_labels.empty()) {
    const Matrix vo = model_outputs(out.model, work, cfg.scope, Split::Validation);
    out.validation = validation_score(cfg.task, vo, val_labels);
  }
  summary[cfg.task == Task::Regression ? "validation_mse" : "validation_accuracy"] = out.validation;
  save_model(work.model(cfg.features, cfg.scope, cfg.task), out.model);
  write_text(work.models() / (WorkDir::cell(cfg.features, cfg.scope, cfg.task) + ".json"), summary.dump(2) + "\n");
  log << "trained " << WorkDir::cell(cfg.features, cfg.scope, cfg.task) << ": validation "
      << (cfg.task == Task::Regression ? "MSE " : "accuracy ") << out.validation << '\n';
  if (!out.converged) log << "warning: logistic regression hit the iteration limit (NonConvergence)\n";
  return out;
}

// ---- evaluate --------------------------------------------------------------

struct EvalReport {
  FeatureSet features = FeatureSet::BOW;
  Scope scope = Scope::WholeDoc;
  Task task = Task::Classification;
  std::size_t rows = 0;
  RegressionMetrics regression;
  ClassificationMetrics classification;
  double baseline = 0.0;  // training-mean MSE or majority accuracy on test
  std::vector<SectorScore> sectors;
  std::vector<ResultRow> baselines;
  std::size_t excluded_no_qa = 0;
};

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j = {{"features", std::string(to_string(r.features))},
                      {"scope", std::string(to_string(r.scope))},
                      {"task", std::string(to_string(r.task))},
                      {"rows", r.rows},
                      {"baseline", r.baseline},
                      {"excluded_no_qa", r.excluded_no_qa}};
  if (r.task == Task::Regression) j.update({{"mse", r.regression.mse}, {"r2", r.regression.r2}, {"pct_err", r.regression.pct_err}});
  else
    j.update({{"accuracy", r.classification.accuracy},
              {"macro_f1", r.classification.macro_f1},
              {"pct_err", r.classification.pct_err}});
  j["per_sector"] = nlohmann::json::array();
  for (const auto& s : r.sectors)
    j["per_sector"].push_back({{"sector", s.sector}, {"support", s.support}, {"accuracy", s.accuracy()}});
  j["baselines"] = nlohmann::json::array();
  for (const auto& b : r.baselines)
    j["baselines"].push_back({{"model", b.model}, {"primary", b.primary}, {"secondary", b.secondary}, {"pct_err", b.pct_err}});
  return j;
}

inline std::string model_label(FeatureSet f, Task t) {
  if (f == FeatureSet::Ensemble) return "Ens.";
  return t == Task::Regression ? "RR" : "LR";
}

inline ResultRow result_row(const nlohmann::json& j) {
  ResultRow r;
  const Task task = parse_task(j.at("task").get<std::string>());
  r.features = j.at("features").get<std::string>();
  r.model = model_label(parse_feature_set(r.features), task);
  r.scope = j.at("scope").get<std::string>();
  r.task = std::string(to_string(task));
  r.primary = j.at(task == Task::Regression ? "mse" : "accuracy").get<double>();
  r.secondary = j.at(task == Task::Regression ? "r2" : "macro_f1").get<double>();
  r.pct_err = j.at("pct_err").get<double>();
  return r;
}

/// Trivial predictors scored on the test rows; the random ones are averaged
/// over ten seeds.
inline std::vector<ResultRow> baseline_rows(Task task, Scope scope, const TrainStats& st,
                                            std::span<const CallLabel> test, double baseline, std::uint64_t seed) {
  std::vector<ResultRow> rows;
  const std::string sc(to_string(scope)), tk(to_string(task));
  const std::size_t n = test.size();
  if (task == Task::Regression) {
    const Vector yv = label_values(test);
    const std::vector<double> y(yv.data(), yv.data() + yv.size());
    auto add = [&](std::string name, const std::vector<double>& p) {
      const auto m = regression_metrics(y, p, baseline);
      rows.push_back({"--", std::move(name), sc, tk, m.mse, m.r2, m.pct_err, true});
    };
    add("Predict 0", predict_zero(n));
    add("Train mean", predict_train_mean(st, n));
    RegressionMetrics avg;
    for (std::size_t k = 0; k < kBaselineSeeds; ++k) {
      const auto m = regression_metrics(y, predict_random_gaussian(st, n, seed + k), baseline);
      avg.mse += m.mse / kBaselineSeeds;
      avg.r2 += m.r2 / kBaselineSeeds;
      avg.pct_err += m.pct_err / kBaselineSeeds;
    }
    rows.push_back({"--", "Random (10 seeds)", sc, tk, avg.mse, avg.r2, avg.pct_err, true});
  } else {
    const auto y = label_classes(test);
    const auto m = classification_metrics(y, predict_majority(st, n), baseline);
    rows.push_back({"--", "Majority class", sc, tk, m.accuracy, m.macro_f1, m.pct_err, true});
    ClassificationMetrics avg;
    for (std::size_t k = 0; k < kBaselineSeeds; ++k) {
      const auto r = classification_metrics(y, predict_random_class(n, seed + k), baseline);
      avg.accuracy += r.accuracy / kBaselineSeeds;
      avg.macro_f1 += r.macro_f1 / kBaselineSeeds;
      avg.pct_err += r.pct_err / kBaselineSeeds;
    }
    rows.push_back({"--", "Random (10 seeds)", sc, tk, avg.accuracy, avg.macro_f1, avg.pct_err, true});
  }
  return rows;
}

inline EvalReport cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
  LabelAudit::Stage stage("evaluate");
  require_trainable(cfg);
  const WorkDir work{cfg.out_dir};
  const fs::path dir = work.features(cfg.scope);
  const TrainedModel model = load_model(work, cfg.features, cfg.scope, cfg.task);
  const auto train = read_split_labels(dir, Split::Train);
  const auto test = read_split_labels(dir, Split::Test, TestLabelAccess{});
  if (test.empty()) throw Error(Errc::InsufficientData, "test split has no labeled calls");

  EvalReport r;
  r.features = cfg.features;
  r.scope = cfg.scope;
  r.task = cfg.task;
  r.rows = test.size();
  const auto feat_report = nlohmann::json::parse(read_text(dir / "report.json", Errc::MissingFeatures));
  r.excluded_no_qa = feat_report.at("excluded_no_qa").size();

  const Matrix out = model_outputs(model, work, cfg.scope, Split::Test);
  if (static_cast<std::size_t>(out.rows()) != test.size())
    throw Error(Errc::LengthMismatch, "test features and labels differ in count");
  const Vector train_y = label_values(train);
  const TrainStats st = train_stats(std::span<const double>(train_y.data(), static_cast<std::size_t>(train_y.size())),
                                    label_classes(train));
  const std::uint64_t seed = cfg.sub("baselines");

  if (cfg.task == Task::Regression) {
    const Vector yv = label_values(test);
    const std::vector<double> y(yv.data(), yv.data() + yv.size());
    const std::vector<double> mean_pred = predict_train_mean(st, test.size());
    r.baseline = regression_metrics(y, mean_pred, 1.0).mse;
    if (!(r.baseline > 0.0)) throw Error(Errc::InsufficientData, "test labels equal the training mean; no baseline");
    const std::vector<double> pred(out.data(), out.data() + out.rows());
    r.regression = regression_metrics(y, pred, r.baseline);
  } else {
    const auto y = label_classes(test);
    r.baseline = classification_metrics(y, predict_majority(st, test.size()), 1.0).accuracy;
    if (!(r.baseline > 0.0)) throw Error(Errc::InsufficientData, "majority class never occurs in the test split");
    const auto pred = argmax_classes(out);
    r.classification = classification_metrics(y, pred, r.baseline);
    std::istringstream sector_in(read_text(dir / "test.sectors.csv", Errc::MissingFeatures));
    const auto sectors = csv::read(sector_in, {"call_id", "sector"});
    std::vector<std::string> sec;
    for (const auto& row : sectors.rows) sec.push_back(row[sectors.column("sector")]);
    r.sectors = sector_breakdown(sec, y, pred);
  }
  r.baselines = baseline_rows(cfg.task, cfg.scope, st, test, r.baseline, seed);

  const std::string cell = WorkDir::cell(cfg.features, cfg.scope, cfg.task);
  write_text(work.reports() / ("eval_" + cell + ".json"), to_json(r).dump(2) + "\n");
  if (cfg.task == Task::Classification) {
    std::ostringstream c, t;
    write_sector_csv(c, r.sectors);
    write_sector_chart(t, r.sectors);
    write_text(work.reports() / ("sectors_" + cell + ".csv"), c.str());
    write_text(work.reports() / ("sectors_" + cell + ".txt"), t.str());
  }
  std::vector<ResultRow> rows = {result_row(to_json(r))};
  rows.insert(rows.end(), r.baselines.begin(), r.baselines.end());
  write_results_table(log, rows);
  if (cfg.scope == Scope::QAOnly && r.excluded_no_qa)
    log << r.excluded_no_qa << " calls without a Q&A section were excluded\n";
  return r;
}

// ---- report ----------------------------------------------------------------

/// Collects every evaluation in the work directory into one table; baseline
/// rows are listed once per (task, scope).
inline std::vector<ResultRow> cmd_report(const RunConfig& cfg, std::ostream& log) {
  LabelAudit::Stage stage("report");
  const WorkDir work{cfg.out_dir};
  std::vector<fs::path> files;
  if (fs::is_directory(work.reports()))
    for (const auto& e : fs::directory_iterator(work.reports())) {
      const auto name = e.path().filename().string();
      if (name.starts_with("eval_") && name.ends_with(".json")) files.push_back(e.path());
    }
  if (files.empty()) throw Error(Errc::ModelNotFound, "no evaluations found; run evaluate first");
  std::sort(files.begin(), files.end());

  std::map<std::pair<std::string, std::string>, std::vector<ResultRow>> models, baselines;
  for (const auto& f : files) {
    const auto j = nlohmann::json::parse(read_text(f));
    const ResultRow row = result_row(j);
    const auto key = std::pair{row.task, row.scope};
    models[key].push_back(row);
    if (!baselines.contains(key))
      for (const auto& b : j.at("baselines"))
        baselines[key].push_back({"--", b.at("model").get<std::string>(), row.scope, row.task, b.at("primary").get<double>(),
                                  b.at("secondary").get<double>(), b.at("pct_err").get<double>(), true});
  }
  const std::vector<std::string> order = {"market", "bow", "pragmatic", "fusion", "ensemble"};
  auto rank = [&](const std::string& f) { return std::find(order.begin(), order.end(), f) - order.begin(); };
  std::vector<ResultRow> rows;
  for (auto& [key, ms] : models) {
    std::stable_sort(ms.begin(), ms.end(), [&](const auto& a, const auto& b) { return rank(a.features) < rank(b.features); });
    rows.insert(rows.end(), baselines[key].begin(), baselines[key].end());
    rows.insert(rows.end(), ms.begin(), ms.end());
  }
  std::ostringstream c, t;
  write_results_csv(c, rows);
  write_results_table(t, rows);
  write_text(work.reports() / "results.csv", c.str());
  write_text(work.reports() / "results.txt", t.str());
  log << t.str();
  return rows;
}

// ---- synth -----------------------------------------------------------------

inline SynthCorpus cmd_synth(const RunConfig& cfg, std::ostream& log) {
  SynthParams p = cfg.synth;
  p.seed = cfg.seed;
  SynthCorpus c = generate_corpus(p);
  fs::remove_all(cfg.synth_dir / "corpus");
  write_corpus(c, cfg.synth_dir);
  log << "wrote " << c.transcripts.size() << " calls, " << c.ratings.size() << " ratings, " << c.targets.size()
      << " price targets and " << c.market.size() << " market rows to " << cfg.synth_dir.string() << '\n';
  return c;
}

}  // namespace ecall
