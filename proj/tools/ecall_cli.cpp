// ecall: command-line driver for the earnings-call analysis pipeline.
//
// Settings come from built-in defaults, then an optional --config file of
// `key = value` lines, then command-line flags (named flags and --set).

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ecall/pipeline.hpp"

namespace {

constexpr int kExitError = 1;
constexpr int kExitIngestFailures = 3;

struct Flags {
  std::string config;
  std::vector<std::string> sets;
  std::map<std::string, std::string> named;  // config key -> value
};

/// Registers a flag that maps onto a configuration key.
CLI::Option* keyed(CLI::App* cmd, Flags& f, const std::string& flag, const std::string& key, const std::string& help) {
  return cmd->add_option_function<std::string>(
      flag, [&f, key](const std::string& v) { f.named[key] = v; }, help);
}

void common_options(CLI::App* cmd, Flags& f) {
  cmd->add_option("-c,--config", f.config, "configuration file (key = value lines)");
  cmd->add_option("--set", f.sets, "override any configuration key, as key=value");
  keyed(cmd, f, "--out", "out", "work directory");
  keyed(cmd, f, "--threads", "threads", "worker threads (0 = all cores)");
  cmd->add_flag_function(
      "--audit", [&f](std::int64_t) { f.named["audit"] = "true"; }, "log label access and fail on test-label leakage");
}

void data_options(CLI::App* cmd, Flags& f) {
  keyed(cmd, f, "--corpus", "corpus", "directory of transcript files");
  keyed(cmd, f, "--lexicons", "lexicons", "lexicon directory");
  keyed(cmd, f, "--market", "market", "market snapshot CSV");
  keyed(cmd, f, "--ratings", "ratings", "analyst rating CSV");
  keyed(cmd, f, "--targets", "targets", "price target CSV");
  keyed(cmd, f, "--train-years", "train_years", "training years, e.g. 2010-2015");
  keyed(cmd, f, "--validation-years", "validation_years", "validation years");
  keyed(cmd, f, "--test-years", "test_years", "test years");
}

void model_options(CLI::App* cmd, Flags& f, bool required) {
  keyed(cmd, f, "--seed", "seed", "random seed")->required(required);
  keyed(cmd, f, "--scope", "scope", "wd (whole document) or qa (Q&A only)")->required(required);
  keyed(cmd, f, "--task", "task", "regression or classification")->required(required);
  keyed(cmd, f, "--features", "features", "market, bow, pragmatic, fusion or ensemble")->required(required);
  keyed(cmd, f, "--folds", "folds", "cross-validation folds");
}

ecall::RunConfig resolve(const Flags& f) {
  ecall::RunConfig cfg;
  if (!f.config.empty()) cfg = ecall::load_config(f.config);
  for (const auto& [k, v] : f.named) cfg.set(k, v);
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ecall::Error(ecall::Errc::InvalidArgument, "--set expects key=value, got '" + s + "'");
    cfg.set(s.substr(0, eq), s.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Earnings-call pragmatics and price-target prediction"};
  app.require_subcommand(1);
  Flags f;

  auto* ingest = app.add_subcommand("ingest", "parse, annotate and filter transcripts");
  auto* correlate = app.add_subcommand("correlate", "correlate question-turn features with analyst stance");
  auto* featurize = app.add_subcommand("featurize", "build labels and feature matrices per split");
  auto* train = app.add_subcommand("train", "fit one model with cross-validated grid search");
  auto* evaluate = app.add_subcommand("evaluate", "score a trained model on the test split");
  auto* report = app.add_subcommand("report", "collect evaluations into one results table");
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with planted effects");

  for (auto* cmd : {ingest, correlate, featurize, train, evaluate, report, synth}) common_options(cmd, f);
  for (auto* cmd : {ingest, correlate, featurize}) data_options(cmd, f);
  keyed(correlate, f, "--alpha", "alpha", "family-wise significance level");
  keyed(featurize, f, "--scope", "scope", "wd (whole document) or qa (Q&A only)");
  model_options(train, f, true);
  model_options(evaluate, f, true);
  keyed(synth, f, "--seed", "seed", "random seed");
  keyed(synth, f, "--synth-out", "synth.out", "output directory");
  keyed(synth, f, "--calls", "synth.calls", "number of calls");
  keyed(synth, f, "--signal", "synth.signal", "probability that answer cues reflect the label (0-1)");
  keyed(synth, f, "--sentiment", "synth.sentiment", "stance effect on question sentiment (0-1)");
  keyed(synth, f, "--class-balance", "synth.class_balance", "class weights for -1,0,1");

  CLI11_PARSE(app, argc, argv);

  try {
    const ecall::RunConfig cfg = resolve(f);
    auto& audit = ecall::LabelAudit::instance();
    audit.enable(cfg.audit);
    int rc = 0;
    if (ingest->parsed()) {
      if (ecall::cmd_ingest(cfg, std::cout).too_many_failures()) {
        std::cerr << "error: more than 10% of transcript files failed\n";
        rc = kExitIngestFailures;
      }
    } else if (correlate->parsed()) {
      ecall::cmd_correlate(cfg, std::cout);
    } else if (featurize->parsed()) {
      ecall::cmd_featurize(cfg, std::cout);
    } else if (train->parsed()) {
      ecall::cmd_train(cfg, std::cout);
    } else if (evaluate->parsed()) {
      ecall::cmd_evaluate(cfg, std::cout);
    } else if (report->parsed()) {
      ecall::cmd_report(cfg, std::cout);
    } else if (synth->parsed()) {
      ecall::cmd_synth(cfg, std::cout);
    }
    if (cfg.audit)
      for (const auto& line : audit.log()) std::cerr << "audit: " << line << '\n';
    return rc;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
}
