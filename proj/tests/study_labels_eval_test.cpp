#include <algorithm>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "ecall/eval.hpp"
#include "ecall/labels.hpp"
#include "ecall/study.hpp"
#include "oracles.hpp"

using namespace ecall;

namespace {

Timestamp at(const char* s) { return parse_timestamp(s); }

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

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace

// ---- Pearson ---------------------------------------------------------------------

TEST(Pearson, PerfectCorrelations) {
  const std::vector<double> up = {1, 2, 3}, down = {3, 2, 1};
  const auto a = pearson(up, up);
  EXPECT_DOUBLE_EQ(a.r, 1.0);
  EXPECT_EQ(a.p, 0.0);
  EXPECT_DOUBLE_EQ(pearson(up, down).r, -1.0);
}

TEST(Pearson, MatchesTextbookFormula) {
  const std::vector<double> x = {1, 2, 3, 4, 5}, y = {2, 1, 4, 3, 6};
  const auto res = pearson(x, y);
  EXPECT_NEAR(res.r, oracle::pearson_r(x, y), 1e-12);
  EXPECT_NEAR(res.r, 10.0 / std::sqrt(148.0), 1e-12);
  EXPECT_NEAR(res.p, oracle::correlation_p(res.r, 5), 1e-12);
  EXPECT_EQ(res.n, 5u);
}

TEST(Pearson, RandomPairsAgainstOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(3, 200)(rng);
    auto x = gaussian(rng, n), y = gaussian(rng, n);
    for (std::size_t i = 0; i < n; ++i) y[i] += 0.3 * x[i];
    const auto res = pearson(x, y);
    EXPECT_NEAR(res.r, oracle::pearson_r(x, y), 1e-12);
    EXPECT_NEAR(res.p, oracle::correlation_p(res.r, n), 1e-9);
  }
}

TEST(Pearson, Errors) {
  const std::vector<double> a = {1, 2, 3}, flat = {2, 2, 2}, two = {1, 2}, four = {1, 2, 3, 4};
  EXPECT_EQ(error_code([&] { pearson(a, flat); }), Errc::ConstantVector);
  EXPECT_EQ(error_code([&] { pearson(a, four); }), Errc::LengthMismatch);
  EXPECT_EQ(error_code([&] { pearson(two, two); }), Errc::InsufficientData);
}

TEST(Pearson, AffineInvarianceAndSymmetry) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> coef(-10, 10);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(3, 60)(rng);
    const auto x = gaussian(rng, n), y = gaussian(rng, n);
    double a = coef(rng);
    if (std::abs(a) < 0.1) a = 1.5;
    const double b = coef(rng);
    std::vector<double> ax(n);
    for (std::size_t i = 0; i < n; ++i) ax[i] = a * x[i] + b;
    const double r = pearson(x, y).r;
    EXPECT_NEAR(pearson(ax, y).r, (a > 0 ? 1 : -1) * r, 1e-12);
    EXPECT_NEAR(pearson(y, x).r, r, 1e-15);
  }
}

TEST(Pearson, PValueFallsAsCorrelationGrows) {
  for (std::size_t n : {5u, 30u, 1000u}) {
    double prev = 1.0 + 1e-12;
    for (double r = 0.0; r < 1.0; r += 0.01) {
      const double p = correlation_p_value(r, n);
      EXPECT_LE(p, prev);
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
      EXPECT_DOUBLE_EQ(correlation_p_value(-r, n), p);
      prev = p;
    }
  }
}

TEST(Pearson, NullRejectionRateIsCalibrated) {
  std::mt19937_64 rng(3);
  const int trials = 4000;
  int rejected = 0;
  for (int t = 0; t < trials; ++t) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(5, 80)(rng);
    rejected += pearson(gaussian(rng, n), gaussian(rng, n)).p < 0.05;
  }
  EXPECT_NEAR(static_cast<double>(rejected) / trials, 0.05, 0.012);
}

// ---- Bonferroni and the study -------------------------------------------------------

TEST(Bonferroni, Examples) {
  EXPECT_EQ(bonferroni_threshold(0.05, 20), 0.0025);
  EXPECT_EQ(bonferroni_threshold(0.05, 1), 0.05);
  EXPECT_EQ(bonferroni_threshold(0.01, 4), 0.0025);
  EXPECT_EQ(error_code([] { bonferroni_threshold(0.0, 3); }), Errc::InvalidArgument);
  EXPECT_EQ(error_code([] { bonferroni_threshold(0.05, 0); }), Errc::InvalidArgument);
}

TEST(Stance, FromRating) {
  EXPECT_EQ(stance_from_rating(1), Stance::Bearish);
  EXPECT_EQ(stance_from_rating(2), Stance::Bearish);
  EXPECT_EQ(stance_from_rating(3), Stance::Neutral);
  EXPECT_EQ(stance_from_rating(4), Stance::Bullish);
  EXPECT_EQ(stance_from_rating(5), Stance::Bullish);
  EXPECT_EQ(error_code([] { stance_from_rating(6); }), Errc::InvalidArgument);
}

TEST(RatingIndex, LatestStrictlyBeforeTheCall) {
  const std::vector<RatingRecord> rows = {{"Jane Roe", "ACME", at("2016-01-10"), 2},
                                          {"Jane Roe", "ACME", at("2016-03-01"), 4},
                                          {"Jane Roe", "ACME", at("2016-05-03T13:30:00Z"), 5},
                                          {"Jane Roe", "OTHR", at("2016-04-01"), 1}};
  const RatingIndex idx(rows);
  EXPECT_EQ(idx.before(" jane roe", "ACME", at("2016-05-03T13:30:00Z")), 4);
  EXPECT_EQ(idx.before("Jane Roe", "ACME", at("2016-02-01")), 2);
  EXPECT_FALSE(idx.before("Jane Roe", "ACME", at("2016-01-10")));
  EXPECT_FALSE(idx.before("John Doe", "ACME", at("2017-01-01")));
}

TEST(RunStudy, PlantedFeatureIsSignificant) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<StudyObservation> obs;
  for (int i = 0; i < 600; ++i) {
    StudyObservation o;
    o.stance = static_cast<Stance>(1 + i % 3);
    for (auto& f : o.features) f = noise(rng);
    o.features[F10PosSent] = static_cast<double>(o.stance) + noise(rng);
    o.features[F5NeProduct] = 0.0;
    obs.push_back(o);
  }
  const auto res = run_study(obs);
  ASSERT_EQ(res.rows.size(), 20u);
  EXPECT_EQ(res.threshold, 0.0025);
  EXPECT_GT(res.rows[F10PosSent].r, 0.0);
  EXPECT_TRUE(res.rows[F10PosSent].significant);
  EXPECT_TRUE(res.rows[F5NeProduct].constant);
  EXPECT_FALSE(res.rows[F5NeProduct].significant);
  for (const auto& row : res.rows) {
    EXPECT_EQ(row.significant, row.p < res.threshold);
    EXPECT_LE(std::abs(row.r), 1.0);
  }

  // The ordinal code is an affine image of any other encoding.
  std::vector<double> f10, recoded;
  for (const auto& o : obs) {
    f10.push_back(o.features[F10PosSent]);
    recoded.push_back(2.0 * static_cast<double>(o.stance) + 7.0);
  }
  EXPECT_NEAR(pearson(f10, recoded).r, res.rows[F10PosSent].r, 1e-12);

  std::shuffle(obs.begin(), obs.end(), rng);
  const auto again = run_study(obs);
  for (std::size_t j = 0; j < 20; ++j) {
    EXPECT_EQ(again.rows[j].r, res.rows[j].r);
    EXPECT_EQ(again.rows[j].p, res.rows[j].p);
  }
}

TEST(RunStudy, IndependentFeaturesRarelyPassTheCorrectedThreshold) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise;
  std::size_t flagged = 0;
  const int resamples = 200;
  for (int s = 0; s < resamples; ++s) {
    std::vector<StudyObservation> obs(150);
    for (auto& o : obs) {
      o.stance = static_cast<Stance>(std::uniform_int_distribution<int>(1, 3)(rng));
      for (auto& f : o.features) f = noise(rng);
    }
    for (const auto& row : run_study(obs).rows) flagged += row.significant;
  }
  // 4000 null tests at 0.0025: about 10 expected.
  EXPECT_GE(flagged, 2u);
  EXPECT_LE(flagged, 22u);
}

TEST(RunStudy, TooFewTurns) {
  std::vector<StudyObservation> obs(2);
  EXPECT_EQ(error_code([&] { run_study(obs); }), Errc::InsufficientData);
}

TEST(RunStudy, ReportsHaveTwentyRows) {
  std::vector<StudyObservation> obs(10);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    obs[i].stance = static_cast<Stance>(1 + i % 3);
    obs[i].features[F18NumTokens] = static_cast<double>(i);
  }
  const auto res = run_study(obs);
  std::ostringstream csv_out, txt;
  write_study_csv(csv_out, res);
  write_study_table(txt, res);
  std::istringstream in(csv_out.str());
  EXPECT_EQ(csv::read(in).rows.size(), 20u);
  EXPECT_NE(txt.str().find("Total 10 question turns"), std::string::npos);
}

// ---- labels ----------------------------------------------------------------------

TEST(SelectTargets, Examples) {
  const Timestamp call = at("2016-05-03T13:30:00Z");
  const std::vector<PriceTargetRecord> one = {{"a", "X", call - std::chrono::days(1), 100},
                                              {"a", "X", call + std::chrono::days(2), 110}};
  const auto p = select_targets(one, call);
  ASSERT_TRUE(p);
  EXPECT_EQ(p->before, 100);
  EXPECT_EQ(p->after, 110);

  const std::vector<PriceTargetRecord> old = {{"a", "X", add_calendar_months(call, -4), 100}};
  EXPECT_FALSE(select_targets(old, call));

  const std::vector<PriceTargetRecord> two = {{"a", "X", add_calendar_months(call, -2), 90},
                                              {"a", "X", call - std::chrono::days(1), 100},
                                              {"a", "X", call + std::chrono::days(3), 95}};
  EXPECT_EQ(select_targets(two, call)->before, 100);
}

TEST(SelectTargets, WindowEdges) {
  const Timestamp call = at("2016-05-31T12:00:00Z");
  auto pair = [&](Timestamp b, Timestamp a) {
    const std::vector<PriceTargetRecord> r = {{"a", "X", b, 100}, {"a", "X", a, 120}};
    return select_targets(r, call);
  };
  const Timestamp good_after = call + std::chrono::days(1);
  EXPECT_TRUE(pair(at("2016-02-29T12:00:00Z"), good_after));
  EXPECT_FALSE(pair(at("2016-02-29T11:59:59Z"), good_after));
  EXPECT_FALSE(pair(call, good_after));
  EXPECT_TRUE(pair(call - std::chrono::seconds(1), call + std::chrono::days(14)));
  EXPECT_FALSE(pair(call - std::chrono::seconds(1), call + std::chrono::days(14) + std::chrono::seconds(1)));
  EXPECT_FALSE(pair(call - std::chrono::seconds(1), call));
}

TEST(PercentChange, Examples) {
  EXPECT_DOUBLE_EQ(percent_change(std::vector<TargetPair>{{100, 110}}), 0.10);
  EXPECT_DOUBLE_EQ(percent_change(std::vector<TargetPair>{{100, 110}, {50, 45}}), 0.0);
  EXPECT_EQ(percent_change(std::vector<TargetPair>{{80, 80}, {80, 80}}), 0.0);
  EXPECT_EQ(error_code([] { percent_change(std::vector<TargetPair>{}); }), Errc::EmptyAnalystSet);
}

TEST(ClassifyChange, ThresholdGrid) {
  const std::vector<std::pair<double, int>> grid = {{-0.02, -1}, {-0.0167, 0}, {-0.0001, 0}, {0.0, 0}, {0.001, 1}};
  for (const auto& [y, c] : grid) EXPECT_EQ(classify_change(y), c) << y;
  EXPECT_EQ(error_code([] { classify_change(std::nan("")); }), Errc::InvalidArgument);
}

TEST(ClassifyChange, PartitionAndScaleInvariance) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> price(1, 500), change(-0.2, 0.2), scale(0.01, 100);
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<TargetPair> pairs(static_cast<std::size_t>(std::uniform_int_distribution<int>(1, 5)(rng)));
    for (auto& p : pairs) {
      p.before = price(rng);
      p.after = p.before * (1 + change(rng));
    }
    const double y = percent_change(pairs);
    const int c = classify_change(y);
    EXPECT_EQ((y < -0.0167) + (y >= -0.0167 && y <= 0) + (y > 0), 1);
    EXPECT_EQ(c, y < -0.0167 ? -1 : (y <= 0 ? 0 : 1));
    const double k = scale(rng);
    for (auto& p : pairs) {
      p.before *= k;
      p.after *= k;
    }
    const double yk = percent_change(pairs);
    EXPECT_NEAR(yk, y, 1e-12);
    if (std::abs(y - (-0.0167)) > 1e-9 && std::abs(y) > 1e-9) EXPECT_EQ(classify_change(yk), c);
  }
}

TEST(BuildLabels, AveragesAnalystsAndReportsSkippedCalls) {
  const Timestamp call = at("2016-05-03T13:30:00Z");
  const std::vector<CallKey> calls = {{"X_1", "X", call}, {"Y_1", "Y", call}};
  const std::vector<PriceTargetRecord> recs = {
      {"a", "X", call - std::chrono::days(5), 100}, {"a", "X", call + std::chrono::days(1), 110},
      {"b", "X", call - std::chrono::days(5), 50},  {"b", "X", call + std::chrono::days(1), 47},
      {"c", "X", call - std::chrono::days(5), 10},  {"a", "Y", call - std::chrono::days(5), 10}};
  std::vector<std::string> skipped;
  const auto labels = build_labels(calls, recs, &skipped);
  ASSERT_EQ(labels.size(), 1u);
  EXPECT_EQ(labels[0].call_id, "X_1");
  EXPECT_EQ(labels[0].analysts, 2u);
  EXPECT_DOUBLE_EQ(labels[0].y, 0.02);
  EXPECT_EQ(labels[0].c, 1);
  EXPECT_EQ(skipped, std::vector<std::string>{"Y_1"});

  std::ostringstream os;
  write_labels(os, labels);
  EXPECT_EQ(os.str().substr(0, 22), "call_id,y,c,n_analysts");
  std::istringstream in(os.str());
  const auto back = read_labels(in);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].y, labels[0].y);
  EXPECT_EQ(back[0].c, labels[0].c);
}

TEST(PriceTargets, CsvRejectsNonPositiveTargets) {
  std::istringstream ok("analyst_id,ticker,timestamp,price_target\na,X,2016-05-01,12.5\n");
  EXPECT_EQ(read_price_targets(ok).size(), 1u);
  std::istringstream bad("analyst_id,ticker,timestamp,price_target\na,X,2016-05-01,0\n");
  EXPECT_EQ(error_code([&] { read_price_targets(bad); }), Errc::MalformedInput);
}

// ---- metrics ------------------------------------------------------------------------

TEST(Metrics, PercentErrorExamples) {
  EXPECT_NEAR(pct_err_regression(0.00140, 0.00165), 15.2, 0.1);
  EXPECT_NEAR(pct_err_regression(0.00137, 0.00165), 17.0, 0.1);
  EXPECT_NEAR(pct_err_classification(0.435, 0.387), 12.4, 0.1);
  EXPECT_NEAR(pct_err_classification(0.479, 0.387), 23.8, 0.1);
}

TEST(Metrics, RegressionDefinitions) {
  const std::vector<double> y = {0.01, -0.02, 0.03, 0.0};
  const std::vector<double> mean(4, 0.005);
  const double mean_mse = (0.005 * 0.005 + 0.025 * 0.025 + 0.025 * 0.025 + 0.005 * 0.005) / 4;
  const auto m = regression_metrics(y, mean, mean_mse);
  EXPECT_NEAR(m.r2, 0.0, 1e-12);
  EXPECT_NEAR(m.mse, mean_mse, 1e-15);
  EXPECT_EQ(error_code([&] { regression_metrics(y, mean, 0.0); }), Errc::InvalidArgument);
  EXPECT_NEAR(m.pct_err, 0.0, 1e-9);
  const auto perfect = regression_metrics(y, y, 1.0);
  EXPECT_EQ(perfect.mse, 0.0);
  EXPECT_EQ(perfect.r2, 1.0);
  EXPECT_EQ(error_code([&] { regression_metrics(y, std::vector<double>{1.0}, 1.0); }), Errc::LengthMismatch);
}

TEST(Metrics, RegressionBoundsOnRandomInputs) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto y = gaussian(rng, 12), p = gaussian(rng, 12);
    EXPECT_LE(regression_metrics(y, p, 1.0).r2, 1.0);
  }
}

TEST(Metrics, ClassificationDefinitions) {
  const std::vector<int> t = {-1, -1, 0, 0, 1, 1};
  const auto m = classification_metrics(t, t, 1.0 / 3.0);
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.macro_f1, 1.0);
  EXPECT_NEAR(m.pct_err, 200.0, 1e-9);

  const std::vector<int> p = {-1, 0, 0, 0, 1, -1};
  const auto c = classification_metrics(t, p, 0.5);
  EXPECT_NEAR(c.accuracy, 4.0 / 6.0, 1e-12);
  // Per-class F1: -1: 2/4, 0: 4/5, 1: 2/3.
  EXPECT_NEAR(c.macro_f1, (0.5 + 0.8 + 2.0 / 3.0) / 3.0, 1e-12);
  EXPECT_EQ(error_code([&] { classification_metrics(t, std::vector<int>{0}, 0.5); }), Errc::LengthMismatch);
}

TEST(Metrics, AbsentClassScoresZero) {
  const std::vector<int> t = {0, 0, 1, 1}, p = {0, 0, 1, 1};
  EXPECT_NEAR(classification_metrics(t, p, 0.5).macro_f1, 2.0 / 3.0, 1e-12);
}

TEST(Metrics, MajorityMacroF1UnderTestPriors) {
  EXPECT_NEAR(constant_predictor_macro_f1({0.336, 0.387, 0.277}, 0), 0.186, 0.01);
  // Against an independent derivation: F1 of class 0 = 2p / (1 + p).
  EXPECT_NEAR(constant_predictor_macro_f1({0.336, 0.387, 0.277}, 0), 2 * 0.387 / (1 + 0.387) / 3, 1e-12);
}

TEST(Metrics, MacroF1StaysInUnitInterval) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> cls(-1, 1);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<int> t(20), p(20);
    for (auto& v : t) v = cls(rng);
    for (auto& v : p) v = cls(rng);
    const auto m = classification_metrics(t, p, 0.3);
    EXPECT_GE(m.macro_f1, 0.0);
    EXPECT_LE(m.macro_f1, 1.0);
    EXPECT_GE(m.accuracy, 0.0);
    EXPECT_LE(m.accuracy, 1.0);
  }
}

TEST(SectorBreakdown, Examples) {
  const std::vector<std::string> one(4, "Energy");
  const std::vector<int> t = {0, 1, -1, 0}, p = {0, 1, 0, 1};
  const auto single = sector_breakdown(one, t, p);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].accuracy(), 0.5);

  const std::vector<std::string> two = {"Energy", "Energy", "Utilities", "Utilities"};
  const std::vector<int> p2 = {0, 1, 0, 1};
  const std::vector<int> t2 = {0, 1, 1, 0};
  const auto rows = sector_breakdown(two, t2, p2);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].accuracy() * 0.5 + rows[1].accuracy() * 0.5, 0.5);
  std::size_t support = 0;
  for (const auto& r : rows) support += r.support;
  EXPECT_EQ(support, 4u);

  for (const auto& r : rows) EXPECT_NE(r.sector, "Materials");
  std::ostringstream chart, csv_out;
  write_sector_chart(chart, rows);
  write_sector_csv(csv_out, rows);
  EXPECT_NE(chart.str().find("Utilities"), std::string::npos);
  EXPECT_EQ(csv_out.str().substr(0, 24), "sector,support,accuracy\n");
}
