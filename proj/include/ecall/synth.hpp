#pragma once

// Synthetic earnings-call corpus with planted effects: analyst stance shifts
// the share of positive adjectives in question turns, and the forecast-change
// class shows up as cue words in company answers.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ecall/corpus.hpp"
#include "ecall/featurize.hpp"
#include "ecall/labels.hpp"
#include "ecall/study.hpp"
#include "ecall/text.hpp"
#include "ecall/timeutil.hpp"

namespace ecall {

/// Derives an independent stream seed from a run seed and a purpose name.
inline std::uint64_t sub_seed(std::uint64_t seed, std::string_view name) {
  return fnv1a(name, fnv1a(std::to_string(seed)));
}

struct SynthParams {
  std::size_t calls = 600;
  std::uint64_t seed = 42;
  double signal = 0.8;     // probability that answer cues name the true class
  double sentiment = 0.8;  // stance effect on positive adjectives in questions
  std::array<double, 3> class_balance = {0.336, 0.387, 0.277};
  int first_year = 2010;
  int last_year = 2017;
  std::size_t tickers = 40;
  double market_signal = 0.3;
  double missing_rate = 0.1;
  double presentation_only_rate = 0.03;
};

struct SynthCorpus {
  std::vector<RawTranscript> transcripts;
  std::vector<RatingRecord> ratings;
  std::vector<PriceTargetRecord> targets;
  std::vector<MarketSnapshot> market;
  std::map<std::string, double> planted_y;
  std::map<std::string, int> planted_class;
  nlohmann::json manifest;
};

namespace synth_words {

inline const std::vector<std::string> first = {
    "Laura", "David", "Maria", "James", "Susan", "Robert", "Karen", "Michael", "Linda", "Thomas",
    "Nancy", "Daniel", "Emily", "Brian", "Rachel", "Kevin", "Julia", "Steven", "Anna", "Peter"};
inline const std::vector<std::string> last = {
    "Chen", "Novak", "Okafor", "Larsen", "Patel", "Moreau", "Silva", "Kowalski", "Tanaka", "Reyes",
    "Fischer", "Haddad", "Lindqvist", "Romano", "Nakamura", "Duarte", "Brennan", "Sato", "Varga", "Quinn"};
inline const std::vector<std::string> firms = {"Baird Research", "Harlow Securities", "Kestrel Capital",
                                               "Norland Partners", "Ashford Securities", "Calder Research"};
inline const std::vector<std::string> positive_adj = {"excellent", "impressive", "great", "strong"};
inline const std::vector<std::string> neutral_adj = {"recent", "current", "underlying", "overall"};
inline const std::vector<std::string> segments = {"retail", "cloud", "wholesale", "industrial", "services",
                                                  "consumer", "enterprise", "logistics", "software", "hardware",
                                                  "pharmacy", "advertising", "licensing", "subscription"};
inline const std::vector<std::string> metrics = {"pricing", "volume", "utilization", "backlog", "churn",
                                                 "inventory", "bookings", "traffic", "attach rates", "mix"};
inline const std::vector<std::string> drivers = {"demand", "adoption", "renewals", "throughput", "staffing",
                                                 "promotions", "shipments", "onboarding", "procurement"};
inline const std::vector<std::string> areas = {"automation", "distribution", "research", "marketing",
                                               "capacity", "training", "tooling", "security", "analytics"};
inline const std::vector<std::string> costs = {"freight", "labor", "materials", "energy", "packaging", "rent"};
inline const std::array<std::array<std::string, 2>, 3> cues = {{{"retrenchment", "curtailment"},
                                                                {"continuity", "steadiness"},
                                                                {"acceleration", "expansion"}}};

}  // namespace synth_words

namespace detail {

template <class T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::string presentation_sentence(std::mt19937_64& rng) {
  using namespace synth_words;
  std::ostringstream s;
  switch (uniform_int(rng, 0, 4)) {
    case 0:
      s << "Revenue grew " << uniform_int(rng, 2, 30) << "% to $" << uniform_int(rng, 2, 90) << "." << uniform_int(rng, 1, 9)
        << " million in the quarter, driven by " << pick(rng, drivers) << " in our " << pick(rng, segments) << " segment.";
      break;
    case 1:
      s << "We will continue to invest in " << pick(rng, areas) << " and we expect " << pick(rng, metrics)
        << " to improve over the next year.";
      break;
    case 2:
      s << "Operating margin was " << uniform_int(rng, 8, 35) << "% this quarter as " << pick(rng, drivers)
        << " offset higher " << pick(rng, costs) << " costs in the " << pick(rng, segments) << " business.";
      break;
    case 3:
      s << "Our " << pick(rng, segments) << " team delivered solid " << pick(rng, metrics) << " and customers added "
        << pick(rng, areas) << " projects across several regions.";
      break;
    default:
      s << "During the quarter we opened new " << pick(rng, segments) << " locations and expanded " << pick(rng, areas)
        << " programs for our " << pick(rng, segments) << " customers.";
      break;
  }
  return s.str();
}

inline std::string cue_sentence(std::mt19937_64& rng, int cls) {
  const auto& c = synth_words::cues[static_cast<std::size_t>(cls + 1)];
  std::ostringstream s;
  s << "Looking ahead, our planning assumes " << c[0] << " and " << c[1] << " across the "
    << pick(rng, synth_words::segments) << " portfolio.";
  return s.str();
}

/// One adjective slot per template; every template has the same structure
/// whichever adjective fills the slot.
inline std::string question_text(std::mt19937_64& rng, const std::string& name, const std::string& firm,
                                 const std::string& adj) {
  using namespace synth_words;
  std::ostringstream s;
  s << "Hi, this is " << name << " from " << firm << ". ";
  switch (uniform_int(rng, 0, 2)) {
    case 0:
      s << "Can you talk about the " << adj << " trends in the " << pick(rng, segments) << " business and how you see "
        << pick(rng, metrics) << " developing over the next few quarters?";
      break;
    case 1:
      s << "Could you give us more color on the " << adj << " performance in " << pick(rng, segments)
        << " and what drove " << pick(rng, metrics) << " in the period?";
      break;
    default:
      s << "I wanted to ask about the " << adj << " results in " << pick(rng, segments) << ". How should we think about "
        << pick(rng, metrics) << " for the rest of the year?";
      break;
  }
  return s.str();
}

inline std::string answer_text(std::mt19937_64& rng, int cue_class) {
  using namespace synth_words;
  std::ostringstream s;
  s << "Sure. We saw steady " << pick(rng, drivers) << " in " << pick(rng, segments) << " and we will keep investing in "
    << pick(rng, areas) << " because orders remain solid across our markets. " << cue_sentence(rng, cue_class);
  return s.str();
}

}  // namespace detail

inline constexpr int kSynthCallSpacing = 75;

inline SynthCorpus generate_corpus(const SynthParams& p) {
  using namespace std::chrono;
  using namespace synth_words;
  std::mt19937_64 rng(sub_seed(p.seed, "generator"));
  SynthCorpus out;

  std::vector<std::string> tickers, ticker_sector;
  for (std::size_t t = 0; t < p.tickers; ++t) {
    std::string tk;
    std::size_t v = t;
    for (int k = 0; k < 3; ++k) {
      tk += static_cast<char>('A' + v % 26);
      v /= 26;
    }
    tickers.push_back("T" + tk);
    ticker_sector.push_back(gics_sectors()[t % gics_sectors().size()]);
  }

  const int years = p.last_year - p.first_year + 1;
  std::map<std::string, std::vector<sys_days>> used_days;
  std::discrete_distribution<int> class_dist(p.class_balance.begin(), p.class_balance.end());
  std::normal_distribution<double> gauss;

  for (std::size_t i = 0; i < p.calls; ++i) {
    // Calls of one ticker sit far enough apart that no analyst's targets
    // reach into a neighbour's label window; crowded tickers fall back to a
    // few days' spacing.
    const int year = p.first_year + static_cast<int>(i % static_cast<std::size_t>(years));
    std::size_t ti = 0;
    sys_days day;
    for (int attempt = 0;; ++attempt) {
      ti = std::uniform_int_distribution<std::size_t>(0, tickers.size() - 1)(rng);
      day = sys_days{std::chrono::year{year} / January / 1} + days{detail::uniform_int(rng, 20, 340)};
      auto& used = used_days[tickers[ti]];
      const days gap{attempt < 2000 ? kSynthCallSpacing : 4};
      if (std::none_of(used.begin(), used.end(), [&](sys_days d) { return std::chrono::abs(d - day) < gap; })) {
        used.push_back(day);
        break;
      }
    }
    const std::string& ticker = tickers[ti];
    const Timestamp when = day + hours{13} + minutes{30};
    char id[64];
    std::snprintf(id, sizeof id, "%s_%s_%04zu", ticker.c_str(), format_date(when).c_str(), i);

    const int cls = class_dist(rng) - 1;
    const bool true_cue = detail::uniform(rng, 0.0, 1.0) < p.signal;
    const int cue_class = true_cue ? cls : detail::uniform_int(rng, -1, 1);

    RawTranscript tr;
    tr.source_id = id;
    tr.ticker = ticker;
    tr.datetime = when;
    tr.sector = ticker_sector[ti];
    const std::string ceo = detail::pick(rng, first) + " " + detail::pick(rng, last);
    const std::string cfo = detail::pick(rng, first) + " " + detail::pick(rng, last);
    tr.body.push_back({"Operator", std::nullopt,
                       "Good day and welcome to the quarterly earnings conference call. Please go ahead."});
    for (const auto& [name, role] : {std::pair{ceo, "Chief Executive Officer"}, std::pair{cfo, "Chief Financial Officer"}}) {
      std::string text;
      const int n = detail::uniform_int(rng, 2, 4);
      for (int k = 0; k < n; ++k) text += (k ? " " : "") + detail::presentation_sentence(rng);
      if (name == cfo) text += " " + detail::cue_sentence(rng, cue_class);
      tr.body.push_back({name, name + ", " + role, text});
    }

    const bool presentation_only = detail::uniform(rng, 0.0, 1.0) < p.presentation_only_rate;
    if (!presentation_only) {
      tr.body.push_back({"Operator", std::nullopt, "We will now begin the question-and-answer session."});
      const int askers = detail::uniform_int(rng, 3, 5);
      std::set<std::string> seen;
      for (int a = 0; a < askers; ++a) {
        std::string name;
        do name = detail::pick(rng, first) + " " + detail::pick(rng, last);
        while (name == ceo || name == cfo || seen.contains(name));
        seen.insert(name);
        const std::string firm = detail::pick(rng, firms);
        const int rating = detail::uniform_int(rng, 1, 5);
        const double stance_shift = static_cast<double>(static_cast<int>(stance_from_rating(rating)) - 2);
        const double p_pos = std::clamp(0.5 + 0.4 * p.sentiment * stance_shift, 0.0, 1.0);
        const bool pos = detail::uniform(rng, 0.0, 1.0) < p_pos;
        const std::string adj = detail::pick(rng, pos ? positive_adj : neutral_adj);
        const bool hinted = a % 4 != 3;
        tr.body.push_back({name, hinted ? std::optional<std::string>(name + ", " + firm + ", Analyst") : std::nullopt,
                           detail::question_text(rng, name, firm, adj)});
        tr.body.push_back({a % 2 ? ceo : cfo, std::nullopt, detail::answer_text(rng, cue_class)});
        tr.body.push_back({name, std::nullopt, "Thank you."});
        out.ratings.push_back({name, ticker, when - days{detail::uniform_int(rng, 120, 200)}, detail::uniform_int(rng, 1, 5)});
        out.ratings.push_back({name, ticker, when - days{1}, rating});
      }
      tr.body.push_back({"Operator", std::nullopt, "That concludes today's call. Thank you for participating."});
    }
    out.transcripts.push_back(std::move(tr));

    // Label: a target change kept well inside its class band, split across
    // analysts so their mean is exact.
    double y = 0.0;
    if (cls == -1) y = detail::uniform(rng, -0.08, -0.025);
    else if (cls == 0) y = detail::uniform(rng, -0.012, -0.004);
    else y = detail::uniform(rng, 0.006, 0.06);
    const int k = detail::uniform_int(rng, 2, 4);
    std::vector<double> noise(static_cast<std::size_t>(k));
    for (auto& v : noise) v = 0.002 * gauss(rng);
    const double nm = std::accumulate(noise.begin(), noise.end(), 0.0) / k;
    for (int j = 0; j < k; ++j) {
      const std::string analyst = std::string("PT-") + id + "-" + std::to_string(j);
      const double before = std::round(detail::uniform(rng, 20.0, 200.0) * 100.0) / 100.0;
      const double after = before * (1.0 + y + noise[static_cast<std::size_t>(j)] - nm);
      out.targets.push_back({analyst, ticker, when - days{detail::uniform_int(rng, 100, 200)}, before * 0.9});
      out.targets.push_back({analyst, ticker, when - days{detail::uniform_int(rng, 1, 60)}, before});
      out.targets.push_back({analyst, ticker, when + days{detail::uniform_int(rng, 1, 13)}, after});
    }
    out.planted_y[id] = y;
    out.planted_class[id] = cls;

    MarketSnapshot m;
    m.ticker = ticker;
    m.date = day - days{1};
    const double base = detail::uniform(rng, 20.0, 200.0);
    const std::array<double, kNumMarket> vals = {base,
                                                 base * detail::uniform(rng, 1.0, 1.05),
                                                 base * detail::uniform(rng, 0.95, 1.0),
                                                 std::round(detail::uniform(rng, 1e5, 5e6)),
                                                 detail::uniform(rng, 0.1, 0.6) + p.market_signal * 0.1 * cls,
                                                 detail::uniform(rng, 0.1, 0.6),
                                                 detail::uniform(rng, 8.0, 40.0),
                                                 detail::uniform(rng, 0.5, 2.0),
                                                 detail::uniform(rng, 1.0, 12.0),
                                                 detail::uniform(rng, 1.0, 10.0)};
    for (std::size_t j = 0; j < kNumMarket; ++j)
      if (detail::uniform(rng, 0.0, 1.0) >= p.missing_rate) m.values[j] = vals[j];
    out.market.push_back(std::move(m));
  }

  out.manifest = {{"generator", "ecall-synth"},
                  {"version", 1},
                  {"calls", p.calls},
                  {"seed", p.seed},
                  {"signal", p.signal},
                  {"sentiment", p.sentiment},
                  {"class_balance", p.class_balance},
                  {"first_year", p.first_year},
                  {"last_year", p.last_year},
                  {"tickers", p.tickers},
                  {"market_signal", p.market_signal},
                  {"missing_rate", p.missing_rate},
                  {"presentation_only_rate", p.presentation_only_rate}};
  return out;
}

/// Layout: corpus/<id>.json, ratings.csv, targets.csv, market.csv,
/// manifest.json.
inline void write_corpus(const SynthCorpus& c, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "corpus");
  for (const auto& t : c.transcripts) write_file((dir / "corpus" / (t.source_id + ".json")).string(), to_canonical_json(t));
  std::ostringstream r, g, m;
  write_ratings(r, c.ratings);
  write_file((dir / "ratings.csv").string(), r.str());
  g << "analyst_id,ticker,timestamp,price_target\n";
  for (const auto& t : c.targets)
    g << csv::row({t.analyst_id, t.ticker, format_timestamp(t.timestamp), exact(t.price_target)}) << '\n';
  write_file((dir / "targets.csv").string(), g.str());
  write_market_csv(m, c.market);
  write_file((dir / "market.csv").string(), m.str());
  write_file((dir / "manifest.json").string(), c.manifest.dump(2) + "\n");
}

}  // namespace ecall
