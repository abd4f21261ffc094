#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <nlohmann/json.hpp>

#include "ecall/error.hpp"
#include "ecall/text.hpp"
#include "ecall/timeutil.hpp"
#include "ecall/token.hpp"

namespace ecall {

enum class SpeakerType { Analyst, CompanyRep, Operator };
enum class Section { Presentation, QA };
enum class TranscriptFormat { XmlV1, CanonicalJson };

constexpr std::string_view to_string(SpeakerType t) {
  switch (t) {
    case SpeakerType::Analyst: return "Analyst";
    case SpeakerType::CompanyRep: return "CompanyRep";
    case SpeakerType::Operator: return "Operator";
  }
  return "?";
}

constexpr std::string_view to_string(Section s) { return s == Section::QA ? "QA" : "Presentation"; }

/// The 11 GICS sectors; anything else is carried as "unknown".
inline const std::vector<std::string>& gics_sectors() {
  static const std::vector<std::string> s = {
      "Consumer Discretionary", "Consumer Staples", "Energy",      "Financials",
      "Health Care",            "Industrials",      "Information Technology", "Materials",
      "Real Estate",            "Telecommunication Services", "Utilities"};
  return s;
}

inline std::string normalize_sector(std::string_view s) {
  const auto t = trim(s);
  for (const auto& g : gics_sectors())
    if (to_lower(g) == to_lower(t)) return g;
  return "unknown";
}

struct RawTurn {
  std::string speaker;
  std::optional<std::string> role_hint;
  std::string text;
};

struct RawTranscript {
  std::string source_id;
  std::string ticker;
  Timestamp datetime{};
  std::string sector = "unknown";
  std::vector<RawTurn> body;
};

struct Turn {
  std::string speaker_name;
  SpeakerType speaker_type = SpeakerType::Analyst;
  int turn_order = 0;
  Section section = Section::Presentation;
  std::vector<AnnotatedToken> tokens;
  std::vector<SentenceSpan> sentences;

  std::size_t token_count() const { return word_count(tokens); }

  friend bool operator==(const Turn&, const Turn&) = default;
};

/// Indices into Call::turns.
struct QASet {
  std::size_t question = 0;
  std::vector<std::size_t> answers;

  friend bool operator==(const QASet&, const QASet&) = default;
};

struct Call {
  std::string id;
  std::string ticker;
  Timestamp datetime{};
  std::string sector = "unknown";
  std::vector<Turn> turns;
  std::vector<QASet> qa_sets;

  bool has_qa_section() const {
    return std::any_of(turns.begin(), turns.end(), [](const Turn& t) { return t.section == Section::QA; });
  }

  friend bool operator==(const Call&, const Call&) = default;
};

// ---- parsing ---------------------------------------------------------------

namespace detail {

inline RawTranscript finish_transcript(RawTranscript t) {
  if (t.ticker.empty()) throw Error(Errc::MissingMetadata, "transcript has no ticker");
  if (t.body.empty()) throw Error(Errc::MalformedInput, "transcript has no turns");
  for (auto& turn : t.body) {
    turn.speaker = std::string(trim(turn.speaker));
    if (turn.speaker.empty()) throw Error(Errc::MalformedInput, "turn with empty speaker name");
    if (turn.role_hint) {
      turn.role_hint = std::string(trim(*turn.role_hint));
      if (turn.role_hint->empty()) turn.role_hint.reset();
    }
  }
  return t;
}

inline RawTranscript parse_json(std::string_view bytes) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedInput, e.what());
  }
  if (!doc.is_object()) throw Error(Errc::MalformedInput, "top-level value is not an object");
  RawTranscript t;
  if (!doc.contains("ticker") || !doc["ticker"].is_string())
    throw Error(Errc::MissingMetadata, "missing 'ticker'");
  if (!doc.contains("datetime") || !doc["datetime"].is_string())
    throw Error(Errc::MissingMetadata, "missing 'datetime'");
  t.ticker = std::string(trim(doc["ticker"].get<std::string>()));
  t.datetime = parse_timestamp(doc["datetime"].get<std::string>());
  if (doc.contains("sector") && doc["sector"].is_string()) t.sector = normalize_sector(doc["sector"].get<std::string>());
  if (!doc.contains("turns") || !doc["turns"].is_array()) throw Error(Errc::MalformedInput, "missing 'turns' array");
  for (const auto& j : doc["turns"]) {
    if (!j.is_object() || !j.contains("speaker") || !j["speaker"].is_string() || !j.contains("text") ||
        !j["text"].is_string())
      throw Error(Errc::MalformedInput, "turn needs string 'speaker' and 'text'");
    RawTurn turn;
    turn.speaker = j["speaker"].get<std::string>();
    if (j.contains("role_hint") && j["role_hint"].is_string()) turn.role_hint = j["role_hint"].get<std::string>();
    turn.text = j["text"].get<std::string>();
    t.body.push_back(std::move(turn));
  }
  return t;
}

inline RawTranscript parse_xml(std::string_view bytes) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(bytes)};
    pt::read_xml(in, tree, pt::xml_parser::no_comments);
  } catch (const pt::ptree_error& e) {
    throw Error(Errc::MalformedInput, e.what());
  }
  const auto call = tree.get_child_optional("call");
  if (!call) throw Error(Errc::MalformedInput, "root element <call> not found");
  RawTranscript t;
  const auto ticker = call->get_optional<std::string>("<xmlattr>.ticker");
  const auto datetime = call->get_optional<std::string>("<xmlattr>.datetime");
  if (!ticker || trim(*ticker).empty()) throw Error(Errc::MissingMetadata, "missing ticker attribute");
  if (!datetime || trim(*datetime).empty()) throw Error(Errc::MissingMetadata, "missing datetime attribute");
  t.ticker = std::string(trim(*ticker));
  t.datetime = parse_timestamp(*datetime);
  if (const auto sector = call->get_optional<std::string>("<xmlattr>.sector")) t.sector = normalize_sector(*sector);
  for (const auto& [name, node] : *call) {
    if (name != "turn") continue;
    RawTurn turn;
    turn.speaker = node.get<std::string>("<xmlattr>.speaker", "");
    if (const auto hint = node.get_optional<std::string>("<xmlattr>.role_hint")) turn.role_hint = *hint;
    turn.text = std::string(trim(node.get_value<std::string>()));
    t.body.push_back(std::move(turn));
  }
  return t;
}

}  // namespace detail

/// Parses one transcript document. Turn order is preserved and speaker
/// names are trimmed.
inline RawTranscript parse_transcript(std::string_view bytes, TranscriptFormat format,
                                      std::string source_id = {}) {
  RawTranscript t = format == TranscriptFormat::XmlV1 ? detail::parse_xml(bytes) : detail::parse_json(bytes);
  t.source_id = std::move(source_id);
  return detail::finish_transcript(std::move(t));
}

inline std::string to_canonical_json(const RawTranscript& t) {
  nlohmann::json doc;
  doc["ticker"] = t.ticker;
  doc["datetime"] = format_timestamp(t.datetime);
  doc["sector"] = t.sector == "unknown" ? nlohmann::json(nullptr) : nlohmann::json(t.sector);
  doc["turns"] = nlohmann::json::array();
  for (const auto& turn : t.body) {
    nlohmann::json j;
    j["speaker"] = turn.speaker;
    j["role_hint"] = turn.role_hint ? nlohmann::json(*turn.role_hint) : nlohmann::json(nullptr);
    j["text"] = turn.text;
    doc["turns"].push_back(std::move(j));
  }
  return doc.dump(2);
}

inline std::string to_xml_v1(const RawTranscript& t) {
  const auto esc = [](std::string_view s) {
    std::string out;
    for (char c : s) {
      switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
      }
    }
    return out;
  };
  std::string out = "<call ticker=\"" + esc(t.ticker) + "\" datetime=\"" + format_timestamp(t.datetime) +
                    "\" sector=\"" + esc(t.sector == "unknown" ? "" : t.sector) + "\">\n";
  for (const auto& turn : t.body) {
    out += "  <turn speaker=\"" + esc(turn.speaker) + "\"";
    if (turn.role_hint) out += " role_hint=\"" + esc(*turn.role_hint) + "\"";
    out += ">" + esc(turn.text) + "</turn>\n";
  }
  out += "</call>\n";
  return out;
}

// ---- speaker heuristic -------------------------------------------------------

inline constexpr std::string_view kAnalystMarker = ", Analyst";
inline constexpr std::string_view kOperatorName = "Operator";

struct SpeakerAssignment {
  std::map<std::string, SpeakerType> types;
  /// Index of the first raw turn belonging to the Q&A section, if any.
  std::optional<std::size_t> qa_start;
  /// True when the transcript had no operator turns and the fallback rule
  /// (company representatives until the first hint-labeled analyst) applied.
  bool no_operator_fallback = false;
  std::vector<std::string> notes;
};

namespace detail {
inline bool hinted(const RawTurn& t) { return t.role_hint.has_value(); }
inline bool hinted_analyst(const RawTurn& t) {
  return (t.role_hint && t.role_hint->find(kAnalystMarker) != std::string::npos) ||
         t.speaker.find(kAnalystMarker) != std::string::npos;
}
}  // namespace detail

/// Speaker typing. A speaker named "Operator" is the operator. A speaker
/// whose role hint (or name) carries ", Analyst" is an analyst, and any other
/// hinted speaker is a company representative. Unhinted speakers are company
/// representatives if they speak between the first and second operator turns
/// and analysts otherwise. The Q&A section starts after the second operator
/// turn.
inline SpeakerAssignment classify_speakers(const RawTranscript& raw) {
  SpeakerAssignment out;
  std::vector<std::size_t> operator_turns;
  for (std::size_t i = 0; i < raw.body.size(); ++i)
    if (raw.body[i].speaker == kOperatorName) operator_turns.push_back(i);

  // A speaker is hint-labeled if any of their turns carries a hint.
  std::map<std::string, std::optional<SpeakerType>> hint_type;
  for (const auto& t : raw.body) {
    if (t.speaker == kOperatorName) continue;
    auto& slot = hint_type[t.speaker];
    if (detail::hinted_analyst(t)) slot = SpeakerType::Analyst;
    else if (detail::hinted(t) && !slot) slot = SpeakerType::CompanyRep;
  }

  std::set<std::string> presentation_speakers;
  if (!operator_turns.empty()) {
    const std::size_t lo = operator_turns[0];
    const std::size_t hi = operator_turns.size() >= 2 ? operator_turns[1] : raw.body.size();
    for (std::size_t i = lo + 1; i < hi; ++i) presentation_speakers.insert(raw.body[i].speaker);
    if (operator_turns.size() >= 2) out.qa_start = operator_turns[1] + 1;
  } else {
    out.no_operator_fallback = true;
    out.notes.push_back("no operator turns: unlabeled speakers default to CompanyRep until the first "
                        "hint-labeled analyst turn");
    std::size_t first_analyst = raw.body.size();
    for (std::size_t i = 0; i < raw.body.size(); ++i) {
      if (detail::hinted_analyst(raw.body[i])) {
        first_analyst = i;
        break;
      }
    }
    for (std::size_t i = 0; i < first_analyst; ++i) presentation_speakers.insert(raw.body[i].speaker);
    if (first_analyst < raw.body.size()) out.qa_start = first_analyst;
  }
  if (out.qa_start && *out.qa_start >= raw.body.size()) out.qa_start.reset();

  for (const auto& t : raw.body) {
    if (out.types.contains(t.speaker)) continue;
    if (t.speaker == kOperatorName) {
      out.types[t.speaker] = SpeakerType::Operator;
    } else if (const auto& h = hint_type[t.speaker]) {
      out.types[t.speaker] = *h;
    } else {
      out.types[t.speaker] =
          presentation_speakers.contains(t.speaker) ? SpeakerType::CompanyRep : SpeakerType::Analyst;
    }
  }
  return out;
}

// ---- turn-level transforms -------------------------------------------------

/// Merges each maximal run of tokens sharing an entity span id into one token
/// whose surface joins the parts with '_'. The merged token keeps the span's
/// entity label and the tags of its last constituent. Sentence spans are
/// remapped onto the new token indices.
inline Turn lexicalize_entities(const Turn& turn) {
  Turn out = turn;
  out.tokens.clear();
  std::vector<std::size_t> new_index(turn.tokens.size() + 1, 0);
  for (std::size_t i = 0; i < turn.tokens.size();) {
    const auto& tok = turn.tokens[i];
    new_index[i] = out.tokens.size();
    std::size_t j = i + 1;
    if (tok.span_id) {
      while (j < turn.tokens.size() && turn.tokens[j].span_id == tok.span_id && turn.tokens[j].entity == tok.entity)
        ++j;
    }
    if (j - i == 1) {
      out.tokens.push_back(tok);
    } else {
      AnnotatedToken merged = turn.tokens[j - 1];
      merged.surface = tok.surface;
      for (std::size_t k = i + 1; k < j; ++k) {
        new_index[k] = out.tokens.size();
        merged.surface += "_" + turn.tokens[k].surface;
      }
      merged.entity = tok.entity;
      merged.span_id = tok.span_id;
      out.tokens.push_back(std::move(merged));
    }
    i = j;
  }
  new_index[turn.tokens.size()] = out.tokens.size();

  out.sentences.clear();
  for (const auto& s : turn.sentences) {
    const std::size_t b = new_index[s.begin];
    const std::size_t e = s.end >= turn.tokens.size() ? out.tokens.size() : new_index[s.end];
    if (!out.sentences.empty() && b < out.sentences.back().end) {
      out.sentences.back().end = std::max(out.sentences.back().end, e);  // span crossed a boundary
    } else if (e > b) {
      out.sentences.push_back({b, e});
    }
  }
  return out;
}

/// Splits the Q&A section into question/answer sets: every analyst turn opens
/// a set and collects the company-representative turns up to the next analyst
/// turn. Analyst turns without an answer stay in the call but form no set.
inline std::vector<QASet> segment_qa(const Call& call) {
  std::vector<QASet> sets;
  std::optional<QASet> open;
  auto flush = [&] {
    if (open && !open->answers.empty()) sets.push_back(std::move(*open));
    open.reset();
  };
  for (std::size_t i = 0; i < call.turns.size(); ++i) {
    const auto& t = call.turns[i];
    if (t.section != Section::QA || t.speaker_type == SpeakerType::Operator) continue;
    if (t.speaker_type == SpeakerType::Analyst) {
      flush();
      open = QASet{i, {}};
    } else if (open) {
      open->answers.push_back(i);
    }
  }
  flush();
  return sets;
}

inline constexpr std::size_t kMinTurnTokens = 10;

/// Drops operator turns and turns with fewer than 10 (non-punctuation) tokens,
/// renumbers turn order from 1 and rebuilds the Q&A sets.
inline Call filter_turns(const Call& call, std::size_t min_tokens = kMinTurnTokens) {
  Call out = call;
  out.turns.clear();
  for (const auto& t : call.turns) {
    if (t.speaker_type == SpeakerType::Operator || t.token_count() < min_tokens) continue;
    out.turns.push_back(t);
  }
  if (out.turns.empty()) throw Error(Errc::EmptyCall, "no turns left after filtering in call '" + call.id + "'");
  for (std::size_t i = 0; i < out.turns.size(); ++i) out.turns[i].turn_order = static_cast<int>(i + 1);
  out.qa_sets = segment_qa(out);
  return out;
}

inline Annotation annotate(std::string_view text, const Annotator& annotator) { return annotator.annotate(text); }

struct BuildReport {
  std::size_t raw_turns = 0;
  std::size_t operator_turns_removed = 0;
  std::size_t short_turns_removed = 0;
  bool no_operator_fallback = false;
  std::vector<std::string> notes;
};

/// Full preprocessing of one transcript: speaker typing, section labels,
/// annotation, entity lexicalization, filtering and Q&A segmentation. The
/// short-turn filter counts tokens after lexicalization. When
/// `pre_annotated` is given it must hold one annotation per raw turn and
/// replaces the annotator.
inline Call build_call(const RawTranscript& raw, const Annotator& annotator,
                       const std::vector<Annotation>* pre_annotated = nullptr, BuildReport* report = nullptr) {
  if (pre_annotated && pre_annotated->size() != raw.body.size())
    throw Error(Errc::MalformedInput, "annotation sidecar has " + std::to_string(pre_annotated->size()) +
                                          " turns, transcript has " + std::to_string(raw.body.size()));
  const SpeakerAssignment speakers = classify_speakers(raw);
  Call call;
  call.id = raw.source_id.empty() ? raw.ticker + "_" + format_date(raw.datetime) : raw.source_id;
  call.ticker = raw.ticker;
  call.datetime = raw.datetime;
  call.sector = raw.sector;
  for (std::size_t i = 0; i < raw.body.size(); ++i) {
    const auto& rt = raw.body[i];
    Turn t;
    t.speaker_name = rt.speaker;
    t.speaker_type = speakers.types.at(rt.speaker);
    t.turn_order = static_cast<int>(i + 1);
    t.section = speakers.qa_start && i >= *speakers.qa_start ? Section::QA : Section::Presentation;
    Annotation ann = pre_annotated ? (*pre_annotated)[i] : annotate(rt.text, annotator);
    t.tokens = std::move(ann.tokens);
    t.sentences = std::move(ann.sentences);
    call.turns.push_back(lexicalize_entities(t));
  }
  if (report) {
    report->raw_turns = raw.body.size();
    report->no_operator_fallback = speakers.no_operator_fallback;
    report->notes = speakers.notes;
    for (const auto& t : call.turns) {
      if (t.speaker_type == SpeakerType::Operator) ++report->operator_turns_removed;
      else if (t.token_count() < kMinTurnTokens) ++report->short_turns_removed;
    }
  }
  return filter_turns(call);
}

}  // namespace ecall
