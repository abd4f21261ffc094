#pragma once

// JSON persistence for annotated calls and the optional `.ann.json`
// annotation sidecar.

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ecall/corpus.hpp"

namespace ecall {

namespace detail {

inline nlohmann::json token_to_json(const AnnotatedToken& t) {
  nlohmann::json j = {{"surface", t.surface}, {"ptb", t.ptb}, {"ud", t.ud}};
  j["entity"] = t.entity ? nlohmann::json(*t.entity) : nlohmann::json(nullptr);
  j["span_id"] = t.span_id ? nlohmann::json(*t.span_id) : nlohmann::json(nullptr);
  return j;
}

inline AnnotatedToken token_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("surface") || !j.contains("ptb") || !j.contains("ud"))
    throw Error(Errc::MalformedInput, "token needs surface, ptb and ud");
  AnnotatedToken t;
  t.surface = j.at("surface").get<std::string>();
  t.ptb = j.at("ptb").get<std::string>();
  t.ud = j.at("ud").get<std::string>();
  if (!is_ptb_tag(t.ptb)) throw Error(Errc::MalformedInput, "unknown PTB tag '" + t.ptb + "'");
  if (!is_ud_tag(t.ud)) throw Error(Errc::MalformedInput, "unknown UD tag '" + t.ud + "'");
  if (j.contains("entity") && j["entity"].is_string()) t.entity = j["entity"].get<std::string>();
  if (j.contains("span_id") && j["span_id"].is_number_integer()) t.span_id = j["span_id"].get<int>();
  if (t.entity.has_value() != t.span_id.has_value())
    throw Error(Errc::MalformedInput, "token '" + t.surface + "': entity and span_id must come together");
  return t;
}

}  // namespace detail

/// Sidecar layout: a JSON array with one entry per raw turn; each entry is an
/// array of `{surface, ptb, ud, entity, span_id}` token objects. Sentence
/// boundaries are recovered from sentence-final punctuation.
inline std::vector<Annotation> parse_annotation_sidecar(std::string_view bytes) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedInput, e.what());
  }
  if (!doc.is_array()) throw Error(Errc::MalformedInput, "sidecar must be an array of turns");
  std::vector<Annotation> out;
  for (const auto& turn : doc) {
    if (!turn.is_array()) throw Error(Errc::MalformedInput, "sidecar turn must be an array of tokens");
    Annotation ann;
    for (const auto& tok : turn) ann.tokens.push_back(detail::token_from_json(tok));
    ann.sentences = sentences_from_punctuation(ann.tokens);
    out.push_back(std::move(ann));
  }
  return out;
}

inline std::string annotation_sidecar_json(const std::vector<Annotation>& turns) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& ann : turns) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : ann.tokens) arr.push_back(detail::token_to_json(t));
    doc.push_back(std::move(arr));
  }
  return doc.dump();
}

inline nlohmann::json call_to_json(const Call& call) {
  nlohmann::json j;
  j["id"] = call.id;
  j["ticker"] = call.ticker;
  j["datetime"] = format_timestamp(call.datetime);
  j["sector"] = call.sector;
  j["turns"] = nlohmann::json::array();
  for (const auto& t : call.turns) {
    nlohmann::json jt;
    jt["speaker"] = t.speaker_name;
    jt["speaker_type"] = std::string(to_string(t.speaker_type));
    jt["turn_order"] = t.turn_order;
    jt["section"] = std::string(to_string(t.section));
    jt["tokens"] = nlohmann::json::array();
    for (const auto& tok : t.tokens) jt["tokens"].push_back(detail::token_to_json(tok));
    jt["sentences"] = nlohmann::json::array();
    for (const auto& s : t.sentences) jt["sentences"].push_back({s.begin, s.end});
    j["turns"].push_back(std::move(jt));
  }
  j["qa_sets"] = nlohmann::json::array();
  for (const auto& qa : call.qa_sets) j["qa_sets"].push_back({{"question", qa.question}, {"answers", qa.answers}});
  return j;
}

inline Call call_from_json(const nlohmann::json& j) {
  try {
    Call call;
    call.id = j.at("id").get<std::string>();
    call.ticker = j.at("ticker").get<std::string>();
    call.datetime = parse_timestamp(j.at("datetime").get<std::string>());
    call.sector = j.at("sector").get<std::string>();
    for (const auto& jt : j.at("turns")) {
      Turn t;
      t.speaker_name = jt.at("speaker").get<std::string>();
      const auto type = jt.at("speaker_type").get<std::string>();
      t.speaker_type = type == "Analyst"      ? SpeakerType::Analyst
                       : type == "CompanyRep" ? SpeakerType::CompanyRep
                                              : SpeakerType::Operator;
      t.turn_order = jt.at("turn_order").get<int>();
      t.section = jt.at("section").get<std::string>() == "QA" ? Section::QA : Section::Presentation;
      for (const auto& tok : jt.at("tokens")) t.tokens.push_back(detail::token_from_json(tok));
      for (const auto& s : jt.at("sentences")) t.sentences.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>()});
      call.turns.push_back(std::move(t));
    }
    for (const auto& q : j.at("qa_sets"))
      call.qa_sets.push_back({q.at("question").get<std::size_t>(), q.at("answers").get<std::vector<std::size_t>>()});
    return call;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedInput, std::string("annotated call: ") + e.what());
  }
}

}  // namespace ecall
