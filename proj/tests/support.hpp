#pragma once

// Builders for hand-annotated tokens and turns, and scratch directories.

#include <atomic>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <unistd.h>
#include <vector>

#include "ecall/corpus.hpp"
#include "ecall/lexicons.hpp"

namespace ecall::test {

inline AnnotatedToken word(std::string surface, std::string ptb = "NN", std::string ud = "NOUN") {
  return {std::move(surface), std::move(ptb), std::move(ud), std::nullopt, std::nullopt};
}

inline AnnotatedToken punct(std::string surface) { return {std::move(surface), ".", "PUNCT", std::nullopt, std::nullopt}; }

inline AnnotatedToken entity(std::string surface, std::string label, int span, std::string ptb = "CD",
                             std::string ud = "NUM") {
  return {std::move(surface), std::move(ptb), std::move(ud), std::move(label), span};
}

/// Plain nouns, one per surface.
inline std::vector<AnnotatedToken> words(std::initializer_list<const char*> surfaces) {
  std::vector<AnnotatedToken> out;
  for (const char* s : surfaces) out.push_back(word(s));
  return out;
}

/// A turn whose sentences are cut at sentence-final punctuation.
inline Turn make_turn(std::vector<AnnotatedToken> tokens, SpeakerType type = SpeakerType::Analyst,
                      Section section = Section::QA, int order = 1, std::string speaker = "Speaker") {
  Turn t;
  t.speaker_name = std::move(speaker);
  t.speaker_type = type;
  t.section = section;
  t.turn_order = order;
  t.sentences = sentences_from_punctuation(tokens);
  t.tokens = std::move(tokens);
  return t;
}

inline Lexicon make_lexicon(std::initializer_list<const char*> entries,
                            LexiconCategory category = LexiconCategory::HedgeUni) {
  Lexicon lex;
  lex.category = category;
  for (const char* e : entries) add_entry(lex, entry_tokens(e));
  return lex;
}

/// A fresh, empty directory under the system temp path, removed on scope exit.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("ecall-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace ecall::test
