#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ecall {

enum class Errc {
  MalformedInput,
  MissingMetadata,
  EmptyCall,
  IoFailure,
  EmptyLexicon,
  UnknownEntityLabel,
  ConstantVector,
  LengthMismatch,
  InsufficientData,
  EmptyAnalystSet,
  NoTrainingStats,
  NoQASection,
  InvalidArgument,
  SingularSystem,
  DegenerateBases,
  MissingFeatures,
  ModelNotFound,
  LeakageViolation,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::MalformedInput: return "MalformedInput";
    case Errc::MissingMetadata: return "MissingMetadata";
    case Errc::EmptyCall: return "EmptyCall";
    case Errc::IoFailure: return "IoFailure";
    case Errc::EmptyLexicon: return "EmptyLexicon";
    case Errc::UnknownEntityLabel: return "UnknownEntityLabel";
    case Errc::ConstantVector: return "ConstantVector";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::EmptyAnalystSet: return "EmptyAnalystSet";
    case Errc::NoTrainingStats: return "NoTrainingStats";
    case Errc::NoQASection: return "NoQASection";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::DegenerateBases: return "DegenerateBases";
    case Errc::MissingFeatures: return "MissingFeatures";
    case Errc::ModelNotFound: return "ModelNotFound";
    case Errc::LeakageViolation: return "LeakageViolation";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can branch on the kind of error.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ecall
