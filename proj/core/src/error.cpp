#include "igk/error.hpp"

namespace igk {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::DegenerateVector: return "DegenerateVector";
    case ErrorCode::DegenerateTarget: return "DegenerateTarget";
    case ErrorCode::DegenerateEncoding: return "DegenerateEncoding";
    case ErrorCode::DegenerateRotation: return "DegenerateRotation";
    case ErrorCode::MismatchedSkeleton: return "MismatchedSkeleton";
    case ErrorCode::MissingJoint: return "MissingJoint";
    case ErrorCode::MissingLandmark: return "MissingLandmark";
    case ErrorCode::EmptyEvaluationSet: return "EmptyEvaluationSet";
    case ErrorCode::EmptyBeats: return "EmptyBeats";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::CorruptHeader: return "CorruptHeader";
    case ErrorCode::RatioIndivisible: return "RatioIndivisible";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::NotAimed: return "NotAimed";
    case ErrorCode::UnknownScheme: return "UnknownScheme";
    case ErrorCode::UnpairedClip: return "UnpairedClip";
    case ErrorCode::IncompatiblePair: return "IncompatiblePair";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& message, const std::string& path) {
  std::string out(to_string(code));
  out += ": ";
  if (!path.empty()) {
    out += path;
    out += ": ";
  }
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::string path)
    : std::runtime_error(compose(code, message, path)), code_(code), path_(std::move(path)) {}

}  // namespace igk
