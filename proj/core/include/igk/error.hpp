#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace igk {

enum class ErrorCode {
  DegenerateInput,
  DegenerateVector,
  DegenerateTarget,
  DegenerateEncoding,
  DegenerateRotation,
  MismatchedSkeleton,
  MissingJoint,
  MissingLandmark,
  EmptyEvaluationSet,
  EmptyBeats,
  DimensionMismatch,
  InsufficientSamples,
  TooShort,
  NonFinite,
  SchemaError,
  InvariantViolation,
  UnsupportedFormat,
  CorruptHeader,
  RatioIndivisible,
  EmptyPool,
  NotAimed,
  UnknownScheme,
  UnpairedClip,
  IncompatiblePair,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library. `path` locates the offending field
// (e.g. "motion.joint_rotations_6d[3][5]") when the error comes from a document.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string path = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& path() const noexcept { return path_; }

 private:
  ErrorCode code_;
  std::string path_;
};

}  // namespace igk
