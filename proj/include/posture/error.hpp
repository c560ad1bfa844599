#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace posture {

enum class ErrorCode {
  // skeleton / features
  MissingJoint,
  UnknownJoint,
  NonFiniteCoordinate,
  DegenerateNormalizer,
  ZeroLengthSegment,
  InvalidConfig,
  // classifiers
  EmptyTrainingSet,
  DimensionMismatch,
  SingleClass,
  NonConvergence,
  DegenerateCovariance,
  FingerprintMismatch,
  // evaluation
  ClassTooSmall,
  LengthMismatch,
  EmptyInput,
  // io
  IoError,
  ParseError,
  UnknownLabel,
  VersionMismatch,
  CorruptModel,
};

const char* to_string(ErrorCode code) noexcept;

// Numeric failures (as opposed to bad input data) map to a distinct CLI exit code.
bool is_numeric_failure(ErrorCode code) noexcept;

// Single exception type for the library. `subject` names the offending entity
// (a joint, a label, a file), `qualifier` refines it (an axis, a field).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string subject = {}, std::string qualifier = {},
        std::optional<std::size_t> line = std::nullopt, const std::string& message = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }
  const std::string& qualifier() const noexcept { return qualifier_; }
  std::optional<std::size_t> line() const noexcept { return line_; }
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string subject_;
  std::string qualifier_;
  std::optional<std::size_t> line_;
  std::string message_;
};

// Returns a copy of `e` with the line number attached.
Error with_line(const Error& e, std::size_t line);

}  // namespace posture
