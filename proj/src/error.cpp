#include "posture/error.hpp"

namespace posture {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingJoint: return "MissingJoint";
    case ErrorCode::UnknownJoint: return "UnknownJoint";
    case ErrorCode::NonFiniteCoordinate: return "NonFiniteCoordinate";
    case ErrorCode::DegenerateNormalizer: return "DegenerateNormalizer";
    case ErrorCode::ZeroLengthSegment: return "ZeroLengthSegment";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::FingerprintMismatch: return "FingerprintMismatch";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptModel: return "CorruptModel";
  }
  return "Unknown";
}

bool is_numeric_failure(ErrorCode code) noexcept {
  return code == ErrorCode::NonConvergence || code == ErrorCode::DegenerateCovariance;
}

namespace {

std::string compose(ErrorCode code, const std::string& subject, const std::string& qualifier,
                    std::optional<std::size_t> line, const std::string& message) {
  std::string out;
  if (line) out += "line " + std::to_string(*line) + ": ";
  out += to_string(code);
  if (!subject.empty()) {
    out += "(" + subject;
    if (!qualifier.empty()) out += ", " + qualifier;
    out += ")";
  }
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, std::string subject, std::string qualifier,
             std::optional<std::size_t> line, const std::string& message)
    : std::runtime_error(compose(code, subject, qualifier, line, message)),
      code_(code),
      subject_(std::move(subject)),
      qualifier_(std::move(qualifier)),
      line_(line),
      message_(message) {}

Error with_line(const Error& e, std::size_t line) {
  return Error(e.code(), e.subject(), e.qualifier(), line, e.message());
}

}  // namespace posture
