#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vinci {

/// Every failure the runtime reports carries one of these codes so callers
/// (and tests) can branch on the kind of failure rather than on message text.
enum class ErrorCode {
  PreconditionViolation,
  MalformedChunk,
  NonMonotoneTimestamp,
  EmptyBuffer,
  AsrUnavailable,
  TtsUnavailable,
  EncoderUnavailable,
  ModelUnavailable,
  DimensionMismatch,
  ZeroVector,
  DuplicateId,
  EmptyInput,
  InvalidRange,
  ShapeMismatch,
  NonFinite,
  SchemaViolation,
  SessionClosed,
  QueueFull,
  ScriptMismatch,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& detail);

inline void require(bool condition, const std::string& detail) {
  if (!condition) fail(ErrorCode::PreconditionViolation, detail);
}

}  // namespace vinci
