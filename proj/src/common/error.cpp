#include "vinci/common/error.hpp"

namespace vinci {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::MalformedChunk: return "MalformedChunk";
    case ErrorCode::NonMonotoneTimestamp: return "NonMonotoneTimestamp";
    case ErrorCode::EmptyBuffer: return "EmptyBuffer";
    case ErrorCode::AsrUnavailable: return "AsrUnavailable";
    case ErrorCode::TtsUnavailable: return "TtsUnavailable";
    case ErrorCode::EncoderUnavailable: return "EncoderUnavailable";
    case ErrorCode::ModelUnavailable: return "ModelUnavailable";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::SessionClosed: return "SessionClosed";
    case ErrorCode::QueueFull: return "QueueFull";
    case ErrorCode::ScriptMismatch: return "ScriptMismatch";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

void fail(ErrorCode code, const std::string& detail) { throw Error(code, detail); }

}  // namespace vinci
