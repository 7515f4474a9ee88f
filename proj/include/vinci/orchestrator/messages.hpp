#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vinci/model/gateway.hpp"
#include "vinci/model/intent.hpp"

namespace vinci::orchestrator {

struct TranscriptMsg {
  std::string text;
  bool operator==(const TranscriptMsg&) const = default;
};

struct ResponseMsg {
  std::string query_id;
  std::string text;
  model::IntentKind intent = model::IntentKind::Chat;
  double latency_s = 0.0;
  bool operator==(const ResponseMsg&) const = default;
};

struct TtsAudioMsg {
  std::string pcm_base64;  // 16-bit little-endian mono
  std::uint32_t sample_rate = 16000;
  bool operator==(const TtsAudioMsg&) const = default;
};

struct GeneratedVideoMsg {
  std::string uri;
  double duration_s = 0.0;
  bool operator==(const GeneratedVideoMsg&) const = default;
};

struct RetrievedVideosMsg {
  std::vector<model::RetrievedVideo> items;
  bool operator==(const RetrievedVideosMsg&) const = default;
};

enum class StatusLevel { Info, Warning, Error };

struct StatusMsg {
  StatusLevel level = StatusLevel::Info;
  std::string detail;
  bool operator==(const StatusMsg&) const = default;
};

/// A new frame is available at GET /sessions/{id}/frame.
struct FrameNotifyMsg {
  double frame_t = 0.0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  bool operator==(const FrameNotifyMsg&) const = default;
};

/// Client -> server typed query.
struct QueryMsg {
  std::string text;
  bool operator==(const QueryMsg&) const = default;
};

using Payload = std::variant<TranscriptMsg, ResponseMsg, TtsAudioMsg, GeneratedVideoMsg, RetrievedVideosMsg,
                             StatusMsg, FrameNotifyMsg, QueryMsg>;

struct WsMessage {
  std::string session_id;
  double t = 0.0;  // seconds since session start
  Payload payload;
  bool operator==(const WsMessage&) const = default;
};

/// "transcript", "response", "tts_audio", "generated_video",
/// "retrieved_videos", "status", "frame_notify" or "query".
std::string_view type_name(const Payload& payload);
std::string_view to_string(StatusLevel level);

/// Throws SchemaViolation if the message breaks a field constraint.
void validate(const WsMessage& message);

/// One JSON text frame. Throws SchemaViolation on invalid messages.
std::string ws_encode(const WsMessage& message);
/// Inverse of ws_encode. Unknown types, missing or mistyped fields, and
/// broken JSON are SchemaViolation; unrecognized extra fields are ignored.
WsMessage ws_decode(std::string_view frame);

}  // namespace vinci::orchestrator
