#include "vinci/orchestrator/messages.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "vinci/common/error.hpp"
#include "vinci/common/text.hpp"

namespace vinci::orchestrator {

namespace {

using nlohmann::json;

[[noreturn]] void violation(const std::string& what) { fail(ErrorCode::SchemaViolation, what); }

const json& field(const json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) violation(std::string("missing field ") + name);
  return *it;
}

std::string get_string(const json& obj, const char* name) {
  const auto& v = field(obj, name);
  if (!v.is_string()) violation(std::string(name) + " must be a string");
  return v.get<std::string>();
}

double get_number(const json& obj, const char* name) {
  const auto& v = field(obj, name);
  if (!v.is_number()) violation(std::string(name) + " must be a number");
  return v.get<double>();
}

std::uint64_t get_unsigned(const json& obj, const char* name, std::uint64_t max) {
  const auto& v = field(obj, name);
  if (v.is_number_unsigned()) {
    auto n = v.get<std::uint64_t>();
    if (n <= max) return n;
  } else if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    auto n = static_cast<std::uint64_t>(v.get<std::int64_t>());
    if (n <= max) return n;
  }
  violation(std::string(name) + " must be a non-negative integer in range");
}

void check_finite(double v, const char* name) {
  if (!std::isfinite(v)) violation(std::string(name) + " must be finite");
}

void check_nonnegative(double v, const char* name) {
  check_finite(v, name);
  if (v < 0.0) violation(std::string(name) + " must be >= 0");
}

StatusLevel level_from_string(const std::string& s) {
  if (s == "info") return StatusLevel::Info;
  if (s == "warning") return StatusLevel::Warning;
  if (s == "error") return StatusLevel::Error;
  violation("unknown status level '" + s + "'");
}

struct Validator {
  void operator()(const TranscriptMsg&) const {}
  void operator()(const ResponseMsg& m) const {
    if (m.query_id.empty()) violation("query_id must be nonempty");
    check_nonnegative(m.latency_s, "latency_s");
  }
  void operator()(const TtsAudioMsg& m) const {
    if (m.sample_rate == 0) violation("sample_rate must be > 0");
    if (text::base64_decode(m.pcm_base64).size() % 2 != 0) violation("pcm_base64 must hold 16-bit samples");
  }
  void operator()(const GeneratedVideoMsg& m) const {
    if (m.uri.empty()) violation("uri must be nonempty");
    check_nonnegative(m.duration_s, "duration_s");
  }
  void operator()(const RetrievedVideosMsg& m) const {
    for (const auto& item : m.items) check_finite(item.score, "score");
  }
  void operator()(const StatusMsg&) const {}
  void operator()(const FrameNotifyMsg& m) const {
    check_finite(m.frame_t, "frame_t");
    if (m.width == 0 || m.height == 0) violation("frame dimensions must be > 0");
  }
  void operator()(const QueryMsg& m) const {
    if (text::trim(m.text).empty()) violation("query text must be nonempty");
  }
};

struct Writer {
  json& out;
  void operator()(const TranscriptMsg& m) const { out["text"] = m.text; }
  void operator()(const ResponseMsg& m) const {
    out["query_id"] = m.query_id;
    out["text"] = m.text;
    out["intent"] = std::string(model::to_string(m.intent));
    out["latency_s"] = m.latency_s;
  }
  void operator()(const TtsAudioMsg& m) const {
    out["pcm_base64"] = m.pcm_base64;
    out["sample_rate"] = m.sample_rate;
  }
  void operator()(const GeneratedVideoMsg& m) const {
    out["uri"] = m.uri;
    out["duration_s"] = m.duration_s;
  }
  void operator()(const RetrievedVideosMsg& m) const {
    json items = json::array();
    for (const auto& v : m.items) {
      items.push_back({{"id", v.id}, {"uri", v.uri}, {"caption", v.caption}, {"score", v.score}});
    }
    out["items"] = std::move(items);
  }
  void operator()(const StatusMsg& m) const {
    out["level"] = std::string(to_string(m.level));
    out["detail"] = m.detail;
  }
  void operator()(const FrameNotifyMsg& m) const {
    out["frame_t"] = m.frame_t;
    out["width"] = m.width;
    out["height"] = m.height;
  }
  void operator()(const QueryMsg& m) const { out["text"] = m.text; }
};

Payload read_payload(const std::string& type, const json& j) {
  constexpr auto kU32 = std::numeric_limits<std::uint32_t>::max();
  if (type == "transcript") return TranscriptMsg{get_string(j, "text")};
  if (type == "response") {
    ResponseMsg m;
    m.query_id = get_string(j, "query_id");
    m.text = get_string(j, "text");
    auto intent = model::intent_from_string(get_string(j, "intent"));
    if (!intent) violation("unknown intent");
    m.intent = *intent;
    m.latency_s = get_number(j, "latency_s");
    return m;
  }
  if (type == "tts_audio") {
    return TtsAudioMsg{get_string(j, "pcm_base64"), static_cast<std::uint32_t>(get_unsigned(j, "sample_rate", kU32))};
  }
  if (type == "generated_video") return GeneratedVideoMsg{get_string(j, "uri"), get_number(j, "duration_s")};
  if (type == "retrieved_videos") {
    const auto& items = field(j, "items");
    if (!items.is_array()) violation("items must be an array");
    RetrievedVideosMsg m;
    for (const auto& item : items) {
      if (!item.is_object()) violation("items entries must be objects");
      m.items.push_back({get_unsigned(item, "id", std::numeric_limits<std::uint64_t>::max()),
                         get_string(item, "uri"), get_string(item, "caption"), get_number(item, "score")});
    }
    return m;
  }
  if (type == "status") return StatusMsg{level_from_string(get_string(j, "level")), get_string(j, "detail")};
  if (type == "frame_notify") {
    return FrameNotifyMsg{get_number(j, "frame_t"), static_cast<std::uint32_t>(get_unsigned(j, "width", kU32)),
                          static_cast<std::uint32_t>(get_unsigned(j, "height", kU32))};
  }
  if (type == "query") return QueryMsg{get_string(j, "text")};
  violation("unknown message type '" + type + "'");
}

}  // namespace

std::string_view type_name(const Payload& payload) {
  static constexpr std::string_view kNames[] = {"transcript", "response",     "tts_audio",    "generated_video",
                                                "retrieved_videos", "status", "frame_notify", "query"};
  return kNames[payload.index()];
}

std::string_view to_string(StatusLevel level) {
  switch (level) {
    case StatusLevel::Info: return "info";
    case StatusLevel::Warning: return "warning";
    case StatusLevel::Error: return "error";
  }
  return "info";
}

void validate(const WsMessage& message) {
  if (message.session_id.empty()) violation("session_id must be nonempty");
  check_finite(message.t, "t");
  std::visit(Validator{}, message.payload);
}

std::string ws_encode(const WsMessage& message) {
  validate(message);
  json out = {{"type", std::string(type_name(message.payload))}, {"session_id", message.session_id}, {"t", message.t}};
  std::visit(Writer{out}, message.payload);
  try {
    return out.dump();
  } catch (const json::type_error& e) {
    violation(std::string("unencodable text: ") + e.what());  // invalid UTF-8
  }
}

WsMessage ws_decode(std::string_view frame) {
  json j;
  try {
    j = json::parse(frame);
  } catch (const json::exception& e) {
    violation(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) violation("message must be a JSON object");
  WsMessage m;
  const std::string type = get_string(j, "type");
  m.session_id = get_string(j, "session_id");
  m.t = get_number(j, "t");
  m.payload = read_payload(type, j);
  validate(m);
  return m;
}

}  // namespace vinci::orchestrator
