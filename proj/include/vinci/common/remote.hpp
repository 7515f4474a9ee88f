#pragma once

#include <string>

#include <json.hpp>

#include "vinci/common/error.hpp"

namespace vinci {

/// An external model service reached over HTTP+JSON.
struct RemoteEndpoint {
  std::string url;          // e.g. "http://127.0.0.1:9000/asr"
  std::string api_key_env;  // name of the env var holding a bearer token; may be empty
  int timeout_ms = 5000;
};

/// POSTs `body` to the endpoint. A failed attempt (connection error, timeout,
/// non-2xx status, unparsable reply) is retried once; a second failure throws
/// Error(failure_code).
nlohmann::json post_json(const RemoteEndpoint& endpoint, const nlohmann::json& body,
                         ErrorCode failure_code);

}  // namespace vinci
