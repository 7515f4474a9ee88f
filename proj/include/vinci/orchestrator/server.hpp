#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vinci/media/types.hpp"
#include "vinci/orchestrator/backends.hpp"
#include "vinci/orchestrator/config.hpp"
#include "vinci/orchestrator/session.hpp"

namespace vinci::orchestrator {

using AdapterFactory = std::function<Adapters(const Config&, std::shared_ptr<Clock>)>;

/// HTTP + WebSocket front door and per-session TCP ingest.
///
///   GET    /healthz               -> {"status": "ok"}
///   POST   /sessions              -> {"session_id", "ingest_port", "ws_url"}
///   GET    /sessions/{id}/stats   -> {"latency_mean_s", "latency_std_s", "queries", "memory_len"}
///   GET    /sessions/{id}/frame   -> latest frame as BMP
///   DELETE /sessions/{id}
///   GET    /clips/{name}          -> generated VNCI clip
///   WS     /sessions/{id}/ws      -> session messages; accepts "query"
class Server {
 public:
  explicit Server(Config config, AdapterFactory factory = nullptr);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts the worker threads. Port 0 picks a free port.
  void start();
  /// start(), then blocks until SIGINT/SIGTERM or stop().
  void run();
  void stop();

  std::uint16_t port() const;
  std::shared_ptr<Session> session(const std::string& id) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// 24-bit bottom-up BMP of an RGB frame.
std::string encode_bmp(const media::TimedFrame& frame);

}  // namespace vinci::orchestrator
