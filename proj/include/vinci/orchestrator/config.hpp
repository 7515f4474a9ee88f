#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>

#include "vinci/common/remote.hpp"

namespace vinci::orchestrator {

/// One adapter slot: "mock" or "http" plus the remote endpoint for http.
struct AdapterConfig {
  std::string kind = "mock";
  RemoteEndpoint endpoint;
  double mock_delay_s = 0.0;  // simulated cost of a mock call, charged to the session clock
};

struct Config {
  std::string wake_keyword = "hi vinci";
  bool wake_enabled = true;

  std::size_t memory_capacity = 128;
  double snapshot_interval_s = 4.0;

  double buffer_s = 30.0;
  double snippet_s = 2.0;
  double asr_segment_s = 3.0;  // audio is flushed to ASR once this much accumulates
  double frame_notify_hz = 2.0;

  std::size_t queue_depth = 8;

  std::string host = "127.0.0.1";
  std::uint16_t port = 8080;
  std::string ingest_host = "127.0.0.1";

  // generation backend
  std::filesystem::path clip_dir = "vinci-clips";
  int gen_steps = 50;
  std::size_t gen_frames = 16;
  double gen_fps = 8.0;
  std::size_t vae_factor = 8;
  double gen_spread = 0.05;
  std::uint64_t gen_seed = 0;

  // retrieval backend: a saved index, or a JSON-lines catalog {id, uri, caption}
  std::filesystem::path retrieval_index;
  std::filesystem::path retrieval_catalog;

  AdapterConfig asr, tts, encoder, captioner, model, embedder, generator;
};

/// Values of a parsed TOML-subset document keyed by "section.key".
using TomlValue = std::variant<bool, std::int64_t, double, std::string>;
using TomlTable = std::map<std::string, TomlValue>;

/// Parses tables ([a.b]), bare keys, strings, integers, floats, booleans and
/// comments. Throws SchemaViolation with the line number on anything else.
TomlTable parse_toml(const std::string& content);

/// Applies a parsed table over the defaults. Unknown keys and wrong value
/// types are SchemaViolation.
Config config_from_toml(const TomlTable& table);
Config load_config(const std::filesystem::path& path);

}  // namespace vinci::orchestrator
