#include "vinci/orchestrator/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>

#include "vinci/common/error.hpp"
#include "vinci/common/json_lines.hpp"
#include "vinci/common/text.hpp"

namespace vinci::orchestrator {

namespace {

[[noreturn]] void bad_line(std::size_t line, const std::string& what) {
  fail(ErrorCode::SchemaViolation, "config line " + std::to_string(line) + ": " + what);
}

bool is_bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

bool valid_key(std::string_view key) {
  if (key.empty()) return false;
  for (char c : key) {
    if (!is_bare_key_char(c) && c != '.') return false;
  }
  return key.front() != '.' && key.back() != '.' && key.find("..") == std::string_view::npos;
}

/// Parses a basic "..." string starting at s[0]; returns the value and the
/// number of characters consumed.
std::pair<std::string, std::size_t> parse_string(std::string_view s, std::size_t line) {
  std::string out;
  for (std::size_t i = 1; i < s.size(); ++i) {
    char c = s[i];
    if (c == '"') return {out, i + 1};
    if (c != '\\') {
      out += c;
      continue;
    }
    if (++i >= s.size()) break;
    switch (s[i]) {
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      default: bad_line(line, "unsupported escape");
    }
  }
  bad_line(line, "unterminated string");
}

TomlValue parse_value(std::string_view raw, std::size_t line) {
  std::string_view v = text::trim(raw);
  if (v.empty()) bad_line(line, "missing value");
  if (v.front() == '"') {
    auto [value, used] = parse_string(v, line);
    auto rest = text::trim(v.substr(used));
    if (!rest.empty() && rest.front() != '#') bad_line(line, "trailing characters after string");
    return value;
  }
  if (auto hash = v.find('#'); hash != std::string_view::npos) v = text::trim(v.substr(0, hash));
  if (v == "true") return true;
  if (v == "false") return false;
  std::string digits;
  for (char c : v) {
    if (c != '_') digits += c;
  }
  const char* first = digits.data();
  const char* last = first + digits.size();
  if (digits.find_first_of(".eE") == std::string::npos || digits == "inf" || digits == "nan") {
    std::int64_t n = 0;
    auto [p, ec] = std::from_chars(first + (digits.starts_with('+') ? 1 : 0), last, n);
    if (ec == std::errc() && p == last) return n;
  } else {
    double d = 0.0;
    auto [p, ec] = std::from_chars(first + (digits.starts_with('+') ? 1 : 0), last, d);
    if (ec == std::errc() && p == last && std::isfinite(d)) return d;
  }
  bad_line(line, "unrecognized value '" + std::string(v) + "'");
}

template <typename T>
const T& expect(const TomlValue& value, const std::string& key, const char* type) {
  if (auto* p = std::get_if<T>(&value)) return *p;
  fail(ErrorCode::SchemaViolation, "config key " + key + " must be " + type);
}

double as_number(const TomlValue& value, const std::string& key) {
  if (auto* i = std::get_if<std::int64_t>(&value)) return static_cast<double>(*i);
  return expect<double>(value, key, "a number");
}

std::int64_t as_int(const TomlValue& value, const std::string& key, std::int64_t lo, std::int64_t hi) {
  auto n = expect<std::int64_t>(value, key, "an integer");
  if (n < lo || n > hi) {
    fail(ErrorCode::SchemaViolation, "config key " + key + " out of range [" + std::to_string(lo) + ", " +
                                         std::to_string(hi) + "]");
  }
  return n;
}

double as_positive(const TomlValue& value, const std::string& key) {
  double d = as_number(value, key);
  if (!(d > 0.0)) fail(ErrorCode::SchemaViolation, "config key " + key + " must be > 0");
  return d;
}

using Setter = std::function<void(Config&, const TomlValue&, const std::string&)>;

void add_adapter_keys(std::map<std::string, Setter>& keys, const std::string& name,
                      AdapterConfig Config::*slot) {
  const std::string prefix = "adapters." + name + ".";
  keys[prefix + "kind"] = [slot](Config& c, const TomlValue& v, const std::string& k) {
    auto kind = expect<std::string>(v, k, "a string");
    if (kind != "mock" && kind != "http") fail(ErrorCode::SchemaViolation, k + " must be \"mock\" or \"http\"");
    (c.*slot).kind = kind;
  };
  keys[prefix + "url"] = [slot](Config& c, const TomlValue& v, const std::string& k) {
    (c.*slot).endpoint.url = expect<std::string>(v, k, "a string");
  };
  keys[prefix + "api_key_env"] = [slot](Config& c, const TomlValue& v, const std::string& k) {
    (c.*slot).endpoint.api_key_env = expect<std::string>(v, k, "a string");
  };
  keys[prefix + "timeout_ms"] = [slot](Config& c, const TomlValue& v, const std::string& k) {
    (c.*slot).endpoint.timeout_ms = static_cast<int>(as_int(v, k, 1, 600000));
  };
  keys[prefix + "mock_delay_s"] = [slot](Config& c, const TomlValue& v, const std::string& k) {
    double d = as_number(v, k);
    if (!(d >= 0.0)) fail(ErrorCode::SchemaViolation, k + " must be >= 0");
    (c.*slot).mock_delay_s = d;
  };
}

const std::map<std::string, Setter>& known_keys() {
  static const auto keys = [] {
    std::map<std::string, Setter> k;
    k["wake.keyword"] = [](Config& c, const TomlValue& v, const std::string& key) {
      c.wake_keyword = expect<std::string>(v, key, "a string");
      if (text::trim(c.wake_keyword).empty()) fail(ErrorCode::SchemaViolation, key + " must be nonempty");
    };
    k["wake.enabled"] = [](Config& c, const TomlValue& v, const std::string& key) {
      c.wake_enabled = expect<bool>(v, key, "a boolean");
    };
    k["memory.capacity"] = [](Config& c, const TomlValue& v, const std::string& key) {
      c.memory_capacity = static_cast<std::size_t>(as_int(v, key, 1, 1 << 20));
    };
    k["memory.snapshot_interval_s"] = [](Config& c, const TomlValue& v, const std::string& key) {
      c.snapshot_interval_s = as_positive(v, key);
    };
    k["stream.buffer_s"] = [](Config& c, const TomlValue& v, const std::string& key) {
      c.buffer_s = as_positive(v, key);
    };
    k["stream.snippet_s"] = [](Config& c, const TomlValue& v, const std::string& key) {
      c.snippet_s = as_positive(v, key);
    };
    k["stream.asr_segment_s"] = [](Config& c, const TomlValue& v, const std::string& key) {
      c.asr_segment_s = as_positive(v, key);
    };
    k["stream.frame_notify_hz"] = [](Config& c, const TomlValue& v, const std::string& key) {
      c.frame_notify_hz = as_positive(v, key);
    };
    k["queue.max_depth"] = [](Config& c, const TomlValue& v, const std::string& key) {
      c.queue_depth = static_cast<std::size_t>(as_int(v, key, 1, 1 << 16));
    };
    k["server.host"] = [](Config& c, const TomlValue& v, const std::string& key) {
      c.host = expect<std::string>(v, key, "a string");
    };
    k["server.port"] = [](Config& c, const TomlValue& v, const std::string& key) {
      c.port = static_cast<std::uint16_t>(as_int(v, key, 0, 65535));
    };
    k["server.ingest_host"] = [](Config& c, const TomlValue& v, const std::string& key) {
      c.ingest_host = expect<std::string>(v, key, "a string");
    };
    k["generation.clip_dir"] = [](Config& c, const TomlValue& v, const std::string& key) {
      c.clip_dir = expect<std::string>(v, key, "a string");
    };
    k["generation.steps"] = [](Config& c, const TomlValue& v, const std::string& key) {
      c.gen_steps = static_cast<int>(as_int(v, key, 1, 1000));
    };
    k["generation.frames"] = [](Config& c, const TomlValue& v, const std::string& key) {
      c.gen_frames = static_cast<std::size_t>(as_int(v, key, 1, 1024));
    };
    k["generation.fps"] = [](Config& c, const TomlValue& v, const std::string& key) {
      c.gen_fps = as_positive(v, key);
    };
    k["generation.vae_factor"] = [](Config& c, const TomlValue& v, const std::string& key) {
      c.vae_factor = static_cast<std::size_t>(as_int(v, key, 1, 64));
    };
    k["generation.spread"] = [](Config& c, const TomlValue& v, const std::string& key) {
      double d = as_number(v, key);
      if (!(d >= 0.0)) fail(ErrorCode::SchemaViolation, key + " must be >= 0");
      c.gen_spread = d;
    };
    k["generation.seed"] = [](Config& c, const TomlValue& v, const std::string& key) {
      c.gen_seed = static_cast<std::uint64_t>(as_int(v, key, 0, INT64_MAX));
    };
    k["retrieval.index"] = [](Config& c, const TomlValue& v, const std::string& key) {
      c.retrieval_index = expect<std::string>(v, key, "a string");
    };
    k["retrieval.catalog"] = [](Config& c, const TomlValue& v, const std::string& key) {
      c.retrieval_catalog = expect<std::string>(v, key, "a string");
    };
    add_adapter_keys(k, "asr", &Config::asr);
    add_adapter_keys(k, "tts", &Config::tts);
    add_adapter_keys(k, "encoder", &Config::encoder);
    add_adapter_keys(k, "captioner", &Config::captioner);
    add_adapter_keys(k, "model", &Config::model);
    add_adapter_keys(k, "embedder", &Config::embedder);
    add_adapter_keys(k, "generator", &Config::generator);
    return k;
  }();
  return keys;
}

}  // namespace

TomlTable parse_toml(const std::string& content) {
  TomlTable table;
  std::string section;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    std::string_view line = text::trim(std::string_view(content).substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      auto close = line.find(']');
      if (close == std::string_view::npos) bad_line(line_no, "unterminated table header");
      auto rest = text::trim(line.substr(close + 1));
      if (!rest.empty() && rest.front() != '#') bad_line(line_no, "trailing characters after table header");
      section = std::string(text::trim(line.substr(1, close - 1)));
      if (!valid_key(section)) bad_line(line_no, "invalid table name");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos) bad_line(line_no, "expected key = value");
    std::string key(text::trim(line.substr(0, eq)));
    if (!valid_key(key)) bad_line(line_no, "invalid key '" + key + "'");
    std::string full = section.empty() ? key : section + "." + key;
    if (table.count(full)) bad_line(line_no, "duplicate key " + full);
    table[full] = parse_value(line.substr(eq + 1), line_no);
  }
  return table;
}

Config config_from_toml(const TomlTable& table) {
  Config config;
  const auto& keys = known_keys();
  for (const auto& [key, value] : table) {
    auto it = keys.find(key);
    if (it == keys.end()) fail(ErrorCode::SchemaViolation, "unknown config key " + key);
    it->second(config, value, key);
  }
  for (const AdapterConfig* a : {&config.asr, &config.tts, &config.encoder, &config.captioner, &config.model,
                                 &config.embedder, &config.generator}) {
    if (a->kind == "http" && a->endpoint.url.empty()) {
      fail(ErrorCode::SchemaViolation, "http adapter configured without a url");
    }
  }
  return config;
}

Config load_config(const std::filesystem::path& path) { return config_from_toml(parse_toml(read_file(path))); }

}  // namespace vinci::orchestrator
