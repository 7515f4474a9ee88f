#include "vinci/speech/speech.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "vinci/common/error.hpp"
#include "vinci/common/text.hpp"

namespace vinci::speech {

namespace {

bool is_wake_punct(char c) {
  return c == ',' || c == '.' || c == '!' || c == '?' || c == ';' || c == ':';
}

bool is_word_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '\'' || u >= 0x80;
}

/// Lowercased text with wake punctuation removed and whitespace runs folded
/// to one space. origin[i] is the index in `s` of normalized[i].
struct Normalized {
  std::string chars;
  std::vector<std::size_t> origin;
};

Normalized normalize(std::string_view s) {
  Normalized n;
  bool pending_space = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (is_wake_punct(c)) continue;
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !n.chars.empty();
      continue;
    }
    if (pending_space) {
      n.chars.push_back(' ');
      n.origin.push_back(i);
      pending_space = false;
    }
    n.chars.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    n.origin.push_back(i);
  }
  return n;
}

}  // namespace

std::optional<std::string> detect_wake(const Transcript& transcript, const WakeConfig& config) {
  require(config.enabled, "wake detection called with wake gate disabled");
  const std::string keyword = normalize(config.keyword).chars;
  require(!keyword.empty(), "wake keyword must be nonempty");

  const Normalized hay = normalize(transcript.text);
  std::size_t from = 0;
  while (true) {
    std::size_t at = hay.chars.find(keyword, from);
    if (at == std::string::npos) return std::nullopt;
    const std::size_t end = at + keyword.size();
    bool left_ok = at == 0 || !is_word_char(hay.chars[at - 1]);
    bool right_ok = end == hay.chars.size() || !is_word_char(hay.chars[end]);
    if (left_ok && right_ok) {
      std::size_t cut = hay.origin[end - 1] + 1;
      std::string_view rest = std::string_view(transcript.text).substr(cut);
      while (!rest.empty() &&
             (is_wake_punct(rest.front()) || std::isspace(static_cast<unsigned char>(rest.front())))) {
        rest.remove_prefix(1);
      }
      rest = text::trim(rest);
      if (rest.empty()) return std::nullopt;
      return std::string(rest);
    }
    from = at + 1;
  }
}

std::pair<double, double> AsrRequest::span() const {
  bool any = false;
  double t0 = 0.0;
  double t1 = 0.0;
  auto extend = [&](double a, double b) {
    t0 = any ? std::min(t0, a) : a;
    t1 = any ? std::max(t1, b) : b;
    any = true;
  };
  for (const auto& a : audio) {
    if (!a.samples.empty()) extend(a.seconds(), a.seconds() + a.duration());
  }
  for (const auto& c : captions) extend(c.seconds(), c.seconds());
  require(any, "ASR request spans no audio");
  return {t0, t1};
}

Transcript MockAsr::transcribe(const AsrRequest& request) {
  auto [t0, t1] = request.span();
  std::string joined;
  for (const auto& c : request.captions) {
    if (!joined.empty()) joined += ' ';
    joined += c.text;
  }
  return {joined, t0, t1};
}

media::AudioChunk MockTts::synthesize(std::string_view text) {
  require(!text::trim(text).empty(), "TTS text must be nonempty");
  const std::size_t words = text::word_count(text);
  const auto count =
      static_cast<std::size_t>(std::llround(kSecondsPerWord * static_cast<double>(words) * kSampleRate));
  media::AudioChunk out;
  out.sample_rate = kSampleRate;
  out.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    double phase = 2.0 * std::numbers::pi * kToneHz * static_cast<double>(i) / kSampleRate;
    out.samples[i] = static_cast<std::int16_t>(std::lround(0.3 * 32767.0 * std::sin(phase)));
  }
  return out;
}

std::vector<std::uint8_t> pcm_bytes(const std::vector<std::int16_t>& samples) {
  std::vector<std::uint8_t> out;
  out.reserve(samples.size() * 2);
  for (std::int16_t s : samples) {
    auto u = static_cast<std::uint16_t>(s);
    out.push_back(static_cast<std::uint8_t>(u & 0xFF));
    out.push_back(static_cast<std::uint8_t>(u >> 8));
  }
  return out;
}

std::vector<std::int16_t> pcm_samples(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() % 2 != 0) fail(ErrorCode::SchemaViolation, "odd PCM byte count");
  std::vector<std::int16_t> out(bytes.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::int16_t>(static_cast<std::uint16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8)));
  }
  return out;
}

Transcript HttpAsr::transcribe(const AsrRequest& request) {
  auto [t0, t1] = request.span();
  std::vector<std::int16_t> samples;
  std::uint32_t rate = 16000;
  for (const auto& a : request.audio) {
    rate = a.sample_rate;
    samples.insert(samples.end(), a.samples.begin(), a.samples.end());
  }
  nlohmann::json body = {{"sample_rate", rate},
                         {"pcm_base64", text::base64_encode(pcm_bytes(samples))},
                         {"t0", t0},
                         {"t1", t1}};
  auto reply = post_json(endpoint_, body, ErrorCode::AsrUnavailable);
  if (!reply.is_object() || !reply.contains("text") || !reply["text"].is_string()) {
    fail(ErrorCode::AsrUnavailable, "ASR reply lacks a text field");
  }
  return {reply["text"].get<std::string>(), t0, t1};
}

media::AudioChunk HttpTts::synthesize(std::string_view text) {
  require(!text::trim(text).empty(), "TTS text must be nonempty");
  auto reply = post_json(endpoint_, {{"text", std::string(text)}}, ErrorCode::TtsUnavailable);
  try {
    media::AudioChunk out;
    out.sample_rate = reply.at("sample_rate").get<std::uint32_t>();
    out.samples = pcm_samples(text::base64_decode(reply.at("pcm_base64").get<std::string>()));
    if (out.sample_rate == 0) fail(ErrorCode::TtsUnavailable, "TTS reply has zero sample rate");
    return out;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::TtsUnavailable, std::string("malformed TTS reply: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::TtsUnavailable) throw;
    fail(ErrorCode::TtsUnavailable, e.what());
  }
}

}  // namespace vinci::speech
