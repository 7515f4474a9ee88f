#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vinci/common/remote.hpp"
#include "vinci/media/types.hpp"

namespace vinci::speech {

struct Transcript {
  std::string text;
  double t0 = 0.0;
  double t1 = 0.0;

  bool operator==(const Transcript&) const = default;
};

struct WakeConfig {
  std::string keyword = "hi vinci";
  bool enabled = true;
};

/// Returns the query that follows the first occurrence of the wake keyword.
/// Matching ignores case and the punctuation , . ! ? ; : and only accepts
/// whole-word occurrences. A bare keyword (empty remainder) yields nullopt.
std::optional<std::string> detect_wake(const Transcript& transcript, const WakeConfig& config);

/// One utterance worth of input: raw audio plus any interleaved text chunks.
struct AsrRequest {
  std::vector<media::AudioChunk> audio;
  std::vector<media::TextChunk> captions;

  /// Span of the source media; throws PreconditionViolation when empty.
  std::pair<double, double> span() const;
};

class AsrAdapter {
 public:
  virtual ~AsrAdapter() = default;
  virtual Transcript transcribe(const AsrRequest& request) = 0;
};

class TtsAdapter {
 public:
  virtual ~TtsAdapter() = default;
  virtual media::AudioChunk synthesize(std::string_view text) = 0;
};

/// Returns the interleaved text chunks verbatim; audio bytes are ignored.
class MockAsr final : public AsrAdapter {
 public:
  Transcript transcribe(const AsrRequest& request) override;
};

/// 440 Hz sine at 16 kHz lasting 0.06 s per word.
class MockTts final : public TtsAdapter {
 public:
  static constexpr std::uint32_t kSampleRate = 16000;
  static constexpr double kSecondsPerWord = 0.06;
  static constexpr double kToneHz = 440.0;

  media::AudioChunk synthesize(std::string_view text) override;
};

/// Request {"sample_rate", "pcm_base64", "t0", "t1"} -> reply {"text"}.
class HttpAsr final : public AsrAdapter {
 public:
  explicit HttpAsr(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  Transcript transcribe(const AsrRequest& request) override;

 private:
  RemoteEndpoint endpoint_;
};

/// Request {"text"} -> reply {"sample_rate", "pcm_base64"}.
class HttpTts final : public TtsAdapter {
 public:
  explicit HttpTts(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  media::AudioChunk synthesize(std::string_view text) override;

 private:
  RemoteEndpoint endpoint_;
};

std::vector<std::uint8_t> pcm_bytes(const std::vector<std::int16_t>& samples);
std::vector<std::int16_t> pcm_samples(const std::vector<std::uint8_t>& bytes);

}  // namespace vinci::speech
