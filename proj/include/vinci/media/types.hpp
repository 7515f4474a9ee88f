#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace vinci::media {

/// Stream time in microseconds since stream start.
using Micros = std::int64_t;

inline constexpr double to_seconds(Micros us) { return static_cast<double>(us) / 1e6; }
Micros from_seconds(double seconds);

/// Replay-only annotation; live streams never carry these.
struct FrameLabel {
  std::string verb;
  std::string noun;
  double confidence = 1.0;

  bool operator==(const FrameLabel&) const = default;
};

struct TimedFrame {
  Micros timestamp_us = 0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB, 3 bytes per pixel
  std::vector<FrameLabel> labels;

  double seconds() const { return to_seconds(timestamp_us); }
  bool operator==(const TimedFrame&) const = default;
};

struct AudioChunk {
  Micros timestamp_us = 0;
  std::uint32_t sample_rate = 0;
  std::vector<std::int16_t> samples;  // mono PCM

  double seconds() const { return to_seconds(timestamp_us); }
  double duration() const {
    return sample_rate == 0 ? 0.0 : static_cast<double>(samples.size()) / sample_rate;
  }
  bool operator==(const AudioChunk&) const = default;
};

struct TextChunk {
  Micros timestamp_us = 0;
  std::string text;  // UTF-8

  double seconds() const { return to_seconds(timestamp_us); }
  bool operator==(const TextChunk&) const = default;
};

using Chunk = std::variant<TimedFrame, AudioChunk, TextChunk>;

Micros timestamp_of(const Chunk& chunk);

using FramePtr = std::shared_ptr<const TimedFrame>;

/// Frames in the half-open window (start, end].
struct VideoSnippet {
  std::vector<FramePtr> frames;
  double start = 0.0;
  double end = 0.0;
  bool complete = false;  // false when the buffer held less history than requested

  double midpoint() const { return 0.5 * (start + end); }
};

}  // namespace vinci::media
