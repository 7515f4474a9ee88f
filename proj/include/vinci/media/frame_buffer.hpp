#pragma once

#include <deque>
#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <vector>

#include "vinci/media/types.hpp"

namespace vinci::media {

/// Sliding window of the most recent frames. One writer appends while any
/// number of readers extract snippets; readers see a point-in-time prefix.
class FrameBuffer {
 public:
  explicit FrameBuffer(double capacity_seconds);

  double capacity_seconds() const { return to_seconds(capacity_us_); }

  /// Appends `frame` and drops the oldest frames until newest - oldest fits
  /// in the capacity. Returns how many frames were dropped.
  /// Throws NonMonotoneTimestamp unless frame is strictly newer than the last one.
  std::size_t push(TimedFrame frame);

  /// Frames with timestamp in (end - duration, end]. Throws EmptyBuffer when
  /// the buffer (or the window) holds no frames.
  VideoSnippet extract_snippet(double duration, double end) const;

  std::size_t size() const;
  bool empty() const;
  std::optional<Micros> newest_timestamp() const;
  std::optional<Micros> oldest_timestamp() const;
  FramePtr latest() const;
  std::vector<FramePtr> frames() const;

 private:
  Micros capacity_us_;
  mutable std::shared_mutex mutex_;
  std::deque<FramePtr> frames_;
};

/// Emits extract_snippet(buffer, interval, now) once `interval` has elapsed
/// since `last_emit`; nullopt otherwise or when there is nothing to cut.
std::optional<VideoSnippet> snapshot_schedule(const FrameBuffer& buffer, double interval,
                                              double last_emit, double now);

/// Stateful wrapper that owns last_emit.
class SnapshotScheduler {
 public:
  explicit SnapshotScheduler(double interval, double start = 0.0);

  std::optional<VideoSnippet> poll(const FrameBuffer& buffer, double now);
  double interval() const { return interval_; }
  double last_emit() const { return last_emit_; }

 private:
  double interval_;
  double last_emit_;
};

/// Replay label sidecar: JSON-lines {"t0","t1","verb","noun"}. A span covers
/// timestamps t with t0 <= t < t1.
struct LabelSpan {
  double t0 = 0.0;
  double t1 = 0.0;
  std::string verb;
  std::string noun;

  bool operator==(const LabelSpan&) const = default;
};

class LabelTrack {
 public:
  LabelTrack() = default;
  explicit LabelTrack(std::vector<LabelSpan> spans);

  static LabelTrack load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::vector<FrameLabel> labels_at(double t) const;
  const std::vector<LabelSpan>& spans() const { return spans_; }

 private:
  std::vector<LabelSpan> spans_;  // sorted by t0
};

}  // namespace vinci::media
