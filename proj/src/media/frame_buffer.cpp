#include "vinci/media/frame_buffer.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "vinci/common/error.hpp"
#include "vinci/common/json_lines.hpp"

namespace vinci::media {

FrameBuffer::FrameBuffer(double capacity_seconds) : capacity_us_(from_seconds(capacity_seconds)) {
  require(capacity_seconds > 0.0 && std::isfinite(capacity_seconds), "capacity_seconds must be > 0");
}

std::size_t FrameBuffer::push(TimedFrame frame) {
  if (frame.timestamp_us < 0) fail(ErrorCode::PreconditionViolation, "negative frame timestamp");
  if (frame.pixels.size() != std::size_t{frame.width} * frame.height * 3) {
    fail(ErrorCode::PreconditionViolation, "pixel buffer does not match width*height*3");
  }
  auto ptr = std::make_shared<const TimedFrame>(std::move(frame));
  std::unique_lock lock(mutex_);
  if (!frames_.empty() && ptr->timestamp_us <= frames_.back()->timestamp_us) {
    fail(ErrorCode::NonMonotoneTimestamp,
         "frame at " + std::to_string(ptr->timestamp_us) + "us not after " +
             std::to_string(frames_.back()->timestamp_us) + "us");
  }
  frames_.push_back(std::move(ptr));
  const Micros newest = frames_.back()->timestamp_us;
  std::size_t evicted = 0;
  while (newest - frames_.front()->timestamp_us > capacity_us_) {
    frames_.pop_front();
    ++evicted;
  }
  return evicted;
}

VideoSnippet FrameBuffer::extract_snippet(double duration, double end) const {
  require(duration > 0.0, "snippet duration must be > 0");
  const Micros end_us = from_seconds(end);
  const Micros start_us = end_us - from_seconds(duration);
  std::shared_lock lock(mutex_);
  if (frames_.empty()) fail(ErrorCode::EmptyBuffer, "no frames buffered");
  auto first = std::upper_bound(frames_.begin(), frames_.end(), start_us,
                                [](Micros t, const FramePtr& f) { return t < f->timestamp_us; });
  auto last = std::upper_bound(first, frames_.end(), end_us,
                               [](Micros t, const FramePtr& f) { return t < f->timestamp_us; });
  if (first == last) fail(ErrorCode::EmptyBuffer, "no frames in requested window");
  VideoSnippet snippet;
  snippet.frames.assign(first, last);
  snippet.start = to_seconds(start_us);
  snippet.end = to_seconds(end_us);
  snippet.complete = frames_.front()->timestamp_us <= start_us;
  return snippet;
}

std::size_t FrameBuffer::size() const {
  std::shared_lock lock(mutex_);
  return frames_.size();
}

bool FrameBuffer::empty() const { return size() == 0; }

std::optional<Micros> FrameBuffer::newest_timestamp() const {
  std::shared_lock lock(mutex_);
  if (frames_.empty()) return std::nullopt;
  return frames_.back()->timestamp_us;
}

std::optional<Micros> FrameBuffer::oldest_timestamp() const {
  std::shared_lock lock(mutex_);
  if (frames_.empty()) return std::nullopt;
  return frames_.front()->timestamp_us;
}

FramePtr FrameBuffer::latest() const {
  std::shared_lock lock(mutex_);
  return frames_.empty() ? nullptr : frames_.back();
}

std::vector<FramePtr> FrameBuffer::frames() const {
  std::shared_lock lock(mutex_);
  return {frames_.begin(), frames_.end()};
}

std::optional<VideoSnippet> snapshot_schedule(const FrameBuffer& buffer, double interval,
                                              double last_emit, double now) {
  require(interval > 0.0, "snapshot interval must be > 0");
  if (from_seconds(now) - from_seconds(last_emit) < from_seconds(interval)) return std::nullopt;
  try {
    return buffer.extract_snippet(interval, now);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::EmptyBuffer) return std::nullopt;
    throw;
  }
}

SnapshotScheduler::SnapshotScheduler(double interval, double start)
    : interval_(interval), last_emit_(start) {
  require(interval > 0.0, "snapshot interval must be > 0");
}

std::optional<VideoSnippet> SnapshotScheduler::poll(const FrameBuffer& buffer, double now) {
  auto snippet = snapshot_schedule(buffer, interval_, last_emit_, now);
  if (snippet) last_emit_ = now;
  return snippet;
}

LabelTrack::LabelTrack(std::vector<LabelSpan> spans) : spans_(std::move(spans)) {
  for (const auto& s : spans_) {
    require(s.t0 <= s.t1, "label span with t0 > t1");
    require(!s.verb.empty() && !s.noun.empty(), "label span needs verb and noun");
  }
  std::stable_sort(spans_.begin(), spans_.end(),
                   [](const LabelSpan& a, const LabelSpan& b) { return a.t0 < b.t0; });
}

LabelTrack LabelTrack::load(const std::filesystem::path& path) {
  std::vector<LabelSpan> spans;
  for (const auto& r : read_json_lines(path)) {
    try {
      spans.push_back({r.at("t0").get<double>(), r.at("t1").get<double>(),
                       r.at("verb").get<std::string>(), r.at("noun").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::SchemaViolation, std::string("label record: ") + e.what());
    }
  }
  return LabelTrack(std::move(spans));
}

void LabelTrack::save(const std::filesystem::path& path) const {
  std::vector<nlohmann::json> out;
  for (const auto& s : spans_) {
    out.push_back({{"t0", s.t0}, {"t1", s.t1}, {"verb", s.verb}, {"noun", s.noun}});
  }
  write_json_lines(path, out);
}

std::vector<FrameLabel> LabelTrack::labels_at(double t) const {
  std::vector<FrameLabel> out;
  for (const auto& s : spans_) {
    if (s.t0 > t) break;
    if (t < s.t1) out.push_back({s.verb, s.noun, 1.0});
  }
  return out;
}

}  // namespace vinci::media
