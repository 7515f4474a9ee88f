#include "vinci/generation/clip_io.hpp"

#include <algorithm>
#include <cmath>

#include "vinci/common/error.hpp"
#include "vinci/common/json_lines.hpp"
#include "vinci/media/wire.hpp"

namespace vinci::generation {

Tensor4 frame_to_tensor(const media::TimedFrame& frame) { return frames_to_tensor(std::span(&frame, 1)); }

Tensor4 frames_to_tensor(std::span<const media::TimedFrame> frames) {
  require(!frames.empty(), "need at least one frame");
  const std::size_t w = frames.front().width;
  const std::size_t h = frames.front().height;
  Tensor4 out(frames.size(), h, w, 3);
  auto dst = out.data();
  const std::size_t per_frame = w * h * 3;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (frames[t].width != w || frames[t].height != h) fail(ErrorCode::ShapeMismatch, "frames differ in size");
    for (std::size_t i = 0; i < per_frame; ++i) dst[t * per_frame + i] = frames[t].pixels[i] / 127.5 - 1.0;
  }
  return out;
}

std::vector<media::TimedFrame> tensor_to_frames(const Tensor4& pixels, double fps, double start) {
  if (pixels.channels() != 3) fail(ErrorCode::ShapeMismatch, "decoded video must have 3 channels");
  require(fps > 0.0, "fps must be > 0");
  std::vector<media::TimedFrame> out(pixels.frames());
  const std::size_t per_frame = pixels.height() * pixels.width() * 3;
  auto src = pixels.data();
  for (std::size_t t = 0; t < out.size(); ++t) {
    auto& f = out[t];
    f.timestamp_us = media::from_seconds(start + static_cast<double>(t) / fps);
    f.width = static_cast<std::uint32_t>(pixels.width());
    f.height = static_cast<std::uint32_t>(pixels.height());
    f.pixels.resize(per_frame);
    for (std::size_t i = 0; i < per_frame; ++i) {
      const double v = std::clamp((src[t * per_frame + i] + 1.0) * 127.5, 0.0, 255.0);
      f.pixels[i] = static_cast<std::uint8_t>(std::lround(v));
    }
  }
  return out;
}

void write_clip(const std::filesystem::path& path, const GeneratedVideo& video) {
  auto frames = tensor_to_frames(video.decoded, video.fps);
  std::vector<media::Chunk> chunks(frames.begin(), frames.end());
  media::write_stream_file(path, chunks);
  nlohmann::json meta = {{"instruction", video.instruction},
                         {"seed", video.seed},
                         {"steps", video.steps},
                         {"duration_s", video.duration_s}};
  write_file(path.string() + ".json", meta.dump(2) + "\n");
}

nlohmann::json read_clip_sidecar(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_file(path.string() + ".json"));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::SchemaViolation, std::string("clip sidecar: ") + e.what());
  }
}

std::vector<media::TimedFrame> read_video_frames(const std::filesystem::path& path) {
  std::vector<media::TimedFrame> frames;
  for (auto& chunk : media::read_stream_file(path)) {
    if (auto* f = std::get_if<media::TimedFrame>(&chunk)) frames.push_back(std::move(*f));
  }
  return frames;
}

}  // namespace vinci::generation
