#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "vinci/generation/diffusion.hpp"
#include "vinci/media/types.hpp"

namespace vinci::generation {

/// RGB bytes -> values in [-1, 1], one tensor frame per video frame (c = 3).
Tensor4 frames_to_tensor(std::span<const media::TimedFrame> frames);
Tensor4 frame_to_tensor(const media::TimedFrame& frame);

/// Inverse of frames_to_tensor with clamping and rounding; timestamps are
/// start + i / fps.
std::vector<media::TimedFrame> tensor_to_frames(const Tensor4& pixels, double fps, double start = 0.0);

/// Writes the decoded clip as a VNCI video stream plus `path`.json holding
/// {instruction, seed, steps, duration_s}.
void write_clip(const std::filesystem::path& path, const GeneratedVideo& video);
nlohmann::json read_clip_sidecar(const std::filesystem::path& path);

/// Video chunks of a VNCI file, in order.
std::vector<media::TimedFrame> read_video_frames(const std::filesystem::path& path);

}  // namespace vinci::generation
