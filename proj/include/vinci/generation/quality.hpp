#pragma once

#include <span>
#include <vector>

#include "vinci/media/types.hpp"

namespace vinci::generation {

/// One 8-bit-range luma plane stored as doubles.
struct LumaFrame {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;  // row-major

  double at(std::size_t x, std::size_t y) const { return values[y * width + x]; }
};

/// BT.601 luma of an RGB frame.
LumaFrame to_luma(const media::TimedFrame& frame);
std::vector<LumaFrame> to_luma(std::span<const media::TimedFrame> frames);

inline constexpr std::size_t kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

/// Mean single-scale SSIM over the valid 11x11 Gaussian windows of one frame
/// pair (C1 = (0.01*255)^2, C2 = (0.03*255)^2).
double ssim_frame(const LumaFrame& a, const LumaFrame& b);

/// Frame-averaged SSIM. Throws ShapeMismatch on differing shapes.
double ssim(std::span<const LumaFrame> a, std::span<const LumaFrame> b);

/// 10 log10(255^2 / MSE) per frame, averaged over frames; a frame with
/// MSE = 0 contributes +infinity.
double psnr(std::span<const LumaFrame> a, std::span<const LumaFrame> b);
double psnr_frame(const LumaFrame& a, const LumaFrame& b);

/// Normalized 1-D Gaussian taps.
std::vector<double> gaussian_taps(std::size_t size, double sigma);

}  // namespace vinci::generation
