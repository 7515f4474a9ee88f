#include "vinci/generation/quality.hpp"

#include <cmath>
#include <limits>

#include "vinci/common/error.hpp"

namespace vinci::generation {

namespace {

constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

void check_pair(const LumaFrame& a, const LumaFrame& b) {
  if (a.width != b.width || a.height != b.height || a.values.size() != b.values.size()) {
    fail(ErrorCode::ShapeMismatch, "frames differ in size");
  }
  if (a.values.size() != a.width * a.height) fail(ErrorCode::ShapeMismatch, "luma plane size mismatch");
}

void check_videos(std::span<const LumaFrame> a, std::span<const LumaFrame> b) {
  if (a.size() != b.size()) fail(ErrorCode::ShapeMismatch, "videos differ in frame count");
  require(!a.empty(), "videos must contain at least one frame");
}

/// Separable "valid" filtering: output is (w - n + 1) x (h - n + 1).
std::vector<double> filter_valid(const std::vector<double>& img, std::size_t w, std::size_t h,
                                 const std::vector<double>& taps) {
  const std::size_t n = taps.size();
  const std::size_t ow = w - n + 1;
  const std::size_t oh = h - n + 1;
  std::vector<double> rows(ow * h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += taps[k] * img[y * w + x + k];
      rows[y * ow + x] = acc;
    }
  }
  std::vector<double> out(ow * oh);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += taps[k] * rows[(y + k) * ow + x];
      out[y * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

LumaFrame to_luma(const media::TimedFrame& frame) {
  LumaFrame out{frame.width, frame.height, std::vector<double>(std::size_t{frame.width} * frame.height)};
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = 0.299 * frame.pixels[3 * i] + 0.587 * frame.pixels[3 * i + 1] + 0.114 * frame.pixels[3 * i + 2];
  }
  return out;
}

std::vector<LumaFrame> to_luma(std::span<const media::TimedFrame> frames) {
  std::vector<LumaFrame> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(to_luma(f));
  return out;
}

std::vector<double> gaussian_taps(std::size_t size, double sigma) {
  std::vector<double> taps(size);
  const double center = (static_cast<double>(size) - 1.0) / 2.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - center;
    taps[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

double ssim_frame(const LumaFrame& a, const LumaFrame& b) {
  check_pair(a, b);
  if (a.width < kSsimWindow || a.height < kSsimWindow) {
    fail(ErrorCode::ShapeMismatch, "SSIM needs frames of at least 11x11");
  }
  const auto taps = gaussian_taps(kSsimWindow, kSsimSigma);
  const std::size_t n = a.values.size();
  std::vector<double> aa(n), bb(n), ab(n);
  for (std::size_t i = 0; i < n; ++i) {
    aa[i] = a.values[i] * a.values[i];
    bb[i] = b.values[i] * b.values[i];
    ab[i] = a.values[i] * b.values[i];
  }
  const auto mu_a = filter_valid(a.values, a.width, a.height, taps);
  const auto mu_b = filter_valid(b.values, a.width, a.height, taps);
  const auto e_aa = filter_valid(aa, a.width, a.height, taps);
  const auto e_bb = filter_valid(bb, a.width, a.height, taps);
  const auto e_ab = filter_valid(ab, a.width, a.height, taps);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i];
    const double mb = mu_b[i];
    const double var_a = e_aa[i] - ma * ma;
    const double var_b = e_bb[i] - mb * mb;
    const double cov = e_ab[i] - ma * mb;
    total += ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) / ((ma * ma + mb * mb + kC1) * (var_a + var_b + kC2));
  }
  return total / static_cast<double>(mu_a.size());
}

double ssim(std::span<const LumaFrame> a, std::span<const LumaFrame> b) {
  check_videos(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += ssim_frame(a[i], b[i]);
  return sum / static_cast<double>(a.size());
}

double psnr_frame(const LumaFrame& a, const LumaFrame& b) {
  check_pair(a, b);
  require(!a.values.empty(), "empty frame");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(a.values.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double psnr(std::span<const LumaFrame> a, std::span<const LumaFrame> b) {
  check_videos(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += psnr_frame(a[i], b[i]);
  return sum / static_cast<double>(a.size());
}

}  // namespace vinci::generation
