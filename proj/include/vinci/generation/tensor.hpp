#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vinci::generation {

/// Dense T x h x w x c tensor, channel-last, row-major.
class Tensor4 {
 public:
  Tensor4() = default;
  Tensor4(std::size_t frames, std::size_t height, std::size_t width, std::size_t channels, double fill = 0.0);

  std::size_t frames() const { return frames_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }
  /// Number of (t, y, x) sites; size() == sites() * channels().
  std::size_t sites() const { return frames_ * height_ * width_; }

  std::size_t offset(std::size_t t, std::size_t y, std::size_t x, std::size_t ch) const {
    return ((t * height_ + y) * width_ + x) * channels_ + ch;
  }
  double& at(std::size_t t, std::size_t y, std::size_t x, std::size_t ch) { return data_[offset(t, y, x, ch)]; }
  double at(std::size_t t, std::size_t y, std::size_t x, std::size_t ch) const { return data_[offset(t, y, x, ch)]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool same_shape(const Tensor4& other) const {
    return frames_ == other.frames_ && height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }
  bool all_finite() const;

  /// Frame t as a 1 x h x w x c tensor.
  Tensor4 frame(std::size_t t) const;

  bool operator==(const Tensor4&) const = default;

 private:
  std::size_t frames_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

/// Throws ShapeMismatch with `what` in the message when shapes differ.
void check_same_shape(const Tensor4& a, const Tensor4& b, const char* what);

}  // namespace vinci::generation
