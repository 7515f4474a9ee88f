#include "vinci/generation/tensor.hpp"

#include <cmath>
#include <string>

#include "vinci/common/error.hpp"

namespace vinci::generation {

Tensor4::Tensor4(std::size_t frames, std::size_t height, std::size_t width, std::size_t channels, double fill)
    : frames_(frames), height_(height), width_(width), channels_(channels),
      data_(frames * height * width * channels, fill) {}

bool Tensor4::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor4 Tensor4::frame(std::size_t t) const {
  require(t < frames_, "frame index out of range");
  Tensor4 out(1, height_, width_, channels_);
  const std::size_t per_frame = height_ * width_ * channels_;
  std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(t * per_frame), per_frame, out.data_.begin());
  return out;
}

void check_same_shape(const Tensor4& a, const Tensor4& b, const char* what) {
  if (!a.same_shape(b)) {
    auto dims = [](const Tensor4& x) {
      return std::to_string(x.frames()) + "x" + std::to_string(x.height()) + "x" + std::to_string(x.width()) + "x" +
             std::to_string(x.channels());
    };
    fail(ErrorCode::ShapeMismatch, std::string(what) + ": " + dims(a) + " vs " + dims(b));
  }
}

}  // namespace vinci::generation
