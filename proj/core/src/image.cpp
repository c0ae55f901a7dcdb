#include "preimage/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "preimage/errors.hpp"

namespace preimage {

namespace {

void require_shape(const Image& a, const Image& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch (" + std::to_string(a.height()) + "x" +
                         std::to_string(a.width()) + "x" + std::to_string(a.channels()) + " vs " +
                         std::to_string(b.height()) + "x" + std::to_string(b.width()) + "x" +
                         std::to_string(b.channels()) + ")");
  }
}

}  // namespace

Image::Image(std::size_t height, std::size_t width, std::size_t channels, double fill)
    : height_(height), width_(width), channels_(channels), data_(height * width * channels, fill) {
  if (height == 0 || width == 0 || channels == 0) {
    throw DimensionError("Image: dimensions must be positive");
  }
}

Image::Image(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  if (height == 0 || width == 0 || channels == 0) {
    throw DimensionError("Image: dimensions must be positive");
  }
  if (data_.size() != height * width * channels) {
    throw DimensionError("Image: data length " + std::to_string(data_.size()) + " != " +
                         std::to_string(height * width * channels));
  }
}

bool Image::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Image::require_finite(const char* what) const {
  if (!all_finite()) throw DataError(std::string(what) + ": non-finite sample");
}

double Image::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Image::sum() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

double Image::mean() const { return data_.empty() ? 0.0 : sum() / static_cast<double>(data_.size()); }

Image Image::channel(std::size_t ch) const {
  if (ch >= channels_) throw DimensionError("Image::channel: index out of range");
  Image out(height_, width_, 1);
  for (std::size_t i = 0; i < height_ * width_; ++i) out.data_[i] = data_[i * channels_ + ch];
  return out;
}

Image& Image::operator+=(const Image& rhs) {
  require_shape(*this, rhs, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
  return *this;
}

Image& Image::operator-=(const Image& rhs) {
  require_shape(*this, rhs, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
  return *this;
}

Image& Image::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Image operator+(Image a, const Image& b) { return a += b; }
Image operator-(Image a, const Image& b) { return a -= b; }
Image operator*(double s, Image a) { return a *= s; }

double dot(const Image& a, const Image& b) {
  require_shape(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs_diff(const Image& a, const Image& b) {
  require_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace preimage
