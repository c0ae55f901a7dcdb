#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace preimage {

/// Dense H x W x C grid of doubles stored row-major as (row, column, channel).
///
/// Used for pre-images, gradients, network activations and kernel weights.
class Image {
 public:
  Image() = default;
  Image(std::size_t height, std::size_t width, std::size_t channels, double fill = 0.0);
  Image(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> data);

  static Image constant(std::size_t height, std::size_t width, std::size_t channels, double value) {
    return Image(height, width, channels, value);
  }

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(std::size_t row, std::size_t col, std::size_t ch = 0) {
    return data_[(row * width_ + col) * channels_ + ch];
  }
  double at(std::size_t row, std::size_t col, std::size_t ch = 0) const {
    return data_[(row * width_ + col) * channels_ + ch];
  }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  bool same_shape(const Image& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

  bool all_finite() const;

  /// Throws DataError when any sample is NaN or infinite.
  void require_finite(const char* what) const;

  double max_abs() const;
  double sum() const;
  double mean() const;

  /// Single channel `ch` as an H x W x 1 image.
  Image channel(std::size_t ch) const;

  Image& operator+=(const Image& rhs);
  Image& operator-=(const Image& rhs);
  Image& operator*=(double s);

  friend bool operator==(const Image& a, const Image& b) {
    return a.same_shape(b) && a.data_ == b.data_;
  }

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

Image operator+(Image a, const Image& b);
Image operator-(Image a, const Image& b);
Image operator*(double s, Image a);

/// Sum of elementwise products; shapes must match.
double dot(const Image& a, const Image& b);

/// Largest absolute elementwise difference; shapes must match.
double max_abs_diff(const Image& a, const Image& b);

}  // namespace preimage
