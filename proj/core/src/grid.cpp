#include "preimage/grid.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "preimage/errors.hpp"

namespace preimage {

namespace {

// Source index for a possibly out-of-range coordinate, or -1 for zero padding.
long boundary_index(long i, long n, BoundaryRule rule) {
  if (i >= 0 && i < n) return i;
  switch (rule) {
    case BoundaryRule::replicate:
      return i < 0 ? 0 : n - 1;
    case BoundaryRule::reflect: {
      if (n == 1) return 0;
      const long period = 2 * (n - 1);
      long m = i % period;
      if (m < 0) m += period;
      return m < n ? m : period - m;
    }
    case BoundaryRule::zero:
      return -1;
  }
  return -1;
}

}  // namespace

std::string_view to_string(BoundaryRule rule) {
  switch (rule) {
    case BoundaryRule::replicate:
      return "replicate";
    case BoundaryRule::reflect:
      return "reflect";
    case BoundaryRule::zero:
      return "zero";
  }
  return "?";
}

Image convolve(const Image& input, const Kernel& kernel, BoundaryRule boundary) {
  const std::size_t side = kernel.side();
  if (side > input.height() || side > input.width()) {
    throw DimensionError("convolve: kernel side " + std::to_string(side) + " exceeds image " +
                         std::to_string(input.height()) + "x" + std::to_string(input.width()));
  }
  input.require_finite("convolve");

  const long h = static_cast<long>(input.height());
  const long w = static_cast<long>(input.width());
  const long r = static_cast<long>(kernel.radius());
  const std::size_t nc = input.channels();

  // Tabulate source rows/columns for offsets -r..r so the inner loop is branch-free.
  std::vector<long> row_src(static_cast<std::size_t>(h * (2 * r + 1)));
  std::vector<long> col_src(static_cast<std::size_t>(w * (2 * r + 1)));
  for (long y = 0; y < h; ++y)
    for (long d = -r; d <= r; ++d) row_src[y * (2 * r + 1) + (d + r)] = boundary_index(y + d, h, boundary);
  for (long x = 0; x < w; ++x)
    for (long d = -r; d <= r; ++d) col_src[x * (2 * r + 1) + (d + r)] = boundary_index(x + d, w, boundary);

  const auto& kw = kernel.weights();
  const long ks = static_cast<long>(side);
  Image out(input.height(), input.width(), nc);
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < nc; ++c) {
        double acc = 0.0;
        for (long i = 0; i < ks; ++i) {
          // Convolution, not correlation: weight (i, j) pairs with offset (r - i, r - j).
          const long sy = row_src[y * (2 * r + 1) + (r - i) + r];
          if (sy < 0) continue;
          for (long j = 0; j < ks; ++j) {
            const long sx = col_src[x * (2 * r + 1) + (r - j) + r];
            if (sx < 0) continue;
            acc += kw[static_cast<std::size_t>(i * ks + j)] *
                   input.at(static_cast<std::size_t>(sy), static_cast<std::size_t>(sx), c);
          }
        }
        out.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), c) = acc;
      }
    }
  }
  return out;
}

Image resize(const Image& input, std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) throw DimensionError("resize: target dimension is zero");
  if (height == input.height() && width == input.width()) return input;

  const std::size_t nc = input.channels();
  const double sy = height > 1 ? static_cast<double>(input.height() - 1) / static_cast<double>(height - 1) : 0.0;
  const double sx = width > 1 ? static_cast<double>(input.width() - 1) / static_cast<double>(width - 1) : 0.0;

  Image out(height, width, nc);
  for (std::size_t y = 0; y < height; ++y) {
    const double fy = static_cast<double>(y) * sy;
    const std::size_t y0 = std::min(static_cast<std::size_t>(fy), input.height() - 1);
    const std::size_t y1 = std::min(y0 + 1, input.height() - 1);
    const double ty = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = static_cast<double>(x) * sx;
      const std::size_t x0 = std::min(static_cast<std::size_t>(fx), input.width() - 1);
      const std::size_t x1 = std::min(x0 + 1, input.width() - 1);
      const double tx = fx - static_cast<double>(x0);
      for (std::size_t c = 0; c < nc; ++c) {
        // a + t * (b - a) keeps constant regions exact.
        const double top = input.at(y0, x0, c) + tx * (input.at(y0, x1, c) - input.at(y0, x0, c));
        const double bottom = input.at(y1, x0, c) + tx * (input.at(y1, x1, c) - input.at(y1, x0, c));
        out.at(y, x, c) = top + ty * (bottom - top);
      }
    }
  }
  return out;
}

std::size_t scaled_dim(std::size_t dim, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ParameterError("resample: scale must be positive");
  return static_cast<std::size_t>(std::llround(scale * static_cast<double>(dim)));
}

Image resample(const Image& input, double scale) {
  const std::size_t h = scaled_dim(input.height(), scale);
  const std::size_t w = scaled_dim(input.width(), scale);
  if (h == 0 || w == 0) throw DimensionError("resample: scale produces an empty image");
  return resize(input, h, w);
}

}  // namespace preimage
