#include "preimage/regularizers.hpp"

#include <cmath>
#include <string>

#include "preimage/errors.hpp"

namespace preimage {

std::string_view to_string(RegularizerKind kind) {
  switch (kind) {
    case RegularizerKind::none:
      return "none";
    case RegularizerKind::tv:
      return "tv";
    case RegularizerKind::dirichlet:
      return "dirichlet";
  }
  return "?";
}

RegularizerKind regularizer_kind_from_string(std::string_view name) {
  if (name == "none") return RegularizerKind::none;
  if (name == "tv") return RegularizerKind::tv;
  if (name == "dirichlet") return RegularizerKind::dirichlet;
  throw ParameterError("unknown regularizer '" + std::string(name) + "'");
}

ImageGradient forward_gradient(const Image& u) {
  const std::size_t h = u.height(), w = u.width(), nc = u.channels();
  ImageGradient g{Image(h, w, nc), Image(h, w, nc)};
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < nc; ++c) {
        g.dy.at(y, x, c) = y + 1 < h ? u.at(y + 1, x, c) - u.at(y, x, c) : 0.0;
        g.dx.at(y, x, c) = x + 1 < w ? u.at(y, x + 1, c) - u.at(y, x, c) : 0.0;
      }
  return g;
}

Image divergence(const Image& vy, const Image& vx) {
  if (!vy.same_shape(vx)) throw DimensionError("divergence: component shapes differ");
  const std::size_t h = vy.height(), w = vy.width(), nc = vy.channels();
  Image div(h, w, nc);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < nc; ++c) {
        // Backward differences; entries on the last row/column of v are never
        // produced by forward_gradient and are excluded so the pair stays adjoint.
        double d = 0.0;
        if (y + 1 < h) d += vy.at(y, x, c);
        if (y > 0) d -= vy.at(y - 1, x, c);
        if (x + 1 < w) d += vx.at(y, x, c);
        if (x > 0) d -= vx.at(y, x - 1, c);
        div.at(y, x, c) = d;
      }
  return div;
}

RegularizerValue tv(const Image& image, double epsilon) {
  if (!(epsilon > 0.0)) throw ParameterError("tv: epsilon must be positive");
  image.require_finite("tv");
  ImageGradient g = forward_gradient(image);
  double value = 0.0;
  for (std::size_t i = 0; i < image.size(); ++i) {
    const double n = std::sqrt(g.dy[i] * g.dy[i] + g.dx[i] * g.dx[i] + epsilon * epsilon);
    value += n;
    g.dy[i] /= n;
    g.dx[i] /= n;
  }
  Image grad = divergence(g.dy, g.dx);
  grad *= -1.0;
  return {value, std::move(grad)};
}

RegularizerValue dirichlet(const Image& image) {
  image.require_finite("dirichlet");
  const ImageGradient g = forward_gradient(image);
  double value = 0.0;
  for (std::size_t i = 0; i < image.size(); ++i) value += g.dy[i] * g.dy[i] + g.dx[i] * g.dx[i];
  Image grad = divergence(g.dy, g.dx);
  grad *= -2.0;
  return {value, std::move(grad)};
}

RegularizerValue evaluate(const RegularizerSpec& spec, const Image& image) {
  if (!(spec.lambda >= 0.0)) throw ParameterError("regularizer: lambda must be nonnegative");
  if (spec.kind == RegularizerKind::none || spec.lambda == 0.0) {
    return {0.0, Image(image.height(), image.width(), image.channels())};
  }
  RegularizerValue r = spec.kind == RegularizerKind::tv ? tv(image, spec.epsilon) : dirichlet(image);
  r.value *= spec.lambda;
  r.gradient *= spec.lambda;
  return r;
}

}  // namespace preimage
