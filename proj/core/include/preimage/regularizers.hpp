#pragma once

#include <string_view>

#include "preimage/image.hpp"

namespace preimage {

enum class RegularizerKind { none, tv, dirichlet };

std::string_view to_string(RegularizerKind kind);
RegularizerKind regularizer_kind_from_string(std::string_view name);

struct RegularizerSpec {
  RegularizerKind kind = RegularizerKind::none;
  double lambda = 0.0;
  double epsilon = 1e-3;
};

struct RegularizerValue {
  double value = 0.0;
  Image gradient;
};

/// Forward differences per channel; the difference across the far border is 0.
struct ImageGradient {
  Image dy;
  Image dx;
};

ImageGradient forward_gradient(const Image& u);

/// Discrete divergence, the negative adjoint of forward_gradient:
/// <forward_gradient(u), v> = -<u, divergence(v)>.
Image divergence(const Image& vy, const Image& vx);

/// Relaxed total variation sum_x sqrt(|grad u|^2 + eps^2) and its exact gradient
/// -div(grad u / sqrt(|grad u|^2 + eps^2)). Channels are independent.
RegularizerValue tv(const Image& image, double epsilon);

/// Dirichlet energy sum_x |grad u|^2 and its exact gradient -2 div(grad u).
RegularizerValue dirichlet(const Image& image);

/// lambda * R(u) and lambda * grad R(u); zero for kind none or lambda 0.
RegularizerValue evaluate(const RegularizerSpec& spec, const Image& image);

}  // namespace preimage
