#pragma once

#include <string_view>

#include "preimage/image.hpp"
#include "preimage/kernel.hpp"

namespace preimage {

enum class BoundaryRule { replicate, reflect, zero };

std::string_view to_string(BoundaryRule rule);

/// 2D convolution of every channel with `kernel`; output has the input shape.
///
/// Out-of-range samples are supplied by `boundary`: replicate clamps to the
/// nearest edge sample, reflect mirrors about the edge sample without
/// repeating it, zero pads with 0.
Image convolve(const Image& input, const Kernel& kernel,
               BoundaryRule boundary = BoundaryRule::replicate);

/// Corner-aligned bilinear resize to explicit dimensions.
Image resize(const Image& input, std::size_t height, std::size_t width);

/// Bilinear resize by `scale`; output dims are round(scale * dims).
Image resample(const Image& input, double scale);

/// Output dimension produced by resample for a given input dimension.
std::size_t scaled_dim(std::size_t dim, double scale);

}  // namespace preimage
