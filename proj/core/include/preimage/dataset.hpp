#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "preimage/image.hpp"

namespace preimage {

inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::size_t kCanvasSide = 32;

enum class ShapeClass : int { disk = 0, plus = 1, hollow_square = 2 };

struct Dataset {
  std::vector<Image> images;
  std::vector<int> labels;
  std::uint64_t seed = 0;

  std::size_t size() const { return images.size(); }
};

/// Procedural three-class dataset on 32 x 32 single-channel canvases.
///
/// Example k has label k % 3 (filled disk, plus sign, hollow square). Each
/// shape gets a center offset of up to +-4 px, a size offset of up to +-3 px,
/// an intensity in [0.6, 1.0] and additive uniform noise in [-0.05, 0.05];
/// samples are clamped to [0, 1]. `n` must be a positive multiple of 3.
Dataset synth_dataset(std::uint64_t seed, std::size_t n);

/// Writes img_NNNNN.pgm files plus labels.json into `dir` (created if needed).
void save_dataset(const Dataset& data, const std::filesystem::path& dir);

/// Reads a directory written by save_dataset. Samples come back quantized to 8 bits.
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace preimage
