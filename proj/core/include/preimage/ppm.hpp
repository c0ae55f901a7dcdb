#pragma once

#include <filesystem>
#include <string>

#include "preimage/image.hpp"

namespace preimage {

/// Binary PGM (P5, 1 channel) or PPM (P6, 3 channels), maxval 255.
/// Samples are clamped to [0, 1] and quantized as round(v * 255).
std::string encode_ppm(const Image& image);
void write_ppm(const Image& image, const std::filesystem::path& path);

/// Parses P5/P6 with maxval 255; samples become byte / 255.
Image decode_ppm(const std::string& bytes);
Image read_ppm(const std::filesystem::path& path);

/// Min-max normalizes a copy of `image` into [0, 1] (constant images map to 0.5).
Image normalize_for_display(const Image& image);

}  // namespace preimage
