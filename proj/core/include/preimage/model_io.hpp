#pragma once

#include <filesystem>
#include <string>

#include "preimage/network.hpp"

namespace preimage {

/// Model container:
///   8 bytes   "MCNN0001"
///   4 bytes   little-endian manifest length
///   manifest  JSON {input_shape, layers, seed, tensors: [{name, shape}]}
///   payload   little-endian IEEE-754 doubles in manifest tensor order
std::string serialize_model(const Network& net);
Network deserialize_model(const std::string& bytes);

void save_model(const Network& net, const std::filesystem::path& path);
Network load_model(const std::filesystem::path& path);

/// The JSON manifest exactly as embedded by serialize_model.
std::string model_manifest(const Network& net);

}  // namespace preimage
