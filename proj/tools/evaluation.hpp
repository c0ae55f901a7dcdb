#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "preimage/demons.hpp"
#include "preimage/network.hpp"

namespace preimage::cli {

/// Regularization presets of the cross-architecture harness. `identity`
/// skips reconstruction and classifies the original image.
enum class Preset { tv, fluid_sobolev, fluid_elastic_sobolev, identity };

std::string preset_name(Preset preset);
Preset preset_from_string(const std::string& name);

struct EvaluationOptions {
  std::size_t n_images = 30;
  std::uint64_t seed = 0;
  std::vector<Preset> presets{Preset::tv, Preset::fluid_sobolev, Preset::fluid_elastic_sobolev};
  /// Steps per reconstruction.
  std::size_t steps = 200;
  /// Reconstruction layers; default is the deepest pre-dense layer of each model.
  std::optional<std::size_t> layer_a;
  std::optional<std::size_t> layer_b;
  /// Worker threads; 0 means PREIMAGE_FORGE_THREADS or hardware concurrency.
  std::size_t threads = 0;
};

struct EvaluationEntry {
  std::string direction;  // "a_to_b" or "b_to_a"
  std::string preset;
  std::size_t correct = 0;
  std::size_t total = 0;
  double top1 = 0.0;
};

struct EvaluationReport {
  std::size_t n_images = 0;
  std::uint64_t seed = 0;
  std::size_t layer_a = 0;
  std::size_t layer_b = 0;
  std::size_t steps = 0;
  double accuracy_a = 0.0;
  double accuracy_b = 0.0;
  std::vector<EvaluationEntry> entries;
};

/// Demons settings of a reconstruction preset.
DemonsConfig preset_config(Preset preset, std::size_t steps, std::uint64_t seed);

/// Inverts `image` through `net` at `layer` with the preset's regularization.
Image reconstruct(const Network& net, std::size_t layer, const Image& image, Preset preset, std::size_t steps,
                  std::uint64_t seed);

/// Reconstructs n_images from synth_dataset(seed) through each model and
/// classifies the results with the other model. Work items are independent and
/// aggregated in a fixed order, so the report does not depend on the thread count.
EvaluationReport evaluate_cross(const Network& model_a, const Network& model_b, const EvaluationOptions& options);

nlohmann::ordered_json to_json(const EvaluationReport& report);

/// Worker count from PREIMAGE_FORGE_THREADS (0 or unset = hardware concurrency).
std::size_t worker_count(std::size_t requested = 0);

}  // namespace preimage::cli
