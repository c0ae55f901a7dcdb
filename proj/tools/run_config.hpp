#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "preimage/demons.hpp"
#include "preimage/network.hpp"
#include "preimage/objectives.hpp"

namespace preimage::cli {

using Json = nlohmann::ordered_json;

/// Kernel selection inside a config. kind is none, dirac, gaussian or sobolev;
/// a positive `parameter` (sigma or gamma) is used as is, otherwise the
/// parameter is fitted so the outer ring peaks at `threshold`.
struct KernelChoice {
  std::string kind = "none";
  std::size_t side = 0;
  double parameter = 0.0;
  double threshold = 1e-4;

  friend bool operator==(const KernelChoice&, const KernelChoice&) = default;
};

struct RunConfig {
  struct Model {
    std::string path;
    std::string builtin;
    std::uint64_t init_seed = 0;
    friend bool operator==(const Model&, const Model&) = default;
  } model;

  struct Objective {
    std::string kind = "inversion";
    /// -1 selects the default layer (deepest pre-dense for inversion, logits
    /// for activation maximization).
    long layer = -1;
    std::string target_image;
    std::size_t unit = 0;
    int p = 2;
    std::string z_mode = "unit";
    double z = 1.0;
    friend bool operator==(const Objective&, const Objective&) = default;
  } objective;

  struct Regularizer {
    std::string kind = "none";
    double lambda = 0.0;
    double epsilon = 1e-3;
    friend bool operator==(const Regularizer&, const Regularizer&) = default;
  } regularizer;

  struct Demons {
    KernelChoice elastic;
    KernelChoice fluid;
    double tau = 1.0;
    std::size_t steps = 100;
    bool clamp = false;
    std::uint64_t seed = 0;
    std::string init_image;
    friend bool operator==(const Demons&, const Demons&) = default;
  } demons;

  struct Schedule {
    std::vector<Octave> octaves;
    double jitter_fraction = 0.0;
    friend bool operator==(const Schedule& a, const Schedule& b) {
      if (a.jitter_fraction != b.jitter_fraction || a.octaves.size() != b.octaves.size()) return false;
      for (std::size_t i = 0; i < a.octaves.size(); ++i) {
        const auto& x = a.octaves[i];
        const auto& y = b.octaves[i];
        if (x.scale != y.scale || x.steps != y.steps || x.step_size != y.step_size) return false;
      }
      return true;
    }
  } schedule;

  struct Output {
    std::string image;
    std::string metrics;
    friend bool operator==(const Output&, const Output&) = default;
  } output;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses a config document. Unknown keys and wrong types raise ConfigError;
/// relative paths are kept as written.
RunConfig parse_run_config(const Json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

Json to_json(const RunConfig& config);

/// Everything a run needs, built from a resolved config.
struct PreparedRun {
  RunConfig resolved;
  Network network;
  ObjectiveSpec objective;
  DemonsConfig demons;
  OctaveSchedule schedule;
  std::optional<Image> init;
};

/// Validates paths, loads the model and images, fits kernel parameters and
/// fills every default. `expected_kind` is "inversion" or "activation_max".
/// Relative paths are taken relative to the working directory.
PreparedRun prepare_run(const RunConfig& config, const std::string& expected_kind);

/// Kernel described by a (resolved) KernelChoice; nullopt for kind none.
std::optional<Kernel> build_kernel(const KernelChoice& choice);

}  // namespace preimage::cli
