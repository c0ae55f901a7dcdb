#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "preimage/grid.hpp"
#include "preimage/image.hpp"
#include "preimage/kernel.hpp"
#include "preimage/network.hpp"
#include "preimage/objectives.hpp"
#include "preimage/regularizers.hpp"

namespace preimage {

/// Settings of the fluid-elastic update
///   u <- K_e * (u - tau * K_f * (grad D + lambda * grad R)).
/// An absent kernel acts as the Dirac impulse.
struct DemonsConfig {
  std::optional<Kernel> elastic_kernel;
  std::optional<Kernel> fluid_kernel;
  double step_size = 1.0;
  std::size_t steps = 1;
  RegularizerSpec regularizer;
  /// Project every iterate onto [0, 1].
  bool clamp = false;
  std::uint64_t seed = 0;
  BoundaryRule boundary = BoundaryRule::replicate;
};

struct Octave {
  double scale = 1.0;
  std::size_t steps = 0;
  double step_size = 0.0;
};

/// Octaves run in order; each resizes the current image to scale * (initial
/// dims). Every step translates the image by a random integer offset of at
/// most round(jitter_fraction * dim) per axis.
struct OctaveSchedule {
  std::vector<Octave> octaves;
  double jitter_fraction = 0.0;
};

struct StepMetrics {
  std::size_t step = 0;
  std::size_t octave = 0;
  double data_term = 0.0;
  /// lambda * R(u)
  double reg_term = 0.0;
  double total = 0.0;
  /// max |grad D + lambda grad R| before filtering
  double grad_maxnorm = 0.0;
};

struct RunResult {
  Image final;
  std::vector<StepMetrics> metrics;
  double wall_time_seconds = 0.0;
};

struct Offset {
  long dx = 0;
  long dy = 0;
};

/// One update K_e * (u - tau * (K_f * grad)), then the optional [0, 1] clamp.
/// `grad` must already contain lambda * grad R if an explicit regularizer is used.
Image demons_step(const Image& u, const Image& grad, const DemonsConfig& config);

/// Integer translation by (dx, dy) with replicate fill: out(y, x) = in(y - dy, x - dx).
Image jitter_shift(const Image& image, Offset offset);

/// Uniform noise in [0.4, 0.6].
Image initial_noise(const Shape& shape, std::uint64_t seed);

/// Full optimization run. Without octaves the schedule is a single octave at
/// scale 1 with config.steps and config.step_size. Deterministic in config.seed;
/// throws NumericalError naming the step if an iterate becomes non-finite.
RunResult run(const Network& net, const ObjectiveSpec& objective, const DemonsConfig& config,
              const OctaveSchedule& schedule, const std::optional<Image>& init = std::nullopt);

/// `step,octave,data_term,reg_term,total,grad_maxnorm` rows, 17 significant digits.
void write_metrics_csv(const std::vector<StepMetrics>& metrics, std::ostream& out);

}  // namespace preimage
