#pragma once

#include <string_view>

#include "preimage/image.hpp"
#include "preimage/network.hpp"

namespace preimage {

enum class ObjectiveKind {
  inversion,
  activation_max,
  /// Linear functional <g, u> with a fixed gradient field g. Test hook for the
  /// scheme identities; not reachable from the CLI.
  constant_gradient,
};

/// How the normalization Z is chosen: `unit` keeps `normalization` as given;
/// `automatic` uses ||target||^2 for inversion and |code[unit]| at the initial
/// image for activation maximization (1 when either is zero).
enum class ZMode { unit, automatic };

std::string_view to_string(ObjectiveKind kind);
std::string_view to_string(ZMode mode);

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::inversion;
  /// Layer whose activation is compared (kLastLayer = logits).
  std::size_t layer = kLastLayer;
  /// Target code (inversion).
  FeatureCode target;
  /// Unit index (activation_max).
  std::size_t unit = 0;
  /// Norm exponent, 1 or 2 (inversion).
  int p = 2;
  double normalization = 1.0;
  ZMode z_mode = ZMode::unit;
  /// Gradient field (constant_gradient).
  Image frozen_gradient;
};

struct TermValue {
  double value = 0.0;
  FeatureCode cotangent;
};

/// (1/Z) * ||code - target||_p^p and its derivative w.r.t. code. For p = 1 the
/// subgradient uses sign(0) = 0.
TermValue inversion_term(const FeatureCode& code, const ObjectiveSpec& spec);

/// -(1/Z) * code[unit], negated so that descent increases the activation.
TermValue actmax_term(const FeatureCode& code, const ObjectiveSpec& spec);

/// Dispatches on spec.kind (inversion or activation_max).
TermValue data_term(const FeatureCode& code, const ObjectiveSpec& spec);

/// Returns `spec` with `normalization` fixed according to its z_mode, given the
/// code of the initial image.
ObjectiveSpec resolve_normalization(const ObjectiveSpec& spec, const FeatureCode& initial_code);

struct DataGradient {
  double value = 0.0;
  Image gradient;
};

/// D(Phi(u)) and its gradient w.r.t. u (forward to spec.layer, then backward).
DataGradient data_term_gradient(const Network& net, const Image& u, const ObjectiveSpec& spec);

}  // namespace preimage
