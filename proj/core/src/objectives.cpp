#include "preimage/objectives.hpp"

#include <cmath>
#include <string>

#include "preimage/errors.hpp"

namespace preimage {

namespace {

void require_z(const ObjectiveSpec& spec) {
  if (!(spec.normalization > 0.0) || !std::isfinite(spec.normalization))
    throw ParameterError("objective: normalization Z must be positive");
}

}  // namespace

std::string_view to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::inversion:
      return "inversion";
    case ObjectiveKind::activation_max:
      return "activation_max";
    case ObjectiveKind::constant_gradient:
      return "constant_gradient";
  }
  return "?";
}

std::string_view to_string(ZMode mode) { return mode == ZMode::unit ? "unit" : "auto"; }

TermValue inversion_term(const FeatureCode& code, const ObjectiveSpec& spec) {
  require_z(spec);
  if (spec.p != 1 && spec.p != 2) throw ParameterError("inversion_term: p must be 1 or 2");
  if (code.size() != spec.target.size()) {
    throw DimensionError("inversion_term: code length " + std::to_string(code.size()) + " != target length " +
                         std::to_string(spec.target.size()));
  }
  const double inv_z = 1.0 / spec.normalization;
  TermValue out{0.0, {std::vector<double>(code.size()), code.origin_layer}};
  for (std::size_t i = 0; i < code.size(); ++i) {
    const double d = code.values[i] - spec.target.values[i];
    if (spec.p == 2) {
      out.value += d * d;
      out.cotangent.values[i] = 2.0 * d * inv_z;
    } else {
      out.value += std::abs(d);
      out.cotangent.values[i] = d > 0.0 ? inv_z : (d < 0.0 ? -inv_z : 0.0);
    }
  }
  out.value *= inv_z;
  return out;
}

TermValue actmax_term(const FeatureCode& code, const ObjectiveSpec& spec) {
  require_z(spec);
  if (spec.unit >= code.size()) {
    throw DimensionError("actmax_term: unit " + std::to_string(spec.unit) + " out of range for code of length " +
                         std::to_string(code.size()));
  }
  const double inv_z = 1.0 / spec.normalization;
  TermValue out{-inv_z * code.values[spec.unit], {std::vector<double>(code.size(), 0.0), code.origin_layer}};
  out.cotangent.values[spec.unit] = -inv_z;
  return out;
}

TermValue data_term(const FeatureCode& code, const ObjectiveSpec& spec) {
  switch (spec.kind) {
    case ObjectiveKind::inversion:
      return inversion_term(code, spec);
    case ObjectiveKind::activation_max:
      return actmax_term(code, spec);
    case ObjectiveKind::constant_gradient:
      break;
  }
  throw ParameterError("data_term: constant_gradient objectives have no feature code");
}

ObjectiveSpec resolve_normalization(const ObjectiveSpec& spec, const FeatureCode& initial_code) {
  ObjectiveSpec out = spec;
  if (spec.z_mode != ZMode::automatic) return out;
  double z = 0.0;
  if (spec.kind == ObjectiveKind::inversion) {
    for (double v : spec.target.values) z += v * v;
  } else if (spec.kind == ObjectiveKind::activation_max) {
    if (spec.unit >= initial_code.size()) throw DimensionError("resolve_normalization: unit out of range");
    z = std::abs(initial_code.values[spec.unit]);
  }
  out.normalization = z > 0.0 ? z : 1.0;
  return out;
}

DataGradient data_term_gradient(const Network& net, const Image& u, const ObjectiveSpec& spec) {
  if (spec.kind == ObjectiveKind::constant_gradient) {
    if (!spec.frozen_gradient.same_shape(u)) throw DimensionError("constant_gradient: field shape != image shape");
    return {dot(spec.frozen_gradient, u), spec.frozen_gradient};
  }
  const ForwardTrace trace = forward_trace(net, u, spec.layer);
  const std::size_t layer = net.resolve_layer(spec.layer);
  const TermValue term = data_term(FeatureCode{trace.acts.back().values(), layer}, spec);
  return {term.value, backward(net, trace, layer, term.cotangent.values, nullptr)};
}

}  // namespace preimage
