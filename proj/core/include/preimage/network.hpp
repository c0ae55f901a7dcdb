#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "preimage/image.hpp"

namespace preimage {

enum class LayerKind { conv, relu, maxpool, avgpool_global, dense, affine_norm };

std::string_view to_string(LayerKind kind);

/// One layer of a micro CNN.
///
/// conv: `out_channels` filters of odd `kernel_side`, replicate padding, output
///       dims ceil(dim / stride). Correlation with bias.
/// maxpool: 2x2 window, stride 2, output floor(dim / 2); ties go to the first
///          element in row-major order.
/// avgpool_global: mean over rows and columns, output 1 x 1 x C.
/// dense: flattens its input, output 1 x 1 x out_features.
/// affine_norm: per-channel scale and shift.
struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::size_t out_channels = 0;
  std::size_t kernel_side = 0;
  std::size_t stride = 1;
  std::size_t out_features = 0;

  static LayerSpec conv(std::size_t out_channels, std::size_t kernel_side, std::size_t stride = 1) {
    return {LayerKind::conv, out_channels, kernel_side, stride, 0};
  }
  static LayerSpec relu() { return {LayerKind::relu, 0, 0, 1, 0}; }
  static LayerSpec maxpool() { return {LayerKind::maxpool, 0, 0, 2, 0}; }
  static LayerSpec avgpool_global() { return {LayerKind::avgpool_global, 0, 0, 1, 0}; }
  static LayerSpec dense(std::size_t out_features) { return {LayerKind::dense, 0, 0, 1, out_features}; }
  static LayerSpec affine_norm() { return {LayerKind::affine_norm, 0, 0, 1, 0}; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct Shape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;

  std::size_t size() const { return height * width * channels; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Trainable tensors of one layer. For conv, `weight` is laid out
/// [out][in][row][col]; for dense [out][flattened input]; for affine_norm
/// `weight` holds the scales and `bias` the shifts.
struct LayerParams {
  std::vector<double> weight;
  std::vector<double> bias;

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

/// Flattened activation of one layer.
struct FeatureCode {
  std::vector<double> values;
  std::size_t origin_layer = 0;

  std::size_t size() const { return values.size(); }
};

/// Index meaning "the last layer" (the logits for the built-in architectures).
inline constexpr std::size_t kLastLayer = std::numeric_limits<std::size_t>::max();

/// Feed-forward stack with shapes validated at construction.
class Network {
 public:
  /// Validates the layer chain and initializes weights uniformly in
  /// (-a, a), a = sqrt(6 / (fan_in + fan_out)), biases 0, affine scales 1.
  Network(Shape input_shape, std::vector<LayerSpec> layers, std::uint64_t seed);

  /// Uses the given parameters instead of an initialization; sizes are checked.
  Network(Shape input_shape, std::vector<LayerSpec> layers, std::uint64_t seed,
          std::vector<LayerParams> params);

  const Shape& input_shape() const { return input_shape_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  std::size_t num_layers() const { return layers_.size(); }
  std::uint64_t seed() const { return seed_; }

  /// Output shape of layer `index` (kLastLayer allowed).
  const Shape& output_shape(std::size_t index) const;

  /// Resolves kLastLayer and range-checks.
  std::size_t resolve_layer(std::size_t index) const;

  /// Index of the last layer whose successor is a dense layer, i.e. the
  /// deepest representation before classification.
  std::size_t deepest_pre_dense_layer() const;

  /// Index of the last conv layer.
  std::size_t deepest_conv_layer() const;

  const std::vector<LayerParams>& params() const { return params_; }
  std::vector<LayerParams>& mutable_params() { return params_; }

  std::size_t parameter_count() const;

  friend bool operator==(const Network&, const Network&) = default;

 private:
  void check_params() const;

  Shape input_shape_;
  std::vector<LayerSpec> layers_;
  std::uint64_t seed_ = 0;
  std::vector<Shape> shapes_;
  std::vector<LayerParams> params_;
};

/// Activations of every layer: acts[0] is the input, acts[i + 1] the output of layer i.
struct ForwardTrace {
  std::vector<Image> acts;
};

ForwardTrace forward_trace(const Network& net, const Image& input, std::size_t upto_layer = kLastLayer);

/// Flattened activation of `upto_layer` (logits by default).
FeatureCode forward(const Network& net, const Image& input, std::size_t upto_layer = kLastLayer);

/// d<code, cotangent>/d input by reverse-mode differentiation.
Image backward_input(const Network& net, const Image& input, std::size_t upto_layer,
                     const FeatureCode& cotangent);

/// Input gradient plus parameter gradients (accumulated into `grads`, which
/// must be sized like net.params() or empty, in which case it is allocated).
Image backward(const Network& net, const ForwardTrace& trace, std::size_t upto_layer,
               const std::vector<double>& cotangent, std::vector<LayerParams>* grads);

std::vector<LayerParams> zero_like(const std::vector<LayerParams>& params);

/// Built-in reference architectures on 32 x 32 x 1 inputs.
///   vggish:  conv3x3(8) relu maxpool conv3x3(16) relu maxpool dense(3)
///   densish: conv3x3(6) relu conv3x3(12) relu maxpool avgpool_global dense(3)
Network make_vggish(std::uint64_t seed);
Network make_densish(std::uint64_t seed);
bool is_builtin_architecture(std::string_view name);
/// Throws ParameterError for unknown names.
Network make_builtin(std::string_view name, std::uint64_t seed);

}  // namespace preimage
