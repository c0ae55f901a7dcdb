#include "preimage/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "preimage/errors.hpp"
#include "preimage/rng.hpp"

namespace preimage {

namespace {

std::size_t clamp_index(long i, std::size_t n) {
  if (i < 0) return 0;
  if (static_cast<std::size_t>(i) >= n) return n - 1;
  return static_cast<std::size_t>(i);
}

Shape next_shape(const Shape& in, const LayerSpec& spec, std::size_t index) {
  const std::string where = "layer " + std::to_string(index) + " (" + std::string(to_string(spec.kind)) + ")";
  switch (spec.kind) {
    case LayerKind::conv:
      if (spec.out_channels == 0) throw DimensionError(where + ": out_channels must be positive");
      if (spec.kernel_side == 0 || spec.kernel_side % 2 == 0)
        throw DimensionError(where + ": kernel_side must be odd");
      if (spec.stride == 0) throw DimensionError(where + ": stride must be >= 1");
      return {(in.height + spec.stride - 1) / spec.stride, (in.width + spec.stride - 1) / spec.stride,
              spec.out_channels};
    case LayerKind::relu:
    case LayerKind::affine_norm:
      return in;
    case LayerKind::maxpool:
      if (in.height < 2 || in.width < 2) throw DimensionError(where + ": input smaller than the 2x2 window");
      return {in.height / 2, in.width / 2, in.channels};
    case LayerKind::avgpool_global:
      return {1, 1, in.channels};
    case LayerKind::dense:
      if (spec.out_features == 0) throw DimensionError(where + ": out_features must be positive");
      return {1, 1, spec.out_features};
  }
  throw DimensionError(where + ": unknown layer kind");
}

// (weight count, bias count) for a layer given its input shape.
std::pair<std::size_t, std::size_t> param_sizes(const Shape& in, const LayerSpec& spec) {
  switch (spec.kind) {
    case LayerKind::conv:
      return {spec.out_channels * in.channels * spec.kernel_side * spec.kernel_side, spec.out_channels};
    case LayerKind::dense:
      return {spec.out_features * in.size(), spec.out_features};
    case LayerKind::affine_norm:
      return {in.channels, in.channels};
    default:
      return {0, 0};
  }
}

// Source row (or column) for every (output position, tap) pair under replicate padding.
std::vector<std::size_t> tap_table(std::size_t out_n, std::size_t in_n, std::size_t k, std::size_t stride) {
  const long r = static_cast<long>(k / 2);
  std::vector<std::size_t> t(out_n * k);
  for (std::size_t y = 0; y < out_n; ++y)
    for (std::size_t i = 0; i < k; ++i) t[y * k + i] = clamp_index(static_cast<long>(y * stride + i) - r, in_n);
  return t;
}

// Weights reordered from [o][c][i][j] to [i][j][c][o] so the output-channel loop is contiguous.
std::vector<double> transpose_weights(const std::vector<double>& w, std::size_t cout, std::size_t cin, std::size_t k) {
  std::vector<double> t(w.size());
  for (std::size_t o = 0; o < cout; ++o)
    for (std::size_t c = 0; c < cin; ++c)
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) t[((i * k + j) * cin + c) * cout + o] = w[((o * cin + c) * k + i) * k + j];
  return t;
}

void conv_forward(const Image& in, const LayerSpec& spec, const LayerParams& p, Image& out) {
  const std::size_t k = spec.kernel_side;
  const std::size_t cin = in.channels();
  const std::size_t cout = spec.out_channels;
  const auto rows = tap_table(out.height(), in.height(), k, spec.stride);
  const auto cols = tap_table(out.width(), in.width(), k, spec.stride);
  const auto wt = transpose_weights(p.weight, cout, cin, k);
  const double* src = in.data().data();
  double* dst = out.data().data();
  for (std::size_t y = 0; y < out.height(); ++y) {
    for (std::size_t x = 0; x < out.width(); ++x) {
      double* acc = dst + (y * out.width() + x) * cout;
      for (std::size_t o = 0; o < cout; ++o) acc[o] = p.bias[o];
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t sy = rows[y * k + i];
        for (std::size_t j = 0; j < k; ++j) {
          const double* px = src + (sy * in.width() + cols[x * k + j]) * cin;
          const double* w = wt.data() + (i * k + j) * cin * cout;
          for (std::size_t c = 0; c < cin; ++c) {
            const double v = px[c];
            const double* wc = w + c * cout;
            for (std::size_t o = 0; o < cout; ++o) acc[o] += wc[o] * v;
          }
        }
      }
    }
  }
}

void conv_backward(const Image& in, const LayerSpec& spec, const LayerParams& p, const Image& gout,
                   Image& gin, LayerParams* gp) {
  const std::size_t k = spec.kernel_side;
  const std::size_t cin = in.channels();
  const std::size_t cout = spec.out_channels;
  const auto rows = tap_table(gout.height(), in.height(), k, spec.stride);
  const auto cols = tap_table(gout.width(), in.width(), k, spec.stride);
  const auto wt = transpose_weights(p.weight, cout, cin, k);
  std::vector<double> gwt(gp ? wt.size() : 0, 0.0);
  const double* src = in.data().data();
  double* gsrc = gin.data().data();
  for (std::size_t y = 0; y < gout.height(); ++y) {
    for (std::size_t x = 0; x < gout.width(); ++x) {
      const double* g = gout.data().data() + (y * gout.width() + x) * cout;
      if (gp)
        for (std::size_t o = 0; o < cout; ++o) gp->bias[o] += g[o];
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t sy = rows[y * k + i];
        for (std::size_t j = 0; j < k; ++j) {
          const std::size_t base = (sy * in.width() + cols[x * k + j]) * cin;
          const std::size_t tap = (i * k + j) * cin * cout;
          for (std::size_t c = 0; c < cin; ++c) {
            const double* wc = wt.data() + tap + c * cout;
            double s = 0.0;
            for (std::size_t o = 0; o < cout; ++o) s += wc[o] * g[o];
            gsrc[base + c] += s;
            if (gp) {
              const double v = src[base + c];
              double* gw = gwt.data() + tap + c * cout;
              for (std::size_t o = 0; o < cout; ++o) gw[o] += v * g[o];
            }
          }
        }
      }
    }
  }
  if (gp) {
    for (std::size_t o = 0; o < cout; ++o)
      for (std::size_t c = 0; c < cin; ++c)
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t j = 0; j < k; ++j)
            gp->weight[((o * cin + c) * k + i) * k + j] += gwt[((i * k + j) * cin + c) * cout + o];
  }
}

// Row-major first-wins argmax inside the 2x2 window at output (y, x).
std::pair<std::size_t, std::size_t> pool_argmax(const Image& in, std::size_t y, std::size_t x, std::size_t c) {
  std::size_t by = 2 * y, bx = 2 * x;
  double best = in.at(by, bx, c);
  for (std::size_t dy = 0; dy < 2; ++dy) {
    for (std::size_t dx = 0; dx < 2; ++dx) {
      const double v = in.at(2 * y + dy, 2 * x + dx, c);
      if (v > best) {
        best = v;
        by = 2 * y + dy;
        bx = 2 * x + dx;
      }
    }
  }
  return {by, bx};
}

Image layer_forward(const Image& in, const LayerSpec& spec, const LayerParams& p, const Shape& out_shape) {
  Image out(out_shape.height, out_shape.width, out_shape.channels);
  switch (spec.kind) {
    case LayerKind::conv:
      conv_forward(in, spec, p, out);
      break;
    case LayerKind::relu:
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
      break;
    case LayerKind::maxpool:
      for (std::size_t y = 0; y < out.height(); ++y)
        for (std::size_t x = 0; x < out.width(); ++x)
          for (std::size_t c = 0; c < out.channels(); ++c) {
            const auto [by, bx] = pool_argmax(in, y, x, c);
            out.at(y, x, c) = in.at(by, bx, c);
          }
      break;
    case LayerKind::avgpool_global: {
      const double n = static_cast<double>(in.height() * in.width());
      for (std::size_t c = 0; c < in.channels(); ++c) {
        double s = 0.0;
        for (std::size_t y = 0; y < in.height(); ++y)
          for (std::size_t x = 0; x < in.width(); ++x) s += in.at(y, x, c);
        out[c] = s / n;
      }
      break;
    }
    case LayerKind::dense: {
      const std::size_t n = in.size();
      for (std::size_t f = 0; f < spec.out_features; ++f) {
        double acc = p.bias[f];
        const double* w = &p.weight[f * n];
        for (std::size_t i = 0; i < n; ++i) acc += w[i] * in[i];
        out[f] = acc;
      }
      break;
    }
    case LayerKind::affine_norm: {
      const std::size_t nc = in.channels();
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = p.weight[i % nc] * in[i] + p.bias[i % nc];
      break;
    }
  }
  return out;
}

Image layer_backward(const Image& in, const LayerSpec& spec, const LayerParams& p, const Image& gout,
                     LayerParams* gp) {
  Image gin(in.height(), in.width(), in.channels());
  switch (spec.kind) {
    case LayerKind::conv:
      conv_backward(in, spec, p, gout, gin, gp);
      break;
    case LayerKind::relu:
      for (std::size_t i = 0; i < in.size(); ++i) gin[i] = in[i] > 0.0 ? gout[i] : 0.0;
      break;
    case LayerKind::maxpool:
      for (std::size_t y = 0; y < gout.height(); ++y)
        for (std::size_t x = 0; x < gout.width(); ++x)
          for (std::size_t c = 0; c < gout.channels(); ++c) {
            const auto [by, bx] = pool_argmax(in, y, x, c);
            gin.at(by, bx, c) += gout.at(y, x, c);
          }
      break;
    case LayerKind::avgpool_global: {
      const double n = static_cast<double>(in.height() * in.width());
      for (std::size_t y = 0; y < in.height(); ++y)
        for (std::size_t x = 0; x < in.width(); ++x)
          for (std::size_t c = 0; c < in.channels(); ++c) gin.at(y, x, c) = gout[c] / n;
      break;
    }
    case LayerKind::dense: {
      const std::size_t n = in.size();
      for (std::size_t f = 0; f < spec.out_features; ++f) {
        const double g = gout[f];
        const double* w = &p.weight[f * n];
        for (std::size_t i = 0; i < n; ++i) gin[i] += w[i] * g;
        if (gp) {
          double* gw = &gp->weight[f * n];
          for (std::size_t i = 0; i < n; ++i) gw[i] += in[i] * g;
          gp->bias[f] += g;
        }
      }
      break;
    }
    case LayerKind::affine_norm: {
      const std::size_t nc = in.channels();
      for (std::size_t i = 0; i < in.size(); ++i) {
        gin[i] = p.weight[i % nc] * gout[i];
        if (gp) {
          gp->weight[i % nc] += in[i] * gout[i];
          gp->bias[i % nc] += gout[i];
        }
      }
      break;
    }
  }
  return gin;
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv:
      return "conv";
    case LayerKind::relu:
      return "relu";
    case LayerKind::maxpool:
      return "maxpool";
    case LayerKind::avgpool_global:
      return "avgpool_global";
    case LayerKind::dense:
      return "dense";
    case LayerKind::affine_norm:
      return "affine_norm";
  }
  return "?";
}

Network::Network(Shape input_shape, std::vector<LayerSpec> layers, std::uint64_t seed)
    : input_shape_(input_shape), layers_(std::move(layers)), seed_(seed) {
  if (input_shape_.size() == 0) throw DimensionError("Network: input shape must be positive");
  if (layers_.empty()) throw DimensionError("Network: no layers");
  Shape cur = input_shape_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    cur = next_shape(cur, layers_[i], i);
    shapes_.push_back(cur);
  }

  Rng rng(seed);
  Shape in = input_shape_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& spec = layers_[i];
    const auto [nw, nb] = param_sizes(in, spec);
    LayerParams p;
    p.weight.resize(nw);
    p.bias.assign(nb, 0.0);
    if (spec.kind == LayerKind::affine_norm) {
      std::fill(p.weight.begin(), p.weight.end(), 1.0);
    } else if (nw > 0) {
      double fan_in = 0, fan_out = 0;
      if (spec.kind == LayerKind::conv) {
        const double kk = static_cast<double>(spec.kernel_side * spec.kernel_side);
        fan_in = static_cast<double>(in.channels) * kk;
        fan_out = static_cast<double>(spec.out_channels) * kk;
      } else {
        fan_in = static_cast<double>(in.size());
        fan_out = static_cast<double>(spec.out_features);
      }
      const double a = std::sqrt(6.0 / (fan_in + fan_out));
      for (double& w : p.weight) w = rng.uniform(-a, a);
    }
    params_.push_back(std::move(p));
    in = shapes_[i];
  }
}

Network::Network(Shape input_shape, std::vector<LayerSpec> layers, std::uint64_t seed,
                 std::vector<LayerParams> params)
    : input_shape_(input_shape), layers_(std::move(layers)), seed_(seed), params_(std::move(params)) {
  if (input_shape_.size() == 0) throw DimensionError("Network: input shape must be positive");
  if (layers_.empty()) throw DimensionError("Network: no layers");
  Shape cur = input_shape_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    cur = next_shape(cur, layers_[i], i);
    shapes_.push_back(cur);
  }
  check_params();
}

void Network::check_params() const {
  if (params_.size() != layers_.size()) throw DimensionError("Network: parameter list length mismatch");
  Shape in = input_shape_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto [nw, nb] = param_sizes(in, layers_[i]);
    if (params_[i].weight.size() != nw || params_[i].bias.size() != nb) {
      throw DimensionError("Network: parameter size mismatch at layer " + std::to_string(i));
    }
    for (double v : params_[i].weight)
      if (!std::isfinite(v)) throw DataError("Network: non-finite weight at layer " + std::to_string(i));
    for (double v : params_[i].bias)
      if (!std::isfinite(v)) throw DataError("Network: non-finite bias at layer " + std::to_string(i));
    in = shapes_[i];
  }
}

const Shape& Network::output_shape(std::size_t index) const { return shapes_[resolve_layer(index)]; }

std::size_t Network::resolve_layer(std::size_t index) const {
  if (layers_.empty()) throw DimensionError("Network: no layers");
  if (index == kLastLayer) return layers_.size() - 1;
  if (index >= layers_.size()) {
    throw DimensionError("layer index " + std::to_string(index) + " out of range (" +
                         std::to_string(layers_.size()) + " layers)");
  }
  return index;
}

std::size_t Network::deepest_pre_dense_layer() const {
  for (std::size_t i = layers_.size(); i-- > 1;) {
    if (layers_[i].kind == LayerKind::dense) return i - 1;
  }
  throw DimensionError("Network: no layer precedes a dense layer");
}

std::size_t Network::deepest_conv_layer() const {
  for (std::size_t i = layers_.size(); i-- > 0;) {
    if (layers_[i].kind == LayerKind::conv) return i;
  }
  throw DimensionError("Network: no conv layer");
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.weight.size() + p.bias.size();
  return n;
}

std::vector<LayerParams> zero_like(const std::vector<LayerParams>& params) {
  std::vector<LayerParams> out(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    out[i].weight.assign(params[i].weight.size(), 0.0);
    out[i].bias.assign(params[i].bias.size(), 0.0);
  }
  return out;
}

ForwardTrace forward_trace(const Network& net, const Image& input, std::size_t upto_layer) {
  const Shape& s = net.input_shape();
  if (input.height() != s.height || input.width() != s.width || input.channels() != s.channels) {
    throw DimensionError("forward: input is " + std::to_string(input.height()) + "x" +
                         std::to_string(input.width()) + "x" + std::to_string(input.channels()) +
                         ", network expects " + std::to_string(s.height) + "x" + std::to_string(s.width) +
                         "x" + std::to_string(s.channels));
  }
  const std::size_t last = net.resolve_layer(upto_layer);
  ForwardTrace trace;
  trace.acts.reserve(last + 2);
  trace.acts.push_back(input);
  for (std::size_t i = 0; i <= last; ++i) {
    trace.acts.push_back(layer_forward(trace.acts.back(), net.layers()[i], net.params()[i], net.output_shape(i)));
  }
  return trace;
}

FeatureCode forward(const Network& net, const Image& input, std::size_t upto_layer) {
  ForwardTrace trace = forward_trace(net, input, upto_layer);
  const std::size_t last = net.resolve_layer(upto_layer);
  return {trace.acts.back().values(), last};
}

Image backward(const Network& net, const ForwardTrace& trace, std::size_t upto_layer,
               const std::vector<double>& cotangent, std::vector<LayerParams>* grads) {
  const std::size_t last = net.resolve_layer(upto_layer);
  if (trace.acts.size() < last + 2) throw DimensionError("backward: trace does not reach the requested layer");
  const Shape& os = net.output_shape(last);
  if (cotangent.size() != os.size()) {
    throw DimensionError("backward: cotangent length " + std::to_string(cotangent.size()) + " != layer size " +
                         std::to_string(os.size()));
  }
  if (grads && grads->empty()) *grads = zero_like(net.params());
  Image g(os.height, os.width, os.channels, cotangent);
  for (std::size_t i = last + 1; i-- > 0;) {
    g = layer_backward(trace.acts[i], net.layers()[i], net.params()[i], g, grads ? &(*grads)[i] : nullptr);
  }
  return g;
}

Image backward_input(const Network& net, const Image& input, std::size_t upto_layer,
                     const FeatureCode& cotangent) {
  const ForwardTrace trace = forward_trace(net, input, upto_layer);
  return backward(net, trace, upto_layer, cotangent.values, nullptr);
}

Network make_vggish(std::uint64_t seed) {
  return Network({32, 32, 1},
                 {LayerSpec::conv(8, 3), LayerSpec::relu(), LayerSpec::maxpool(), LayerSpec::conv(16, 3),
                  LayerSpec::relu(), LayerSpec::maxpool(), LayerSpec::dense(3)},
                 seed);
}

Network make_densish(std::uint64_t seed) {
  return Network({32, 32, 1},
                 {LayerSpec::conv(6, 3), LayerSpec::relu(), LayerSpec::conv(12, 3), LayerSpec::relu(),
                  LayerSpec::maxpool(), LayerSpec::avgpool_global(), LayerSpec::dense(3)},
                 seed);
}

bool is_builtin_architecture(std::string_view name) { return name == "vggish" || name == "densish"; }

Network make_builtin(std::string_view name, std::uint64_t seed) {
  if (name == "vggish") return make_vggish(seed);
  if (name == "densish") return make_densish(seed);
  throw ParameterError("unknown architecture '" + std::string(name) + "' (expected vggish or densish)");
}

}  // namespace preimage
