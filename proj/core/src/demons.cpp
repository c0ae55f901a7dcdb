#include "preimage/demons.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "preimage/errors.hpp"
#include "preimage/rng.hpp"

namespace preimage {

namespace {

Image crop(const Image& u, std::size_t top, std::size_t left, std::size_t h, std::size_t w) {
  Image out(h, w, u.channels());
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < u.channels(); ++c) out.at(y, x, c) = u.at(top + y, left + x, c);
  return out;
}

void paste(Image& dst, const Image& src, std::size_t top, std::size_t left) {
  for (std::size_t y = 0; y < src.height(); ++y)
    for (std::size_t x = 0; x < src.width(); ++x)
      for (std::size_t c = 0; c < src.channels(); ++c) dst.at(top + y, left + x, c) = src.at(y, x, c);
}

// Data term and its gradient over the full (possibly enlarged) image; the
// network sees the centered window of its input size.
DataGradient windowed_data_gradient(const Network& net, const Image& u, const ObjectiveSpec& objective) {
  if (objective.kind == ObjectiveKind::constant_gradient) return data_term_gradient(net, u, objective);
  const Shape& in = net.input_shape();
  if (u.height() == in.height && u.width() == in.width) return data_term_gradient(net, u, objective);
  if (u.height() < in.height || u.width() < in.width || u.channels() != in.channels) {
    throw DimensionError("run: image smaller than the network input");
  }
  const std::size_t top = (u.height() - in.height) / 2;
  const std::size_t left = (u.width() - in.width) / 2;
  DataGradient window = data_term_gradient(net, crop(u, top, left, in.height, in.width), objective);
  Image full(u.height(), u.width(), u.channels());
  paste(full, window.gradient, top, left);
  return {window.value, std::move(full)};
}

FeatureCode initial_code(const Network& net, const Image& u, const ObjectiveSpec& objective) {
  const Shape& in = net.input_shape();
  if (u.height() == in.height && u.width() == in.width) return forward(net, u, objective.layer);
  return forward(net,
                 crop(u, (u.height() - in.height) / 2, (u.width() - in.width) / 2, in.height, in.width),
                 objective.layer);
}

}  // namespace

Image demons_step(const Image& u, const Image& grad, const DemonsConfig& config) {
  if (!u.same_shape(grad)) throw DimensionError("demons_step: gradient shape != image shape");
  if (!(config.step_size > 0.0)) throw ParameterError("demons_step: step size must be positive");
  Image update = config.fluid_kernel ? convolve(grad, *config.fluid_kernel, config.boundary) : grad;
  Image next = u;
  for (std::size_t i = 0; i < next.size(); ++i) next[i] -= config.step_size * update[i];
  if (config.elastic_kernel) next = convolve(next, *config.elastic_kernel, config.boundary);
  if (config.clamp) {
    for (double& v : next.data()) v = std::clamp(v, 0.0, 1.0);
  }
  return next;
}

Image jitter_shift(const Image& image, Offset offset) {
  const long h = static_cast<long>(image.height());
  const long w = static_cast<long>(image.width());
  if (std::abs(offset.dx) > w || std::abs(offset.dy) > h) {
    throw ParameterError("jitter_shift: offset exceeds image dimensions");
  }
  Image out(image.height(), image.width(), image.channels());
  for (long y = 0; y < h; ++y) {
    const auto sy = static_cast<std::size_t>(std::clamp(y - offset.dy, 0L, h - 1));
    for (long x = 0; x < w; ++x) {
      const auto sx = static_cast<std::size_t>(std::clamp(x - offset.dx, 0L, w - 1));
      for (std::size_t c = 0; c < image.channels(); ++c)
        out.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), c) = image.at(sy, sx, c);
    }
  }
  return out;
}

Image initial_noise(const Shape& shape, std::uint64_t seed) {
  Rng rng(seed);
  Image u(shape.height, shape.width, shape.channels);
  for (double& v : u.data()) v = rng.uniform(0.4, 0.6);
  return u;
}

RunResult run(const Network& net, const ObjectiveSpec& objective, const DemonsConfig& config,
              const OctaveSchedule& schedule, const std::optional<Image>& init) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!(schedule.jitter_fraction >= 0.0 && schedule.jitter_fraction <= 0.3)) {
    throw ParameterError("run: jitter_fraction must lie in [0, 0.3]");
  }
  std::vector<Octave> octaves = schedule.octaves;
  if (octaves.empty()) octaves.push_back({1.0, config.steps, config.step_size});
  for (std::size_t o = 0; o < octaves.size(); ++o) {
    if (!(octaves[o].scale > 0.0)) throw ParameterError("run: octave scale must be positive");
    if (o > 0 && octaves[o].scale < octaves[o - 1].scale) throw ParameterError("run: octave scales must be nondecreasing");
    if (octaves[o].steps == 0) throw ParameterError("run: octave step count must be positive");
    if (!(octaves[o].step_size > 0.0)) throw ParameterError("run: octave step size must be positive");
  }

  // Jitter draws use a stream decorrelated from the initial noise.
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  Image u;
  if (init) {
    u = *init;
  } else if (objective.kind == ObjectiveKind::constant_gradient) {
    throw ParameterError("run: constant_gradient objectives need an explicit initial image");
  } else {
    u = initial_noise(net.input_shape(), config.seed);
  }
  u.require_finite("run: initial image");
  const std::size_t base_h = u.height();
  const std::size_t base_w = u.width();

  ObjectiveSpec obj = objective;
  if (obj.kind != ObjectiveKind::constant_gradient) obj = resolve_normalization(obj, initial_code(net, u, obj));

  RunResult result;
  std::size_t step = 0;
  for (std::size_t o = 0; o < octaves.size(); ++o) {
    const Octave& oc = octaves[o];
    u = resize(u, scaled_dim(base_h, oc.scale), scaled_dim(base_w, oc.scale));
    DemonsConfig cfg = config;
    cfg.step_size = oc.step_size;
    const long jy = std::lround(schedule.jitter_fraction * static_cast<double>(u.height()));
    const long jx = std::lround(schedule.jitter_fraction * static_cast<double>(u.width()));

    for (std::size_t k = 0; k < oc.steps; ++k, ++step) {
      Offset off;
      if (jx > 0) off.dx = static_cast<long>(rng.uniform_int(-jx, jx));
      if (jy > 0) off.dy = static_cast<long>(rng.uniform_int(-jy, jy));
      const bool shifted = off.dx != 0 || off.dy != 0;
      const Image view = shifted ? jitter_shift(u, off) : u;

      DataGradient dg = windowed_data_gradient(net, view, obj);
      StepMetrics m;
      m.step = step;
      m.octave = o;
      m.data_term = dg.value;
      Image grad = std::move(dg.gradient);
      if (config.regularizer.kind != RegularizerKind::none && config.regularizer.lambda != 0.0) {
        const RegularizerValue r = evaluate(config.regularizer, view);
        m.reg_term = r.value;
        grad += r.gradient;
      }
      m.total = m.data_term + m.reg_term;
      if (shifted) grad = jitter_shift(grad, {-off.dx, -off.dy});
      m.grad_maxnorm = grad.max_abs();

      if (!grad.all_finite() || !std::isfinite(m.total)) {
        std::ostringstream msg;
        msg << "run: non-finite gradient or energy at step " << step;
        if (!result.metrics.empty()) {
          const auto& last = result.metrics.back();
          msg << " (last good step " << last.step << ": total " << last.total << ")";
        }
        throw NumericalError(msg.str());
      }
      result.metrics.push_back(m);
      u = demons_step(u, grad, cfg);
      if (!u.all_finite()) {
        throw NumericalError("run: non-finite iterate after step " + std::to_string(step) + " (last good total " +
                             std::to_string(m.total) + ")");
      }
    }
  }
  result.final = std::move(u);
  result.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

void write_metrics_csv(const std::vector<StepMetrics>& metrics, std::ostream& out) {
  out << "step,octave,data_term,reg_term,total,grad_maxnorm\n";
  char buf[160];
  for (const auto& m : metrics) {
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g,%.17g,%.17g\n", m.step, m.octave, m.data_term,
                  m.reg_term, m.total, m.grad_maxnorm);
    out << buf;
  }
}

}  // namespace preimage
