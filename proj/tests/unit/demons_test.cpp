#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "preimage/demons.hpp"
#include "preimage/errors.hpp"

namespace preimage {
namespace {

using testing::random_image;

Network identity_net(Shape shape) {
  std::vector<LayerParams> params(2);
  params[0].weight.assign(9, 0.0);
  params[0].weight[4] = 1.0;
  params[0].bias.assign(1, 0.0);
  params[1].weight.assign(1, 1.0);
  params[1].bias.assign(1, 0.0);
  return Network(shape, {LayerSpec::conv(1, 3), LayerSpec::affine_norm()}, 0, params);
}

ObjectiveSpec frozen(const Image& g) {
  ObjectiveSpec s;
  s.kind = ObjectiveKind::constant_gradient;
  s.frozen_gradient = g;
  return s;
}

ObjectiveSpec actmax(std::size_t unit) {
  ObjectiveSpec s;
  s.kind = ObjectiveKind::activation_max;
  s.unit = unit;
  return s;
}

DemonsConfig plain(double tau, std::size_t steps) {
  DemonsConfig c;
  c.step_size = tau;
  c.steps = steps;
  return c;
}

TEST(DemonsStep, SpecialCases) {
  const Image u = random_image(9, 9, 1, 1), g = random_image(9, 9, 1, 2, -1, 1);
  const Kernel k = gaussian_kernel(5, 1.2);
  DemonsConfig c = plain(0.7, 1);
  EXPECT_EQ(demons_step(u, g, c), u - 0.7 * g);
  c.fluid_kernel = k;
  EXPECT_LE(max_abs_diff(demons_step(u, g, c), u - 0.7 * convolve(g, k)), 1e-15);
  c.fluid_kernel.reset();
  c.elastic_kernel = k;
  EXPECT_LE(max_abs_diff(demons_step(u, g, c), convolve(u - 0.7 * g, k)), 1e-15);
  c.fluid_kernel = sobolev_kernel(3, 1.0);
  const Image both = convolve(u - 0.7 * convolve(g, *c.fluid_kernel), k);
  EXPECT_LE(max_abs_diff(demons_step(u, g, c), both), 1e-15);
  EXPECT_THROW(demons_step(u, Image(8, 9, 1), c), DimensionError);
}

TEST(DemonsStep, Clamp) {
  const Image u = random_image(6, 6, 1, 3);
  DemonsConfig c = plain(5.0, 1);
  c.clamp = true;
  const Image out = demons_step(u, random_image(6, 6, 1, 4, -1, 1), c);
  for (double v : out.data()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Jitter, Examples) {
  const Image u = random_image(6, 8, 2, 5);
  EXPECT_EQ(jitter_shift(u, {0, 0}), u);
  const Image back = jitter_shift(jitter_shift(u, {2, 0}), {-2, 0});
  for (std::size_t y = 0; y < 6; ++y)
    for (std::size_t x = 2; x < 6; ++x)
      for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(back.at(y, x, c), u.at(y, x, c));
  const Image k = Image::constant(5, 5, 1, 0.4);
  EXPECT_EQ(jitter_shift(k, {-3, 4}), k);
  EXPECT_EQ(jitter_shift(u, {1, -1}).at(0, 1, 0), u.at(1, 0, 0));
  EXPECT_THROW(jitter_shift(u, {9, 0}), ParameterError);
}

TEST(Run, SingleStepMatchesDemonsStep) {
  const Network net = make_vggish(0);
  const Image u0 = random_image(32, 32, 1, 6);
  DemonsConfig c = plain(0.5, 1);
  c.fluid_kernel = sobolev_kernel(5, 1.0);
  const RunResult r = run(net, actmax(2), c, {}, u0);
  const Image g = data_term_gradient(net, u0, actmax(2)).gradient;
  EXPECT_EQ(r.final, demons_step(u0, g, c));
  ASSERT_EQ(r.metrics.size(), 1u);
}

TEST(Run, LinearNetworkDescendsGeometrically) {
  const Network net = identity_net({8, 8, 1});
  const Image target = random_image(8, 8, 1, 7);
  const Image u0 = random_image(8, 8, 1, 8);
  ObjectiveSpec s;
  s.target = FeatureCode{target.values(), 1};
  s.normalization = 2.0;
  const double tau = 0.1;
  const std::size_t n = 25;
  const RunResult r = run(net, s, plain(tau, n), {}, u0);
  const double factor = std::pow(1.0 - 2.0 * tau / s.normalization, static_cast<double>(n));
  const Image expected = target + factor * (u0 - target);
  EXPECT_LE(max_abs_diff(r.final, expected), 1e-13);
  for (std::size_t k = 1; k < n; ++k) {
    EXPECT_LT(r.metrics[k].data_term, r.metrics[k - 1].data_term);
    EXPECT_NEAR(r.metrics[k].data_term / r.metrics[k - 1].data_term, std::pow(1 - 2 * tau / 2.0, 2), 1e-10);
  }
}

TEST(Run, IdentityKernelsReproducePlainDescent) {
  const Network net = make_vggish(0);
  ObjectiveSpec s = actmax(0);
  DemonsConfig a = plain(1.0, 50), b = plain(1.0, 50);
  b.fluid_kernel = dirac(3);
  b.elastic_kernel = dirac(5);
  a.seed = b.seed = 4;
  const RunResult ra = run(net, s, a, {}), rb = run(net, s, b, {});
  ASSERT_EQ(ra.metrics.size(), 50u);
  for (std::size_t k = 0; k < 50; ++k) EXPECT_NEAR(ra.metrics[k].total, rb.metrics[k].total, 1e-12);
  EXPECT_LE(max_abs_diff(ra.final, rb.final), 1e-12);

  // Zero-weight regularizers leave the trajectory bit-identical.
  DemonsConfig c = a;
  c.regularizer = {RegularizerKind::tv, 0.0, 1e-3};
  EXPECT_EQ(run(net, s, c, {}).final, ra.final);
}

TEST(Run, FluidTelescoping) {
  const Image u0 = random_image(16, 16, 1, 9);
  const Image g = random_image(16, 16, 1, 10, -1, 1);
  DemonsConfig c = plain(0.3, 20);
  c.fluid_kernel = sobolev_kernel(5, 1.0);
  const RunResult r = run(make_vggish(0), frozen(g), c, {}, u0);
  const Image expected = u0 - (20 * 0.3) * testing::naive_convolve_replicate(g, c.fluid_kernel->weights(), 5);
  EXPECT_LE(max_abs_diff(r.final, expected), 1e-10);
}

TEST(Run, ElasticZeroGradientIsRepeatedSmoothing) {
  const Image u0 = random_image(64, 64, 1, 11);
  DemonsConfig c = plain(1.0, 10);
  c.elastic_kernel = gaussian_kernel(5, 1.0);
  const auto& w = c.elastic_kernel->weights();
  const RunResult r = run(make_vggish(0), frozen(Image(64, 64, 1)), c, {}, u0);

  Image oracle = u0;
  for (int k = 0; k < 10; ++k) oracle = testing::naive_convolve_replicate(oracle, w, 5);
  EXPECT_LE(max_abs_diff(r.final, oracle), 1e-10);

  // Away from the border the same result is one pass of the 10-fold self-convolved kernel.
  std::vector<double> kn = w;
  std::size_t side = 5;
  for (int k = 1; k < 10; ++k) {
    kn = testing::full_convolve(kn, side, w, 5);
    side += 4;
  }
  const Image once = testing::naive_convolve_replicate(u0, kn, side);
  const std::size_t m = side / 2;
  for (std::size_t y = m; y + m < 64; ++y)
    for (std::size_t x = m; x + m < 64; ++x) EXPECT_NEAR(r.final.at(y, x), once.at(y, x), 1e-10);
}

TEST(Run, ScaleContent) {
  const Image u0 = random_image(24, 24, 1, 12);
  const Image zero(24, 24, 1);
  DemonsConfig elastic = plain(1.0, 1), fluid = plain(1.0, 12);
  elastic.elastic_kernel = sobolev_kernel(7, 1.0);
  fluid.fluid_kernel = sobolev_kernel(7, 1.0);
  Image u = u0;
  double prev = dirichlet(u).value;
  for (int k = 0; k < 12; ++k) {
    u = run(make_vggish(0), frozen(zero), elastic, {}, u).final;
    const double e = dirichlet(u).value;
    EXPECT_LE(e, prev);
    prev = e;
  }
  EXPECT_LT(prev, 0.5 * dirichlet(u0).value);
  EXPECT_EQ(run(make_vggish(0), frozen(zero), fluid, {}, u0).final, u0);
}

TEST(Run, DeterministicWithJitterAndOctaves) {
  const Network net = make_densish(3);
  DemonsConfig c = plain(1.0, 1);
  c.fluid_kernel = sobolev_kernel(7, 0.5);
  c.regularizer = {RegularizerKind::tv, 1e-3, 1e-2};
  c.seed = 42;
  c.clamp = true;
  const OctaveSchedule sched{{{1.0, 6, 1.0}, {1.1, 6, 0.8}, {1.2, 6, 0.6}}, 0.3};
  const RunResult a = run(net, actmax(1), c, sched), b = run(net, actmax(1), c, sched);
  EXPECT_EQ(a.final, b.final);
  ASSERT_EQ(a.metrics.size(), 18u);
  for (std::size_t k = 0; k < 18; ++k) {
    EXPECT_EQ(a.metrics[k].total, b.metrics[k].total);
    EXPECT_EQ(a.metrics[k].step, k);
    EXPECT_EQ(a.metrics[k].octave, k / 6);
  }
  EXPECT_EQ(a.final.height(), 38u);
  EXPECT_EQ(a.final.width(), 38u);
  for (double v : a.final.data()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  c.seed = 43;
  EXPECT_NE(run(net, actmax(1), c, sched).final, a.final);
}

TEST(Run, ClampHoldsAtEveryIterate) {
  const Network net = make_vggish(2);
  DemonsConfig c = plain(50.0, 1);
  c.clamp = true;
  c.seed = 1;
  Image u = initial_noise(net.input_shape(), 1);
  for (int k = 0; k < 15; ++k) {
    u = run(net, actmax(0), c, {}, u).final;
    for (double v : u.data()) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
  }
}

TEST(Run, NonFiniteIterateNamesTheStep) {
  const Image g = Image::constant(8, 8, 1, 1e300);
  DemonsConfig c = plain(1.0, 5);
  try {
    run(make_vggish(0), frozen(g), c, {}, Image(8, 8, 1));
    FAIL() << "expected a numerical error";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
  }
  c.step_size = 1e10;
  EXPECT_THROW(run(make_vggish(0), frozen(g), c, {}, Image(8, 8, 1)), NumericalError);
}

TEST(Run, ScheduleValidation) {
  const Network net = make_vggish(0);
  EXPECT_THROW(run(net, actmax(0), plain(1, 1), {{}, 0.5}), ParameterError);
  EXPECT_THROW(run(net, actmax(0), plain(1, 1), {{{1.2, 1, 1}, {1.0, 1, 1}}, 0}), ParameterError);
  EXPECT_THROW(run(net, frozen(Image(4, 4, 1)), plain(1, 1), {}), ParameterError);
  EXPECT_THROW(run(net, actmax(0), plain(1, 1), {}, Image(16, 16, 1)), DimensionError);
}

TEST(Metrics, CsvFormat) {
  std::ostringstream out;
  write_metrics_csv({{0, 0, 0.1, 0.0, 0.1, 2.0}, {1, 1, -1.0 / 3.0, 0.5, 1.0 / 6.0, 1e-300}}, out);
  EXPECT_EQ(out.str(),
            "step,octave,data_term,reg_term,total,grad_maxnorm\n"
            "0,0,0.10000000000000001,0,0.10000000000000001,2\n"
            "1,1,-0.33333333333333331,0.5,0.16666666666666666,1e-300\n");
}

}  // namespace
}  // namespace preimage
