#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "preimage/errors.hpp"
#include "preimage/objectives.hpp"

namespace preimage {
namespace {

ObjectiveSpec inversion_spec(std::vector<double> target, int p, double z) {
  ObjectiveSpec s;
  s.kind = ObjectiveKind::inversion;
  s.target = FeatureCode{std::move(target), 0};
  s.p = p;
  s.normalization = z;
  return s;
}

ObjectiveSpec actmax_spec(std::size_t unit, double z) {
  ObjectiveSpec s;
  s.kind = ObjectiveKind::activation_max;
  s.unit = unit;
  s.normalization = z;
  return s;
}

double cosine(const Image& a, const Image& b) { return dot(a, b) / std::sqrt(dot(a, a) * dot(b, b)); }

TEST(Inversion, PerfectReconstruction) {
  for (int p : {1, 2}) {
    const auto t = inversion_term(FeatureCode{{1.5, -2.0, 0.0}, 0}, inversion_spec({1.5, -2.0, 0.0}, p, 1.0));
    EXPECT_EQ(t.value, 0.0);
    for (double c : t.cotangent.values) EXPECT_EQ(c, 0.0);
  }
}

TEST(Inversion, TwoTermExample) {
  const auto t = inversion_term(FeatureCode{{4.0, 6.0}, 0}, inversion_spec({1.0, 2.0}, 2, 1.0));
  EXPECT_EQ(t.value, 25.0);
  EXPECT_EQ(t.cotangent.values, (std::vector<double>{6.0, 8.0}));
  const auto l1 = inversion_term(FeatureCode{{4.0, -6.0, 2.0}, 0}, inversion_spec({1.0, 2.0, 2.0}, 1, 1.0));
  EXPECT_EQ(l1.value, 11.0);
  EXPECT_EQ(l1.cotangent.values, (std::vector<double>{1.0, -1.0, 0.0}));
}

TEST(Inversion, DoublingZHalvesEverything) {
  const FeatureCode code{testing::random_vector(10, 1), 0};
  for (int p : {1, 2}) {
    const auto target = testing::random_vector(10, 2);
    const auto a = inversion_term(code, inversion_spec(target, p, 0.75));
    const auto b = inversion_term(code, inversion_spec(target, p, 1.5));
    EXPECT_EQ(b.value, a.value / 2.0);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(b.cotangent.values[i], a.cotangent.values[i] / 2.0);
  }
}

TEST(Inversion, Errors) {
  EXPECT_THROW(inversion_term(FeatureCode{{1.0}, 0}, inversion_spec({1.0, 2.0}, 2, 1.0)), DimensionError);
  EXPECT_THROW(inversion_term(FeatureCode{{1.0}, 0}, inversion_spec({1.0}, 3, 1.0)), ParameterError);
  EXPECT_THROW(inversion_term(FeatureCode{{1.0}, 0}, inversion_spec({1.0}, 2, 0.0)), ParameterError);
}

TEST(ActMax, Examples) {
  const auto zero = actmax_term(FeatureCode{{0.0, 0.0, 0.0}, 0}, actmax_spec(1, 4.0));
  EXPECT_EQ(zero.value, 0.0);
  EXPECT_EQ(zero.cotangent.values, (std::vector<double>{0.0, -0.25, 0.0}));
  EXPECT_EQ(actmax_term(FeatureCode{{1.0, 5.0}, 0}, actmax_spec(1, 1.0)).value, -5.0);
  EXPECT_THROW(actmax_term(FeatureCode{{1.0}, 0}, actmax_spec(1, 1.0)), DimensionError);
}

TEST(ActMax, DescentIncreasesTheUnitThroughALinearMap) {
  // code = A u with a fixed random A; one descent step on -code[i]/Z.
  const std::size_t n = 6, m = 4;
  const auto a = testing::random_vector(n * m, 3);
  auto u = testing::random_vector(n, 4);
  const auto apply = [&](const std::vector<double>& x) {
    std::vector<double> y(m, 0.0);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < n; ++c) y[r] += a[r * n + c] * x[c];
    return y;
  };
  const auto spec = actmax_spec(2, 1.0);
  const auto before = apply(u);
  const auto t = actmax_term(FeatureCode{before, 0}, spec);
  for (std::size_t c = 0; c < n; ++c) {
    double g = 0.0;
    for (std::size_t r = 0; r < m; ++r) g += a[r * n + c] * t.cotangent.values[r];
    u[c] -= 1e-3 * g;
  }
  EXPECT_GT(apply(u)[2], before[2]);
}

TEST(Objectives, CotangentsMatchFiniteDifferences) {
  const auto code = testing::random_vector(12, 5);
  const auto target = testing::random_vector(12, 6);
  const std::vector<ObjectiveSpec> specs = {inversion_spec(target, 2, 1.7), inversion_spec(target, 1, 0.3),
                                            actmax_spec(7, 2.5)};
  for (const auto& spec : specs) {
    const auto t = data_term(FeatureCode{code, 0}, spec);
    for (std::size_t i = 0; i < code.size(); ++i) {
      auto p = code, m = code;
      const double h = 1e-6;
      p[i] += h;
      m[i] -= h;
      const double fd =
          (data_term(FeatureCode{p, 0}, spec).value - data_term(FeatureCode{m, 0}, spec).value) / (2.0 * h);
      EXPECT_LE(testing::rel_error(t.cotangent.values[i], fd, 1e-3), 1e-9);
    }
  }
}

TEST(Objectives, DirectionInvariantUnderZ) {
  const Network net = testing::randomized(make_vggish(1), 2);
  const Image u = testing::random_image(32, 32, 1, 3);
  const std::size_t layer = net.deepest_conv_layer();
  auto spec = inversion_spec(forward(net, testing::random_image(32, 32, 1, 4), layer).values, 2, 1.0);
  spec.layer = layer;
  const Image g1 = data_term_gradient(net, u, spec).gradient;
  spec.normalization = 10.0;
  const Image g10 = data_term_gradient(net, u, spec).gradient;
  EXPECT_NEAR(cosine(g1, g10), 1.0, 1e-12);

  auto am = actmax_spec(1, 1.0);
  const Image a1 = data_term_gradient(net, u, am).gradient;
  am.normalization = 10.0;
  EXPECT_NEAR(cosine(a1, data_term_gradient(net, u, am).gradient), 1.0, 1e-12);
}

TEST(Objectives, EndToEndGradientMatchesFiniteDifferences) {
  const Network net = testing::randomized(make_vggish(5), 6);
  const Image u = testing::random_image(32, 32, 1, 7);
  const std::size_t layer = net.deepest_pre_dense_layer();
  const auto target = forward(net, testing::random_image(32, 32, 1, 8), layer).values;
  const auto base = testing::activation_pattern(net, u);
  for (int p : {2, 1}) {
    auto spec = inversion_spec(target, p, 3.0);
    spec.layer = layer;
    const Image g = data_term_gradient(net, u, spec).gradient;
    const auto f = [&](const Image& x) { return data_term_gradient(net, x, spec).value; };
    const double h = 1e-5;
    const auto code = forward(net, u, layer).values;
    Rng rng(9);
    int checked = 0;
    while (checked < 100) {
      const auto i = static_cast<std::size_t>(rng.uniform_int(0, 1023));
      Image up = u, um = u;
      up[i] += h;
      um[i] -= h;
      if (testing::activation_pattern(net, up) != base || testing::activation_pattern(net, um) != base) continue;
      if (p == 1) {
        // Skip coordinates whose perturbation moves any residual across zero.
        const auto cp = forward(net, up, layer).values, cm = forward(net, um, layer).values;
        bool crosses = false;
        for (std::size_t k = 0; k < code.size(); ++k)
          crosses |= ((cp[k] - target[k]) > 0) != ((cm[k] - target[k]) > 0);
        if (crosses) continue;
      }
      EXPECT_LE(testing::rel_error(g[i], testing::central_difference(f, u, i, h)), 1e-6) << "p=" << p;
      ++checked;
    }
  }
}

TEST(Objectives, AutomaticNormalization) {
  auto spec = inversion_spec({3.0, 4.0}, 2, 1.0);
  spec.z_mode = ZMode::automatic;
  EXPECT_EQ(resolve_normalization(spec, FeatureCode{{0.0, 0.0}, 0}).normalization, 25.0);
  auto am = actmax_spec(1, 1.0);
  am.z_mode = ZMode::automatic;
  EXPECT_EQ(resolve_normalization(am, FeatureCode{{9.0, -2.5}, 0}).normalization, 2.5);
  EXPECT_EQ(resolve_normalization(am, FeatureCode{{9.0, 0.0}, 0}).normalization, 1.0);
  am.z_mode = ZMode::unit;
  am.normalization = 7.0;
  EXPECT_EQ(resolve_normalization(am, FeatureCode{{9.0, 3.0}, 0}).normalization, 7.0);
}

TEST(Objectives, ConstantGradientHook) {
  ObjectiveSpec s;
  s.kind = ObjectiveKind::constant_gradient;
  s.frozen_gradient = testing::random_image(4, 4, 1, 1);
  const Image u = testing::random_image(4, 4, 1, 2);
  const DataGradient g = data_term_gradient(make_vggish(0), u, s);
  EXPECT_EQ(g.gradient, s.frozen_gradient);
  EXPECT_EQ(g.value, dot(s.frozen_gradient, u));
  EXPECT_THROW(data_term_gradient(make_vggish(0), Image(3, 3, 1), s), DimensionError);
}

}  // namespace
}  // namespace preimage
