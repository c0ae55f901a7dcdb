#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "preimage/errors.hpp"
#include "preimage/regularizers.hpp"

namespace preimage {
namespace {

using testing::random_image;

double cosine(const Image& a, const Image& b) { return dot(a, b) / std::sqrt(dot(a, a) * dot(b, b)); }

TEST(Tv, ConstantImage) {
  const Image u = Image::constant(5, 6, 2, 0.3);
  const RegularizerValue r = tv(u, 1e-3);
  EXPECT_NEAR(r.value, 60 * 1e-3, 1e-15);
  for (double g : r.gradient.data()) EXPECT_EQ(g, 0.0);
}

TEST(Tv, TwoPixelStep) {
  const double eps = 0.01;
  const RegularizerValue r = tv(Image(1, 2, 1, std::vector<double>{0.0, 1.0}), eps);
  EXPECT_NEAR(r.value, std::sqrt(1 + eps * eps) + eps, 1e-15);
}

TEST(Tv, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Image u = random_image(8, 8, seed == 3 ? 2 : 1, seed);
    const double eps = 0.05;
    const Image g = tv(u, eps).gradient;
    const auto f = [&](const Image& x) { return tv(x, eps).value; };
    for (std::size_t i = 0; i < u.size(); ++i)
      EXPECT_LE(testing::rel_error(g[i], testing::central_difference(f, u, i)), 1e-6);
  }
}

TEST(Dirichlet, ConstantImage) {
  const RegularizerValue r = dirichlet(Image::constant(4, 4, 1, 2.0));
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.gradient.max_abs(), 0.0);
}

TEST(Dirichlet, TwoPixelStep) {
  // value = (u1 - u0)^2, so d/du0 = -2 and d/du1 = +2.
  const RegularizerValue r = dirichlet(Image(1, 2, 1, std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(r.value, 1.0);
  EXPECT_EQ(r.gradient.values(), (std::vector<double>{-2.0, 2.0}));
}

TEST(Dirichlet, GradientMatchesFiniteDifferences) {
  const Image u = random_image(7, 9, 2, 4);
  const Image g = dirichlet(u).gradient;
  const auto f = [](const Image& x) { return dirichlet(x).value; };
  // The energy is quadratic, so a central difference is exact for any step; a
  // wide step keeps cancellation error out of the comparison.
  for (std::size_t i = 0; i < u.size(); ++i)
    EXPECT_LE(testing::rel_error(g[i], testing::central_difference(f, u, i, 1e-3)), 1e-8);
}

TEST(Dirichlet, GradientIsMinusTwiceNeumannLaplacian) {
  const Image u = random_image(6, 5, 1, 5);
  const Image g = dirichlet(u).gradient;
  for (std::size_t y = 0; y < 6; ++y)
    for (std::size_t x = 0; x < 5; ++x) {
      double lap = 0.0;
      if (y > 0) lap += u.at(y - 1, x) - u.at(y, x);
      if (y + 1 < 6) lap += u.at(y + 1, x) - u.at(y, x);
      if (x > 0) lap += u.at(y, x - 1) - u.at(y, x);
      if (x + 1 < 5) lap += u.at(y, x + 1) - u.at(y, x);
      EXPECT_NEAR(g.at(y, x), -2.0 * lap, 1e-13);
    }
}

TEST(Regularizers, AdjointConsistency) {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    const Image u = random_image(9, 7, 2, seed);
    const Image vy = random_image(9, 7, 2, seed + 10, -1, 1), vx = random_image(9, 7, 2, seed + 20, -1, 1);
    const ImageGradient gu = forward_gradient(u);
    const double lhs = dot(gu.dy, vy) + dot(gu.dx, vx);
    const double rhs = -dot(u, divergence(vy, vx));
    EXPECT_NEAR(lhs, rhs, 1e-12);
  }
}

TEST(Regularizers, TvApproachesDirichletDirectionForLargeEpsilon) {
  const Image u = random_image(10, 10, 1, 6);
  const double eps = 1e3;
  const Image scaled = eps * tv(u, eps).gradient;
  const Image half = 0.5 * dirichlet(u).gradient;
  EXPECT_NEAR(cosine(scaled, half), 1.0, 1e-6);
  EXPECT_LE(max_abs_diff(scaled, half), 1e-4 * half.max_abs());
}

TEST(Regularizers, ScaleBehaviour) {
  const Image u = random_image(8, 8, 1, 7);
  const double c = 3.5;
  EXPECT_NEAR(dirichlet(c * u).value, c * c * dirichlet(u).value, 1e-11);
  EXPECT_NEAR(tv(c * u, c * 0.01).value, c * tv(u, 0.01).value, 1e-11);
}

TEST(Regularizers, EvaluateAppliesLambda) {
  const Image u = random_image(6, 6, 1, 8);
  EXPECT_EQ(evaluate({RegularizerKind::none, 5.0, 1e-3}, u).gradient.max_abs(), 0.0);
  EXPECT_EQ(evaluate({RegularizerKind::tv, 0.0, 1e-3}, u).gradient.max_abs(), 0.0);
  EXPECT_EQ(evaluate({RegularizerKind::tv, 0.0, 1e-3}, u).value, 0.0);
  const RegularizerValue d = evaluate({RegularizerKind::dirichlet, 0.5, 1e-3}, u);
  EXPECT_EQ(d.value, 0.5 * dirichlet(u).value);
  EXPECT_EQ(d.gradient, 0.5 * dirichlet(u).gradient);
  EXPECT_THROW(evaluate({RegularizerKind::tv, -1.0, 1e-3}, u), ParameterError);
  EXPECT_THROW(tv(u, 0.0), ParameterError);
  EXPECT_EQ(regularizer_kind_from_string("dirichlet"), RegularizerKind::dirichlet);
  EXPECT_THROW(regularizer_kind_from_string("l1"), ParameterError);
}

}  // namespace
}  // namespace preimage
