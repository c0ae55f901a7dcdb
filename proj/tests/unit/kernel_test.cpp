#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "preimage/errors.hpp"
#include "preimage/grid.hpp"
#include "preimage/kernel.hpp"

namespace preimage {
namespace {

void expect_central_symmetry(const Kernel& k, double tol) {
  const std::size_t n = k.side();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(k.at(i, j), k.at(n - 1 - i, n - 1 - j), tol);
}

TEST(Dirac, Shape) {
  EXPECT_EQ(dirac(1).weights(), std::vector<double>{1.0});
  const Kernel d = dirac(3);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(d.weights()[i], i == 4 ? 1.0 : 0.0);
  EXPECT_THROW(dirac(4), DimensionError);
  EXPECT_THROW(dirac(0), DimensionError);
}

TEST(Gaussian, TinySigmaIsDirac) {
  const Kernel g = gaussian_kernel(3, 1e-3);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(g.weights()[i], dirac(3).weights()[i], 1e-12);
}

TEST(Gaussian, ClosedFormSide3) {
  const Kernel g = gaussian_kernel(3, 1.0);
  const double z = 1.0 + 4.0 * std::exp(-0.5) + 4.0 * std::exp(-1.0);
  EXPECT_NEAR(g.center(), 1.0 / z, 1e-15);
  EXPECT_NEAR(g.at(0, 1), std::exp(-0.5) / z, 1e-15);
  EXPECT_NEAR(g.at(0, 0), std::exp(-1.0) / z, 1e-15);
}

TEST(Gaussian, SymmetryAndSeparability) {
  for (std::size_t side : {3u, 7u, 11u})
    for (double sigma : {0.4, 1.0, 2.5}) {
      const Kernel g = gaussian_kernel(side, sigma);
      const auto g1 = gaussian_kernel_1d(side, sigma);
      for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; j < side; ++j) {
          EXPECT_EQ(g.at(i, j), g.at(j, i));
          EXPECT_EQ(g.at(i, j), g.at(side - 1 - i, side - 1 - j));
          EXPECT_NEAR(g.at(i, j), g1[i] * g1[j], 1e-12);
        }
      EXPECT_NEAR(g.sum(), 1.0, 1e-12);
    }
  EXPECT_THROW(gaussian_kernel(3, 0.0), ParameterError);
  EXPECT_THROW(gaussian_kernel(3, -1.0), ParameterError);
}

TEST(Sobolev, ResidualAndMassOverGrid) {
  for (std::size_t side : {3u, 5u, 7u, 9u, 11u, 15u})
    for (double gamma : {0.1, 1.0, 10.0}) {
      const Kernel s = sobolev_kernel(side, gamma);
      EXPECT_LE(screened_poisson_residual(s, gamma), 1e-10) << side << " " << gamma;
      EXPECT_NEAR(s.sum(), 1.0, 1e-9);
      expect_central_symmetry(s, 1e-12);
      for (double w : s.weights()) EXPECT_GE(w, -1e-12);
    }
}

TEST(Sobolev, ResidualOracleIsIndependent) {
  // Recompute the residual with the dense operator rather than trusting the library helper.
  const double gamma = 2.0;
  const Kernel s = sobolev_kernel(7, gamma);
  const auto a = testing::screened_laplacian_matrix(7, gamma);
  double worst = 0.0;
  for (std::size_t p = 0; p < 49; ++p) {
    double r = (p == 24) ? -1.0 : 0.0;
    for (std::size_t q = 0; q < 49; ++q) r += a[p][q] * s.weights()[q];
    worst = std::max(worst, std::abs(r));
  }
  EXPECT_LE(worst, 1e-10);
  EXPECT_NEAR(screened_poisson_residual(s, gamma), worst, 1e-12);
}

TEST(Sobolev, MatchesDenseEliminationSide3) {
  const auto a = testing::screened_laplacian_matrix(3, 1.0);
  std::vector<double> rhs(9, 0.0);
  rhs[4] = 1.0;
  const auto x = testing::dense_solve(a, rhs);
  const Kernel s = sobolev_kernel(3, 1.0);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(s.weights()[i], x[i], 1e-10);
}

TEST(Sobolev, TinyGammaIsDirac) {
  for (std::size_t side : {3u, 9u}) {
    const Kernel s = sobolev_kernel(side, 1e-12);
    for (std::size_t i = 0; i < side * side; ++i) EXPECT_NEAR(s.weights()[i], dirac(side).weights()[i], 1e-9);
  }
  EXPECT_THROW(sobolev_kernel(5, 0.0), ParameterError);
}

TEST(Fit, Side11BothKinds) {
  for (KernelKind kind : {KernelKind::gaussian, KernelKind::sobolev}) {
    const double p = fit_kernel_parameter(kind, 11, 1e-4);
    EXPECT_NEAR(make_kernel(kind, 11, p).outer_ring_max(), 1e-4, 1e-10) << to_string(kind);
  }
}

TEST(Fit, RoundTripWhereRingIsInjective) {
  for (auto [side, sigma] : {std::pair<std::size_t, double>{3, 0.5}, {5, 1.0}, {11, 2.0}}) {
    const double threshold = gaussian_kernel(side, sigma).outer_ring_max();
    const double fitted = fit_kernel_parameter(KernelKind::gaussian, side, threshold);
    EXPECT_NEAR(fitted, sigma, 1e-5) << side;
  }
  const double gamma = 0.8;
  const double threshold = sobolev_kernel(7, gamma).outer_ring_max();
  EXPECT_NEAR(fit_kernel_parameter(KernelKind::sobolev, 7, threshold), gamma, 1e-5);
}

TEST(Fit, SideThreeSigmaOneResolvesToFirstCrossing) {
  // On a 3x3 window the ring maximum rises, peaks, then sinks toward 1/9, so
  // the sigma = 1 ring weight is also reached by a smaller sigma.
  const double threshold = gaussian_kernel(3, 1.0).outer_ring_max();
  const double sigma = fit_kernel_parameter(KernelKind::gaussian, 3, threshold);
  EXPECT_NEAR(gaussian_kernel(3, sigma).outer_ring_max(), threshold, 1e-6 * threshold);
  EXPECT_LT(sigma, 1.0);
  for (double s = 1e-3; s < sigma * (1.0 - 1e-4); s *= 1.01)
    EXPECT_LT(gaussian_kernel(3, s).outer_ring_max(), threshold);
}

TEST(Fit, SobolevIsSharperAtMatchedSupport) {
  for (std::size_t side : {5u, 9u, 11u, 15u}) {
    const Kernel g = make_kernel(KernelKind::gaussian, side, fit_kernel_parameter(KernelKind::gaussian, side, 1e-4));
    const Kernel s = make_kernel(KernelKind::sobolev, side, fit_kernel_parameter(KernelKind::sobolev, side, 1e-4));
    EXPECT_GT(s.center(), g.center()) << side;
  }
}

TEST(Fit, Errors) {
  EXPECT_THROW(fit_kernel_parameter(KernelKind::dirac, 5, 1e-4), ParameterError);
  EXPECT_THROW(fit_kernel_parameter(KernelKind::gaussian, 1, 1e-4), DimensionError);
  EXPECT_THROW(fit_kernel_parameter(KernelKind::gaussian, 5, 0.0), ParameterError);
  // Threshold above anything reachable on a 3x3 ring.
  EXPECT_THROW(fit_kernel_parameter(KernelKind::gaussian, 3, 0.5), FitError);
}

TEST(Gaussian, SelfConvolutionVarianceLaw) {
  for (double sigma : {1.0, 2.0, 3.0}) {
    const std::size_t side = 31;
    const Kernel g = gaussian_kernel(side, sigma);
    const auto gg = testing::full_convolve(g.weights(), side, g.weights(), side);
    const double m1 = testing::second_moment(g.weights(), side);
    const double m2 = testing::second_moment(gg, 2 * side - 1);
    EXPECT_NEAR(m2 / (2.0 * m1), 1.0, 0.01) << sigma;
  }
}

TEST(Kernels, Deterministic) {
  EXPECT_EQ(sobolev_kernel(11, 0.7), sobolev_kernel(11, 0.7));
  EXPECT_EQ(gaussian_kernel(9, 1.7), gaussian_kernel(9, 1.7));
  EXPECT_EQ(fit_kernel_parameter(KernelKind::sobolev, 9, 1e-4), fit_kernel_parameter(KernelKind::sobolev, 9, 1e-4));
  EXPECT_EQ(dirac(5), dirac(5));
}

TEST(Kernels, KindNames) {
  for (KernelKind k : {KernelKind::gaussian, KernelKind::sobolev, KernelKind::dirac})
    EXPECT_EQ(kernel_kind_from_string(to_string(k)), k);
  EXPECT_THROW(kernel_kind_from_string("box"), ParameterError);
}

}  // namespace
}  // namespace preimage
