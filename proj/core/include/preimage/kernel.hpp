#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace preimage {

enum class KernelKind { gaussian, sobolev, dirac, custom };

std::string_view to_string(KernelKind kind);
/// Throws ParameterError for unknown names.
KernelKind kernel_kind_from_string(std::string_view name);

/// Odd-sized square filter. `parameter` is sigma for gaussian, gamma for
/// sobolev and 0 otherwise.
class Kernel {
 public:
  Kernel(std::size_t side, std::vector<double> weights, KernelKind kind = KernelKind::custom,
         double parameter = 0.0);

  std::size_t side() const { return side_; }
  std::size_t radius() const { return side_ / 2; }
  KernelKind kind() const { return kind_; }
  double parameter() const { return parameter_; }
  const std::vector<double>& weights() const { return weights_; }

  double at(std::size_t row, std::size_t col) const { return weights_[row * side_ + col]; }
  double center() const { return at(radius(), radius()); }
  double sum() const;

  /// Largest weight on the outermost ring (row/column 0 or side-1).
  double outer_ring_max() const;

  /// max |w(i,j) - w(side-1-i, side-1-j)|.
  double central_asymmetry() const;

  friend bool operator==(const Kernel&, const Kernel&) = default;

 private:
  std::size_t side_;
  std::vector<double> weights_;
  KernelKind kind_;
  double parameter_;
};

/// Discrete Dirac impulse: 1 at the center, 0 elsewhere.
Kernel dirac(std::size_t side);

/// Sampled isotropic Gaussian, truncated to the window and normalized to sum 1.
Kernel gaussian_kernel(std::size_t side, double sigma);

/// 1D analog of gaussian_kernel (length `side`, sums to 1).
std::vector<double> gaussian_kernel_1d(std::size_t side, double sigma);

/// Solves (Id - gamma * Lap) S = delta_0 on the side x side grid.
///
/// Lap is the 5-point Laplacian with unit spacing and zero-flux boundaries
/// (ghost samples mirror their neighbor across the edge), so the operator is
/// symmetric positive definite and its columns sum to 1; the solution is
/// therefore nonnegative with unit mass. Conjugate gradients, followed by a
/// renormalization to remove round-off in the mass. Throws NumericalError if
/// the final residual exceeds 1e-10 in the max norm.
Kernel sobolev_kernel(std::size_t side, double gamma);

/// max |(Id - gamma * Lap) S - delta_0| for an arbitrary side x side kernel.
double screened_poisson_residual(const Kernel& kernel, double gamma);

/// Parameter (sigma or gamma) for which the largest outer-ring weight equals
/// `threshold`, found by bisection over [1e-6, side^2].
double fit_kernel_parameter(KernelKind kind, std::size_t side, double threshold);

/// Convenience: build a gaussian or sobolev kernel of the given kind.
Kernel make_kernel(KernelKind kind, std::size_t side, double parameter);

}  // namespace preimage
