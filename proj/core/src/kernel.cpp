#include "preimage/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "preimage/errors.hpp"

namespace preimage {

namespace {

void require_odd(std::size_t side, const char* who) {
  if (side == 0 || side % 2 == 0) {
    throw DimensionError(std::string(who) + ": side must be odd and positive, got " + std::to_string(side));
  }
}

// y = (Id - gamma * Lap) x on a side x side grid with zero-flux boundaries.
void apply_screened_laplacian(const std::vector<double>& x, std::vector<double>& y, std::size_t n,
                              double gamma) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double c = x[i * n + j];
      double lap = 0.0;
      if (i > 0) lap += x[(i - 1) * n + j] - c;
      if (i + 1 < n) lap += x[(i + 1) * n + j] - c;
      if (j > 0) lap += x[i * n + j - 1] - c;
      if (j + 1 < n) lap += x[i * n + j + 1] - c;
      y[i * n + j] = c - gamma * lap;
    }
  }
}

double residual_inf(const std::vector<double>& s, std::size_t n, double gamma) {
  std::vector<double> as(s.size());
  apply_screened_laplacian(s, as, n, gamma);
  as[(n / 2) * n + n / 2] -= 1.0;
  double m = 0.0;
  for (double v : as) m = std::max(m, std::abs(v));
  return m;
}

constexpr double kSobolevResidualBound = 1e-10;

}  // namespace

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::gaussian:
      return "gaussian";
    case KernelKind::sobolev:
      return "sobolev";
    case KernelKind::dirac:
      return "dirac";
    case KernelKind::custom:
      return "custom";
  }
  return "?";
}

KernelKind kernel_kind_from_string(std::string_view name) {
  if (name == "gaussian") return KernelKind::gaussian;
  if (name == "sobolev") return KernelKind::sobolev;
  if (name == "dirac") return KernelKind::dirac;
  if (name == "custom") return KernelKind::custom;
  throw ParameterError("unknown kernel kind '" + std::string(name) + "'");
}

Kernel::Kernel(std::size_t side, std::vector<double> weights, KernelKind kind, double parameter)
    : side_(side), weights_(std::move(weights)), kind_(kind), parameter_(parameter) {
  require_odd(side, "Kernel");
  if (weights_.size() != side * side) throw DimensionError("Kernel: weight count != side^2");
  for (double w : weights_) {
    if (!std::isfinite(w)) throw DataError("Kernel: non-finite weight");
  }
}

double Kernel::sum() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

double Kernel::outer_ring_max() const {
  if (side_ == 1) return weights_[0];
  double m = -std::numeric_limits<double>::infinity();
  const std::size_t last = side_ - 1;
  for (std::size_t k = 0; k < side_; ++k) {
    m = std::max({m, at(0, k), at(last, k), at(k, 0), at(k, last)});
  }
  return m;
}

double Kernel::central_asymmetry() const {
  double m = 0.0;
  for (std::size_t i = 0; i < side_; ++i)
    for (std::size_t j = 0; j < side_; ++j)
      m = std::max(m, std::abs(at(i, j) - at(side_ - 1 - i, side_ - 1 - j)));
  return m;
}

Kernel dirac(std::size_t side) {
  require_odd(side, "dirac");
  std::vector<double> w(side * side, 0.0);
  w[(side / 2) * side + side / 2] = 1.0;
  return Kernel(side, std::move(w), KernelKind::dirac, 0.0);
}

std::vector<double> gaussian_kernel_1d(std::size_t side, double sigma) {
  require_odd(side, "gaussian_kernel_1d");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("gaussian: sigma must be positive");
  const long r = static_cast<long>(side / 2);
  std::vector<double> g(side);
  double total = 0.0;
  for (long k = -r; k <= r; ++k) {
    const double x = static_cast<double>(k);
    g[static_cast<std::size_t>(k + r)] = std::exp(-(x * x) / (2.0 * sigma * sigma));
    total += g[static_cast<std::size_t>(k + r)];
  }
  for (double& v : g) v /= total;
  return g;
}

Kernel gaussian_kernel(std::size_t side, double sigma) {
  require_odd(side, "gaussian_kernel");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("gaussian: sigma must be positive");
  // The 2D weights are formed from the 1D profile so the kernel is exactly
  // separable and exactly symmetric under transpose and 180-degree rotation.
  const std::vector<double> g = gaussian_kernel_1d(side, sigma);
  std::vector<double> w(side * side);
  for (std::size_t i = 0; i < side; ++i)
    for (std::size_t j = 0; j < side; ++j) w[i * side + j] = g[i] * g[j];
  return Kernel(side, std::move(w), KernelKind::gaussian, sigma);
}

Kernel sobolev_kernel(std::size_t side, double gamma) {
  require_odd(side, "sobolev_kernel");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ParameterError("sobolev: gamma must be positive");

  const std::size_t n = side;
  const std::size_t m = n * n;
  std::vector<double> x(m, 0.0);
  std::vector<double> r(m, 0.0);
  r[(n / 2) * n + n / 2] = 1.0;
  std::vector<double> p = r;
  std::vector<double> ap(m);
  double rr = 1.0;

  // Conjugate gradients; the operator is SPD with spectrum in [1, 1 + 8 gamma].
  const std::size_t max_iter = 20 * m + 100;
  for (std::size_t it = 0; it < max_iter && rr > 1e-28; ++it) {
    apply_screened_laplacian(p, ap, n, gamma);
    double pap = 0.0;
    for (std::size_t k = 0; k < m; ++k) pap += p[k] * ap[k];
    const double alpha = rr / pap;
    double rr_next = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * ap[k];
      rr_next += r[k] * r[k];
    }
    const double beta = rr_next / rr;
    rr = rr_next;
    for (std::size_t k = 0; k < m; ++k) p[k] = r[k] + beta * p[k];
  }

  double total = 0.0;
  for (double v : x) total += v;
  for (double& v : x) v /= total;

  // CG leaves asymmetry at round-off level; average over the symmetry group
  // of the square so the kernel is exactly invariant under rotation and transpose.
  std::vector<double> sym(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t a = i, b = j, ra = n - 1 - i, rb = n - 1 - j;
      const double s1 = x[a * n + b] + x[ra * n + rb] + x[a * n + rb] + x[ra * n + b];
      const double s2 = x[b * n + a] + x[rb * n + ra] + x[rb * n + a] + x[b * n + ra];
      sym[i * n + j] = (s1 + s2) / 8.0;
    }
  }

  const double res = residual_inf(sym, n, gamma);
  if (!(res <= kSobolevResidualBound)) {
    std::ostringstream msg;
    msg << "sobolev_kernel: residual " << res << " exceeds " << kSobolevResidualBound << " (side " << side
        << ", gamma " << gamma << ")";
    throw NumericalError(msg.str());
  }
  return Kernel(side, std::move(sym), KernelKind::sobolev, gamma);
}

double screened_poisson_residual(const Kernel& kernel, double gamma) {
  return residual_inf(kernel.weights(), kernel.side(), gamma);
}

Kernel make_kernel(KernelKind kind, std::size_t side, double parameter) {
  switch (kind) {
    case KernelKind::gaussian:
      return gaussian_kernel(side, parameter);
    case KernelKind::sobolev:
      return sobolev_kernel(side, parameter);
    case KernelKind::dirac:
      return dirac(side);
    case KernelKind::custom:
      break;
  }
  throw ParameterError("make_kernel: custom kernels have no parameterization");
}

double fit_kernel_parameter(KernelKind kind, std::size_t side, double threshold) {
  if (kind != KernelKind::gaussian && kind != KernelKind::sobolev) {
    throw ParameterError("fit_kernel_parameter: only gaussian and sobolev kernels are fitted");
  }
  require_odd(side, "fit_kernel_parameter");
  if (side < 3) throw DimensionError("fit_kernel_parameter: side must be >= 3");
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ParameterError("fit_kernel_parameter: threshold must lie in (0, 1)");
  }

  const auto ring = [&](double p) { return make_kernel(kind, side, p).outer_ring_max(); };
  double lo = 1e-6;
  double hi = static_cast<double>(side * side);
  double f_lo = ring(lo);
  double f_hi = ring(hi);
  // The ring maximum need not be monotone over the whole range (on a 3x3
  // window it peaks and then sinks toward 1/9), so bracket the first crossing
  // on a log grid before bisecting.
  if (f_lo <= threshold) {
    const int n = 240;
    const double ratio = std::pow(hi / lo, 1.0 / n);
    double p = lo;
    double fp = f_lo;
    for (int k = 1; k <= n; ++k) {
      const double q = (k == n) ? hi : p * ratio;
      const double fq = ring(q);
      if (fq >= threshold) {
        lo = p;
        f_lo = fp;
        hi = q;
        f_hi = fq;
        break;
      }
      p = q;
      fp = fq;
    }
  }
  if (!(f_lo <= threshold && threshold <= f_hi)) {
    std::ostringstream msg;
    msg << "fit_kernel_parameter: threshold " << threshold << " not bracketed for " << to_string(kind)
        << " side " << side << "; outer-ring max is " << f_lo << " at p=" << lo << " and " << f_hi
        << " at p=" << hi;
    throw FitError(msg.str());
  }

  const double tol = 1e-6 * threshold;
  double best = lo;
  double best_err = std::abs(f_lo - threshold);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = ring(mid);
    if (f_mid < f_lo || f_mid > f_hi) {
      std::ostringstream msg;
      msg << "fit_kernel_parameter: outer-ring weight not monotone in the parameter near p=" << mid;
      throw FitError(msg.str());
    }
    const double err = std::abs(f_mid - threshold);
    if (err < best_err) {
      best = mid;
      best_err = err;
    }
    if (err <= 1e-3 * tol) break;
    if (f_mid < threshold) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }
  if (std::abs(f_hi - threshold) < best_err) {
    best = hi;
    best_err = std::abs(f_hi - threshold);
  }
  if (best_err > tol) {
    std::ostringstream msg;
    msg << "fit_kernel_parameter: bisection stalled at error " << best_err << " (tolerance " << tol << ")";
    throw FitError(msg.str());
  }
  return best;
}

}  // namespace preimage
