#pragma once

#include "swarmflow/domain.hpp"
#include "swarmflow/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <variant>

namespace swarmflow {

/// Green's function of -(1/2k)(d^2/dx^2 - lambda^2) on [-L/2, L/2], homogeneous Dirichlet.
struct ScreenedPoisson1D {
  double k = 4.0;
  double lambda = 1.0;
  double L = 2.0 * std::numbers::pi;

  bool operator==(const ScreenedPoisson1D&) const = default;
};

/// Free-space counterpart (k/lambda) exp(-lambda |x - s|).
struct FreeSpaceExp {
  double k = 4.0;
  double lambda = 1.0;

  bool operator==(const FreeSpaceExp&) const = default;
};

/// Original Cucker-Smale rate K / (1 + r^2)^gamma.
struct CuckerSmale {
  double K = 5.0;
  double gamma = 2.0;

  bool operator==(const CuckerSmale&) const = default;
};

/// Dirichlet Green's function of -(1/2k)(Laplacian - lambda^2) on the square [-L/2, L/2]^2,
/// evaluated by a truncated double sine series.
struct ScreenedPoisson2DSeries {
  double k = 4.0;
  double lambda = 1.0;
  double L = 2.0 * std::numbers::pi;
  int truncation = 256;

  bool operator==(const ScreenedPoisson2DSeries&) const = default;
};

/// Free-space Bessel kernel of -k^{-d/2}(Laplacian - lambda^2) plus the ball image term.
struct RadialBessel {
  double k = 4.0;
  double lambda = 1.0;
  int d = 3;
  double L = 2.0 * std::numbers::pi;

  bool operator==(const RadialBessel&) const = default;
};

using KernelSpec = std::variant<ScreenedPoisson1D, FreeSpaceExp, CuckerSmale, ScreenedPoisson2DSeries, RadialBessel>;

/// Throws ConfigError if any scale parameter is non-positive.
void validate(const KernelSpec& spec);

std::string kernel_tag(const KernelSpec& spec);

/// True for kernels that depend only on x - s.
bool is_translation_invariant(const KernelSpec& spec);

/// Distance from (x, s) to the singular set below which evaluation is rejected.
inline constexpr double kSingularityTolerance = 1e-12;

// ---------------------------------------------------------------------------
// Pointwise evaluation. Templated on the scalar so the same formulas serve
// double and long double oracles.
// ---------------------------------------------------------------------------

/// Closed form K sigma_p(min) sigma_m(max), rewritten with decaying exponentials so that
/// large lambda*L does not overflow. Value is identical to the sinh product.
template <typename Scalar>
Scalar greens_1d_eval(const ScreenedPoisson1D& spec, Scalar x, Scalar s) {
  using std::exp;
  using std::expm1;
  const Scalar half = Scalar(spec.L) / 2;
  const Scalar slack = Scalar(1e-12) * Scalar(spec.L);
  if (x < -half - slack || x > half + slack)
    throw DomainError("greens_1d_eval: x = " + std::to_string(double(x)) + " outside [-L/2, L/2]");
  if (s < -half - slack || s > half + slack)
    throw DomainError("greens_1d_eval: s = " + std::to_string(double(s)) + " outside [-L/2, L/2]");
  const Scalar lo = std::min(x, s);
  const Scalar hi = std::max(x, s);
  const Scalar lam = Scalar(spec.lambda);
  // 2 sinh(l(lo+L/2)) * 2 sinh(l(L/2-hi)) / (2 sinh(lL)) * (k/l)
  const Scalar a = std::max(Scalar(0), lam * (lo + half));
  const Scalar b = std::max(Scalar(0), lam * (half - hi));
  const Scalar num = -expm1(-2 * a) * -expm1(-2 * b);
  const Scalar den = -expm1(-2 * lam * Scalar(spec.L));
  return Scalar(spec.k) / lam * exp(-lam * (hi - lo)) * num / den;
}

template <typename Scalar>
Scalar free_space_eval(const FreeSpaceExp& spec, Scalar x, Scalar s) {
  using std::abs;
  using std::exp;
  return Scalar(spec.k) / Scalar(spec.lambda) * exp(-Scalar(spec.lambda) * abs(x - s));
}

template <typename Scalar>
Scalar cs_kernel_eval(const CuckerSmale& spec, Scalar r) {
  using std::pow;
  if (r < Scalar(0)) throw ConfigError("cs_kernel_eval: negative distance");
  return Scalar(spec.K) / pow(Scalar(1) + r * r, Scalar(spec.gamma));
}

/// Truncated sine series; throws SingularityError when |x - s| < kSingularityTolerance.
double greens_2d_series_eval(const ScreenedPoisson2DSeries& spec, const Point2& x, const Point2& s);

/// psi~(r) = (k/2pi)^{d/2} (lambda/r)^{d/2-1} K_{d/2-1}(lambda r).
double radial_bessel_profile(const RadialBessel& spec, double r);

/// psi~(|x - s|) + image term. x, s have spec.d components.
double radial_bessel_eval(const RadialBessel& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& s,
                          bool with_image = true);

/// K_0(z) for z > 0.
double bessel_k0(double z);

/// Dispatch for kernels usable on the line. Throws ConfigError for 2D-only kernels.
double kernel_value(const KernelSpec& spec, double x, double s);

/// Dispatch for kernels usable in the plane. Throws ConfigError for 1D-only kernels.
double kernel_value(const KernelSpec& spec, const Point2& x, const Point2& s);

}  // namespace swarmflow
