#include "swarmflow/kernels.hpp"

#include <cmath>
#include <numbers>

namespace swarmflow {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("kernel parameter ") + name + " must be positive");
}

}  // namespace

void validate(const KernelSpec& spec) {
  std::visit(overloaded{
                 [](const ScreenedPoisson1D& s) {
                   require_positive(s.k, "k");
                   require_positive(s.lambda, "lambda");
                   require_positive(s.L, "L");
                 },
                 [](const FreeSpaceExp& s) {
                   require_positive(s.k, "k");
                   require_positive(s.lambda, "lambda");
                 },
                 [](const CuckerSmale& s) {
                   require_positive(s.K, "K");
                   require_positive(s.gamma, "gamma");
                 },
                 [](const ScreenedPoisson2DSeries& s) {
                   require_positive(s.k, "k");
                   require_positive(s.lambda, "lambda");
                   require_positive(s.L, "L");
                   if (s.truncation < 1) throw ConfigError("series truncation must be >= 1");
                 },
                 [](const RadialBessel& s) {
                   require_positive(s.k, "k");
                   require_positive(s.lambda, "lambda");
                   require_positive(s.L, "L");
                   if (s.d != 2 && s.d != 3) throw ConfigError("radial Bessel kernel needs d in {2, 3}");
                 },
             },
             spec);
}

std::string kernel_tag(const KernelSpec& spec) {
  return std::visit(overloaded{
                        [](const ScreenedPoisson1D&) { return std::string("screened_poisson_1d"); },
                        [](const FreeSpaceExp&) { return std::string("free_space_exp"); },
                        [](const CuckerSmale&) { return std::string("cucker_smale"); },
                        [](const ScreenedPoisson2DSeries&) { return std::string("screened_poisson_2d"); },
                        [](const RadialBessel&) { return std::string("radial_bessel"); },
                    },
                    spec);
}

bool is_translation_invariant(const KernelSpec& spec) {
  return std::holds_alternative<FreeSpaceExp>(spec) || std::holds_alternative<CuckerSmale>(spec);
}

double greens_2d_series_eval(const ScreenedPoisson2DSeries& spec, const Point2& x, const Point2& s) {
  if ((x - s).norm() < kSingularityTolerance)
    throw SingularityError("greens_2d_series_eval: kernel is singular along x = s");
  const double half = spec.L / 2.0;
  for (int a = 0; a < 2; ++a) {
    if (std::abs(x[a]) > half * (1 + 1e-12) || std::abs(s[a]) > half * (1 + 1e-12))
      throw DomainError("greens_2d_series_eval: point outside the square domain");
  }
  const int n_max = spec.truncation;
  const double w = std::numbers::pi / spec.L;
  // Separable sine products are tabulated per axis, then contracted against 1/(mu + lambda^2).
  Eigen::ArrayXd sx(n_max), sy(n_max);
  for (int n = 1; n <= n_max; ++n) {
    sx[n - 1] = std::sin(n * w * (x[0] + half)) * std::sin(n * w * (s[0] + half));
    sy[n - 1] = std::sin(n * w * (x[1] + half)) * std::sin(n * w * (s[1] + half));
  }
  const double lam2 = spec.lambda * spec.lambda;
  double sum = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    const double mu_n = (n * w) * (n * w);
    double row = 0.0;
    for (int m = 1; m <= n_max; ++m) row += sy[m - 1] / (mu_n + (m * w) * (m * w) + lam2);
    sum += sx[n - 1] * row;
  }
  // Orthonormal Dirichlet eigenfunctions on a square of side L carry (2/L)^2.
  return 8.0 * spec.k / (spec.L * spec.L) * sum;
}

double bessel_k0(double z) {
  if (!(z > 0.0)) throw SingularityError("bessel_k0: argument must be positive");
  return std::cyl_bessel_k(0.0, z);
}

double radial_bessel_profile(const RadialBessel& spec, double r) {
  if (!(r > 0.0)) throw SingularityError("radial_bessel_profile: kernel is singular at r = 0");
  const double z = spec.lambda * r;
  const double pre = spec.k / (2.0 * std::numbers::pi);
  if (spec.d == 2) return pre * bessel_k0(z);
  // K_{1/2}(z) = sqrt(pi / (2z)) e^{-z}
  const double k_half = std::sqrt(std::numbers::pi / (2.0 * z)) * std::exp(-z);
  return std::pow(pre, 1.5) * std::sqrt(spec.lambda / r) * k_half;
}

double radial_bessel_eval(const RadialBessel& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& s,
                          bool with_image) {
  if (x.size() != spec.d || s.size() != spec.d)
    throw ConfigError("radial_bessel_eval: point dimension does not match kernel d");
  const double r = (x - s).norm();
  if (r < kSingularityTolerance) throw SingularityError("radial_bessel_eval: kernel is singular at x = s");
  double value = radial_bessel_profile(spec, r);
  if (with_image) {
    const double xn = x.norm();
    if (xn < kSingularityTolerance) throw SingularityError("radial_bessel_eval: image point undefined at x = 0");
    const Eigen::VectorXd image = (spec.L * spec.L / 4.0) * x / (xn * xn);
    const double r_image = (2.0 / spec.L) * xn * (s - image).norm();
    value -= radial_bessel_profile(spec, r_image);
  }
  return value;
}

double kernel_value(const KernelSpec& spec, double x, double s) {
  return std::visit(overloaded{
                        [&](const ScreenedPoisson1D& k) { return greens_1d_eval(k, x, s); },
                        [&](const FreeSpaceExp& k) { return free_space_eval(k, x, s); },
                        [&](const CuckerSmale& k) { return cs_kernel_eval(k, std::abs(x - s)); },
                        [](const ScreenedPoisson2DSeries&) -> double {
                          throw ConfigError("screened_poisson_2d kernel cannot be evaluated on a line");
                        },
                        [](const RadialBessel&) -> double {
                          throw ConfigError("radial_bessel kernel cannot be evaluated on a line");
                        },
                    },
                    spec);
}

double kernel_value(const KernelSpec& spec, const Point2& x, const Point2& s) {
  return std::visit(overloaded{
                        [](const ScreenedPoisson1D&) -> double {
                          throw ConfigError("screened_poisson_1d kernel cannot be evaluated in the plane");
                        },
                        [&](const FreeSpaceExp& k) {
                          return k.k / k.lambda * std::exp(-k.lambda * (x - s).norm());
                        },
                        [&](const CuckerSmale& k) { return cs_kernel_eval(k, (x - s).norm()); },
                        [&](const ScreenedPoisson2DSeries& k) { return greens_2d_series_eval(k, x, s); },
                        [&](const RadialBessel& k) {
                          if (k.d != 2) throw ConfigError("radial_bessel kernel with d = 3 needs 3D points");
                          return radial_bessel_eval(k, Eigen::VectorXd(x), Eigen::VectorXd(s));
                        },
                    },
                    spec);
}

}  // namespace swarmflow
