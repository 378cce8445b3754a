#include "swarmflow/errors.hpp"
#include "swarmflow/macro.hpp"
#include "swarmflow/spectral.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace swarmflow;
constexpr double kPi = std::numbers::pi;

namespace {

ScalarField random_field(const Grid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ScalarField f = ScalarField::zeros(g);
  for (auto& v : f.values) v = u(rng);
  return f;
}

double rel_linf(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff(); }

ScalarField harmonic_1d(const Grid& g, int n) {
  ScalarField f = ScalarField::zeros(g);
  for (int i = 0; i < g.cells; ++i) f.values[i] = std::sin(n * kPi * (g.center(i) + g.domain.half_width) / g.domain.width());
  return f;
}

}  // namespace

TEST_CASE("sine transform round trip") {
  for (int dim : {1, 2}) {
    const Grid g = make_grid(make_domain(dim, kPi), 37);
    const ScalarField f = random_field(g, 7 + dim);
    CHECK(rel_linf(dst_backward(dst_forward(f)).values, f.values) < 1e-13);
    CHECK(dst_forward(ScalarField::zeros(g)).coefficients.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("single harmonic concentrates on its index") {
  const Grid g = make_grid(make_domain(1, kPi), 64);
  const SineSpectrum c = dst_forward(harmonic_1d(g, 5));
  const double peak = std::abs(c.coefficients[4]);
  CHECK(peak > 1.0);
  for (int n = 0; n < g.cells; ++n)
    if (n != 4) CHECK(std::abs(c.coefficients[n]) <= 1e-12 * peak);
}

TEST_CASE("eigenfunction of the elliptic operator") {
  const Grid g = make_grid(make_domain(1, kPi), 101);
  const ScalarField q = harmonic_1d(g, 1);
  const ScalarField phi = solve_screened_poisson(q, 4.0, 1.0, EllipticMultiplier::kContinuous);
  const double factor = 2 * 4.0 / (std::pow(kPi / g.domain.width(), 2) + 1.0);
  CHECK(rel_linf(phi.values, factor * q.values) <= 1e-12);
  CHECK(solve_screened_poisson(ScalarField::zeros(g), 4.0, 1.0).values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("2D eigenfunction") {
  const Grid g = make_grid(make_domain(2, kPi), 32);
  ScalarField q = ScalarField::zeros(g);
  const double L = g.domain.width();
  for (int i = 0; i < g.cells; ++i)
    for (int j = 0; j < g.cells; ++j)
      q.values[g.flat(i, j)] = std::sin(2 * kPi * (g.center(i) + kPi) / L) * std::sin(3 * kPi * (g.center(j) + kPi) / L);
  const double mu = std::pow(2 * kPi / L, 2) + std::pow(3 * kPi / L, 2);
  const ScalarField phi = solve_screened_poisson(q, 4.0, 1.0);
  CHECK(rel_linf(phi.values, 8.0 / (mu + 1.0) * q.values) <= 1e-12);
}

TEST_CASE("spectral solve matches direct summation with the closed form") {
  const Grid g = make_grid(make_domain(1, kPi), 101);
  const ScalarField rho = initial_conditions_1d(g).rho_field();
  const ScalarField spectral = solve_screened_poisson(rho, 4.0, 1.0);
  const ScalarField direct = convolve_direct(ScreenedPoisson1D{4.0, 1.0, 2 * kPi}, rho);
  CHECK(rel_linf(spectral.values, direct.values) <= 1e-6);
}

TEST_CASE("solve is self-adjoint") {
  for (int dim : {1, 2}) {
    const Grid g = make_grid(make_domain(dim, kPi), 24);
    const ScalarField a = random_field(g, 1), b = random_field(g, 2);
    const double lhs = inner_product(a, solve_screened_poisson(b, 3.0, 0.7));
    const double rhs = inner_product(solve_screened_poisson(a, 3.0, 0.7), b);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("direct convolution with a delta surrogate is the identity") {
  const Grid g = make_grid(make_domain(1, kPi), 50);
  const ScalarField q = random_field(g, 3);
  const ScalarField out = convolve_direct_with([&](double x, double s) { return x == s ? 1.0 / g.dx : 0.0; }, q);
  CHECK(rel_linf(out.values, q.values) < 1e-14);
  CHECK(convolve_direct(FreeSpaceExp{}, ScalarField::zeros(g)).values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fft convolution") {
  SUBCASE("delta surrogate") {
    for (int dim : {1, 2}) {
      const Grid g = make_grid(make_domain(dim, kPi), 20);
      DisplacementKernel k{g, Vector::Zero(dim == 1 ? 39 : 39 * 39)};
      k.samples[dim == 1 ? 19 : 19 * 39 + 19] = 1.0 / g.cell_volume();
      const ScalarField q = random_field(g, 4);
      CHECK((convolve_fft(k, q).values - q.values).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(convolve_fft(k, ScalarField::zeros(g)).values.cwiseAbs().maxCoeff() <= 1e-300);
    }
  }
  SUBCASE("matches direct summation for the Cucker-Smale rate in 2D") {
    const Grid g = make_grid(make_domain(2, kPi), 64);
    const ScalarField q = initial_conditions_2d(g).rho_field();
    const CuckerSmale cs{5.0, 2.0};
    const ScalarField fft = convolve_fft(sample_displacement_kernel(cs, g), q);
    const ScalarField direct = convolve_direct(cs, q);
    CHECK(rel_linf(fft.values, direct.values) <= 1e-10);
  }
  SUBCASE("size mismatch") {
    const Grid a = make_grid(make_domain(1, kPi), 20), b = make_grid(make_domain(1, kPi), 21);
    CHECK_THROWS_AS(convolve_fft(sample_displacement_kernel(FreeSpaceExp{}, a), ScalarField::zeros(b)), ConfigError);
  }
}

TEST_CASE("tabulated solver kernel reproduces the spectral solve in 2D") {
  const Grid g = make_grid(make_domain(2, kPi), 16);
  const ScreenedPoissonSolver solver(g, 4.0, 1.0);
  const ScalarField q = random_field(g, 5);
  const ScalarField direct = convolve_direct(DirichletSeriesKernel2D::from_solver(solver), q, false);
  CHECK(rel_linf(direct.values, solver.apply(q).values) <= 1e-10);
}

TEST_CASE("tabulated series agrees with pointwise evaluation") {
  const Grid g = make_grid(make_domain(2, kPi), 12);
  const ScreenedPoisson2DSeries spec{4.0, 1.0, 2 * kPi, 64};
  const auto table = DirichletSeriesKernel2D::from_series(g, spec);
  const Point2 x(g.center(3), g.center(7)), s(g.center(8), g.center(2));
  CHECK(table(g.flat(3, 7), g.flat(8, 2)) == doctest::Approx(greens_2d_series_eval(spec, x, s)).epsilon(1e-10));
}
