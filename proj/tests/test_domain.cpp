#include "swarmflow/domain.hpp"
#include "swarmflow/errors.hpp"
#include "swarmflow/macro.hpp"

#include <doctest.h>

#include <numbers>

using namespace swarmflow;
constexpr double kPi = std::numbers::pi;

TEST_CASE("grid spacing and centres") {
  const Grid g = make_grid(make_domain(1, kPi), 101);
  CHECK(g.dx == doctest::Approx(2 * kPi / 101).epsilon(1e-15));
  CHECK(g.cells * g.dx == doctest::Approx(2 * kPi).epsilon(1e-15));
  CHECK(std::abs(g.center(50)) < 1e-15);
  const Vector x = g.centers();
  for (int i = 0; i < g.cells; ++i) CHECK(x[i] == doctest::Approx(-x[g.cells - 1 - i]).epsilon(1e-14));
}

TEST_CASE("grid rejects too few cells") {
  CHECK_THROWS_AS(make_grid(make_domain(1, 1.0), 2), ConfigError);
  CHECK_THROWS_AS(make_domain(3, 1.0), ConfigError);
  CHECK_THROWS_AS(make_domain(1, -1.0), ConfigError);
}

TEST_CASE("2D storage is row-major with y fastest") {
  const Grid g = make_grid(make_domain(2, 1.0), 4);
  CHECK(g.size() == 16);
  CHECK(g.flat(1, 0) == 4);
  CHECK(g.flat(0, 1) == 1);
}

TEST_CASE("midpoint quadrature") {
  const Grid g = make_grid(make_domain(1, kPi), 101);
  CHECK(integrate_field(ScalarField::zeros(g)) == 0.0);
  ScalarField one{g, Vector::Ones(g.cells)};
  CHECK(integrate_field(one) == doctest::Approx(2 * kPi).epsilon(1e-12));
  // Degree-one polynomials are integrated exactly.
  ScalarField lin{g, (3.0 * g.centers().array() + 2.0).matrix()};
  CHECK(integrate_field(lin) == doctest::Approx(2.0 * 2 * kPi).epsilon(1e-13));
  CHECK(integrate_field(initial_conditions_1d(g).rho_field()) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("inner product requires matching grids") {
  const Grid a = make_grid(make_domain(1, kPi), 11);
  const Grid b = make_grid(make_domain(1, kPi), 12);
  CHECK_THROWS_AS(inner_product(ScalarField::zeros(a), ScalarField::zeros(b)), ConfigError);
}
