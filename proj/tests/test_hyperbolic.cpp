#include "swarmflow/errors.hpp"
#include "swarmflow/hyperbolic.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace swarmflow;
constexpr double kPi = std::numbers::pi;

namespace {

Eigen::VectorXd state(std::initializer_list<double> v) {
  Eigen::VectorXd s(v.size());
  int i = 0;
  for (double x : v) s[i++] = x;
  return s;
}

double bump(double x) { return std::abs(x) < 1.0 ? std::pow(std::cos(kPi * x / 2), 4) : 0.0; }

// Constant-velocity transport of a smooth bump; returns the L1 error at t against the shifted profile.
double advection_error(int cells, double t) {
  const Grid g = make_grid(make_domain(1, kPi), cells);
  const double c = 0.5;
  StateField u = StateField::zeros(g);
  for (int i = 0; i < cells; ++i) {
    u.q(i, 0) = bump(g.center(i));
    u.q(i, 1) = c * u.q(i, 0);
  }
  const double dt0 = 0.4 * g.dx / c;
  const int steps = int(std::ceil(t / dt0));
  for (int n = 0; n < steps; ++n) u = step_time(u, [](const StateField& w) { return transport_rhs(w); }, t / steps);
  double err = 0.0;
  for (int i = 0; i < cells; ++i) err += std::abs(u.q(i, 0) - bump(g.center(i) - c * t)) * g.dx;
  return err;
}

}  // namespace

TEST_CASE("minmod") {
  CHECK(minmod(-1.0, 2.0) == 0.0);
  CHECK(minmod(3.0, 3.0) == 3.0);
  CHECK(minmod(1.0, 2.0) == 1.0);
  CHECK(minmod(-1.0, -4.0) == -1.0);
  CHECK(minmod(0.0, 4.0) == 0.0);
}

TEST_CASE("reconstruction") {
  const Grid g = make_grid(make_domain(1, kPi), 20);
  SUBCASE("constant field away from the ghost cells") {
    StateField u = StateField::zeros(g);
    u.q.col(0).setConstant(0.7);
    u.q.col(1).setConstant(-0.2);
    const InterfaceStates s = reconstruct_interfaces(u);
    for (int j = 2; j <= g.cells - 2; ++j) {
      CHECK(s.minus(j, 0) == doctest::Approx(0.7));
      CHECK(s.plus(j, 0) == doctest::Approx(0.7));
      CHECK(s.minus(j, 1) == doctest::Approx(-0.2));
    }
  }
  SUBCASE("linear profile is reproduced exactly") {
    StateField u = StateField::zeros(g);
    for (int i = 0; i < g.cells; ++i) u.q(i, 0) = 10.0 + g.center(i);
    const InterfaceStates s = reconstruct_interfaces(u);
    for (int j = 2; j <= g.cells - 2; ++j) {
      const double xf = -kPi + j * g.dx;
      CHECK(s.minus(j, 0) == doctest::Approx(10.0 + xf).epsilon(1e-13));
      CHECK(s.plus(j, 0) == doctest::Approx(10.0 + xf).epsilon(1e-13));
    }
  }
}

TEST_CASE("Kurganov-Tadmor flux") {
  const Eigen::VectorXd f = kt_flux(state({1.0, 0.5}), state({1.0, 0.5}));
  CHECK(f[0] == doctest::Approx(0.5));
  CHECK(f[1] == doctest::Approx(0.25));
  CHECK(kt_flux(state({2.0, 0.0}), state({2.0, 0.0})).cwiseAbs().maxCoeff() == 0.0);
  // Colliding streams: the dissipation term carries the jump.
  const Eigen::VectorXd c = kt_flux(state({1.0, 1.0}), state({1.0, -1.0}));
  CHECK(c[0] == doctest::Approx(0.0));
  CHECK(c[1] == doctest::Approx(2.0));
  const Eigen::VectorXd v = kt_flux(state({0.0, 0.0}), state({1e-14, 1e-14}));
  CHECK(std::isfinite(v[0]));
  CHECK(std::isfinite(v[1]));
  const Eigen::VectorXd f2 = kt_flux(state({1.0, 0.3, 0.5}), state({1.0, 0.3, 0.5}), 1);
  CHECK(f2[0] == doctest::Approx(0.5));
  CHECK(f2[1] == doctest::Approx(0.15));
  CHECK(f2[2] == doctest::Approx(0.25));
}

TEST_CASE("semi-discrete right-hand side") {
  const Grid g = make_grid(make_domain(1, kPi), 30);
  StateField u = StateField::zeros(g);
  CHECK(semi_discrete_rhs(u, StateField::zeros(g)).cwiseAbs().maxCoeff() == 0.0);
  u.q.col(0).setConstant(1.3);
  CHECK(semi_discrete_rhs(u, StateField::zeros(g)).cwiseAbs().maxCoeff() == 0.0);
  u.q.col(1).setConstant(0.4);
  const Eigen::MatrixXd r = transport_rhs(u);
  for (int i = 3; i < g.cells - 3; ++i) CHECK(r.row(i).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("flux form conserves compactly supported states") {
  for (int dim : {1, 2}) {
    const Grid g = make_grid(make_domain(dim, kPi), 40);
    StateField u = StateField::zeros(g);
    for (Eigen::Index a = 0; a < g.size(); ++a) {
      const double x = g.center(int(dim == 1 ? a : a / g.cells));
      const double y = dim == 1 ? 0.0 : g.center(int(a % g.cells));
      u.q(a, 0) = bump(x) * bump(y);
      for (int d = 0; d < dim; ++d) u.q(a, 1 + d) = u.q(a, 0) * std::sin(x + 2 * d * y);
    }
    const Eigen::MatrixXd r = transport_rhs(u);
    for (int c = 0; c <= dim; ++c) CHECK(std::abs(r.col(c).sum()) < 1e-12);
  }
}

TEST_CASE("time stepping") {
  const Grid g = make_grid(make_domain(1, kPi), 10);
  StateField u = StateField::zeros(g);
  u.q.setRandom();
  const StateField same = step_time(u, [](const StateField& w) { return Eigen::MatrixXd::Zero(w.q.rows(), w.q.cols()); }, 0.1);
  CHECK(same.q == u.q);

  const double dt = 0.01;
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  const Eigen::VectorXd y = ssp_rk2_step(one, [](const Eigen::VectorXd& v) -> Eigen::VectorXd { return -v; }, dt);
  // Local error of a second-order step is dt^3/6 + O(dt^4).
  CHECK(std::abs(y[0] - std::exp(-dt)) <= dt * dt * dt);
  CHECK(std::abs(y[0] - std::exp(-dt)) == doctest::Approx(dt * dt * dt / 6).epsilon(0.05));
}

TEST_CASE("CFL step") {
  const Grid g = make_grid(make_domain(1, 1.0), 20);
  StateField u = StateField::zeros(g);
  u.q.col(0).setConstant(1.0);
  CHECK(cfl_dt(u, 0.45) == doctest::Approx(0.45 * 0.1 / kFloorSpeed));
  u.q(4, 1) = 2.0;
  u.q(5, 1) = -1.0;
  CHECK(max_speed(u) == 2.0);
  CHECK(cfl_dt(u, 0.45) == doctest::Approx(0.0225));
  CHECK_THROWS_AS(cfl_dt(u, 1.5), ConfigError);
  CHECK_THROWS_AS(cfl_dt(u, 0.0), ConfigError);
}

TEST_CASE("second-order convergence on smooth transport") {
  const double e1 = advection_error(200, 1.0);
  const double e2 = advection_error(400, 1.0);
  const double e3 = advection_error(800, 1.0);
  CHECK(std::log2(e1 / e2) >= 1.5);
  CHECK(std::log2(e2 / e3) >= 1.5);
}

TEST_CASE("total variation of the density does not grow") {
  const Grid g = make_grid(make_domain(1, kPi), 120);
  StateField u = StateField::zeros(g);
  for (int i = 0; i < g.cells; ++i) {
    u.q(i, 0) = std::abs(g.center(i)) < 1.0 ? 1.0 : 0.0;
    u.q(i, 1) = 0.7 * u.q(i, 0);
  }
  auto tv = [](const StateField& w) { return (w.q.col(0).tail(w.q.rows() - 1) - w.q.col(0).head(w.q.rows() - 1)).cwiseAbs().sum(); };
  double prev = tv(u);
  for (int n = 0; n < 100; ++n) {
    u = step_time(u, [](const StateField& w) { return transport_rhs(w); }, cfl_dt(u, 0.45));
    const double now = tv(u);
    CHECK(now <= prev + 1e-12);
    prev = now;
  }
}
