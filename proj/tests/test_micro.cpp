#include "swarmflow/errors.hpp"
#include "swarmflow/macro.hpp"
#include "swarmflow/micro.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace swarmflow;
constexpr double kPi = std::numbers::pi;

namespace {

ParticleEnsemble pair_ensemble() {
  ParticleEnsemble e;
  e.positions = Eigen::MatrixXd(2, 1);
  e.positions << -0.5, 0.5;
  e.velocities = Eigen::MatrixXd(2, 1);
  e.velocities << 1.0, -1.0;
  return e;
}

ParticleEnsemble reference_ensemble(long n, std::uint64_t seed) {
  const double L = 2 * kPi;
  return sample_from_density(
      make_domain(1, kPi), [L](double x) { return initial_density_1d(x, L); },
      [L](double x) { return initial_velocity_1d(x, L); }, n, seed);
}

}  // namespace

TEST_CASE("alignment acceleration") {
  const FreeSpaceExp k{4.0, 1.0};
  const Eigen::MatrixXd a = cs_rhs(pair_ensemble(), k);
  CHECK(a(0, 0) == doctest::Approx(-4.0 * std::exp(-1.0)).epsilon(1e-14));
  CHECK(a(1, 0) == doctest::Approx(4.0 * std::exp(-1.0)).epsilon(1e-14));

  ParticleEnsemble same = pair_ensemble();
  same.velocities.setConstant(0.3);
  CHECK(cs_rhs(same, k).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("accelerations sum to zero for symmetric kernels") {
  const ParticleEnsemble e = reference_ensemble(500, 3);
  for (const KernelSpec& k : {KernelSpec(ScreenedPoisson1D{}), KernelSpec(FreeSpaceExp{}), KernelSpec(CuckerSmale{})}) {
    const Eigen::MatrixXd a = cs_rhs(e, k);
    CHECK(std::abs(a.sum()) <= 1e-12 * a.cwiseAbs().sum());
  }
}

TEST_CASE("separable fast path equals the pairwise sum") {
  const ParticleEnsemble e = reference_ensemble(2000, 11);
  const ScreenedPoisson1D k{4.0, 1.0, 2 * kPi};
  const Eigen::MatrixXd fast = cs_rhs(e, k), slow = cs_rhs_pairwise(e, k);
  CHECK((fast - slow).cwiseAbs().maxCoeff() <= 1e-12 * slow.cwiseAbs().maxCoeff());
}

TEST_CASE("particles outside the domain are reported") {
  ParticleEnsemble e = pair_ensemble();
  e.positions(1, 0) = 4.0;
  CHECK_THROWS_AS(cs_rhs(e, ScreenedPoisson1D{}), DomainError);
}

TEST_CASE("one Verlet step of the two-particle system") {
  const ParticleEnsemble next = verlet_step(pair_ensemble(), FreeSpaceExp{4.0, 1.0}, 0.01);
  const double a1 = -4.0 * std::exp(-1.0);
  CHECK(next.positions(0, 0) == doctest::Approx(-0.5 + 0.01 * (1.0 + 0.5 * a1 * 0.01)).epsilon(1e-15));
  CHECK(next.positions(0, 0) == doctest::Approx(-0.490074).epsilon(1e-6));
  CHECK(next.positions(1, 0) == doctest::Approx(-next.positions(0, 0)).epsilon(1e-15));
}

TEST_CASE("Verlet shell") {
  SUBCASE("free drift") {
    ParticleEnsemble e = pair_ensemble();
    e.velocities.setConstant(0.25);
    const ParticleEnsemble next = verlet_step(e, CuckerSmale{}, 0.1);
    CHECK(next.positions(0, 0) == -0.5 + 0.025);
    CHECK(next.velocities == e.velocities);
  }
  SUBCASE("harmonic oscillator energy") {
    Eigen::MatrixXd x(1, 1), v(1, 1);
    x << 1.0;
    v << 0.0;
    for (int n = 0; n < 10000; ++n) verlet_step(x, v, [](const Eigen::MatrixXd& p, const Eigen::MatrixXd&) { return Eigen::MatrixXd(-p); }, 0.01);
    const double energy = 0.5 * (x(0, 0) * x(0, 0) + v(0, 0) * v(0, 0));
    CHECK(std::abs(energy - 0.5) / 0.5 <= 1e-4);
  }
}

TEST_CASE("fluctuation frame") {
  ParticleEnsemble e = reference_ensemble(1000, 5);
  e.velocities.array() += 0.7;
  const ParticleEnsemble f = to_fluctuation_frame(e);
  CHECK(std::abs(f.positions.sum()) <= 1e-12 * 1000);
  CHECK(std::abs(f.velocities.sum()) <= 1e-12 * 1000);
  CHECK(f.vc0[0] == doctest::Approx(e.velocities.mean()));
  CHECK_THROWS_AS(to_fluctuation_frame(f), ConfigError);
  const double t = 1.7;
  const Eigen::MatrixXd lab = lab_positions(f, t);
  CHECK((lab - (e.positions.array() + t * f.vc0[0]).matrix()).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK((lab_positions(f, 0.0) - e.positions).cwiseAbs().maxCoeff() <= 1e-14);

  ParticleEnsemble centred = pair_ensemble();
  CHECK(to_fluctuation_frame(centred).positions == centred.positions);
}

TEST_CASE("sampling from a density") {
  SUBCASE("mean position of the reference profile") {
    const long n = 20000;
    const ParticleEnsemble e = reference_ensemble(n, 42);
    // Var = int x^2 rho0 by midpoint quadrature.
    const int m = 100000;
    double var = 0.0;
    for (int i = 0; i < m; ++i) {
      const double x = -kPi + (i + 0.5) * 2 * kPi / m;
      var += x * x * initial_density_1d(x, 2 * kPi) * 2 * kPi / m;
    }
    CHECK(std::abs(e.positions.mean()) <= 3 * std::sqrt(var / n));
    for (long i = 0; i < n; ++i) CHECK_MESSAGE(e.velocities(i, 0) == initial_velocity_1d(e.positions(i, 0), 2 * kPi), i);
  }
  SUBCASE("uniform density passes a Kolmogorov-Smirnov test") {
    const long n = 5000;
    const ParticleEnsemble e = sample_from_density(
        make_domain(1, kPi), [](double x) { return std::abs(x) <= 1.0 ? 0.5 : 0.0; }, [](double) { return 0.0; }, n, 9);
    std::vector<double> xs(e.positions.data(), e.positions.data() + n);
    std::sort(xs.begin(), xs.end());
    double d = 0.0;
    for (long i = 0; i < n; ++i) {
      const double cdf = std::clamp((xs[i] + 1.0) / 2.0, 0.0, 1.0);
      d = std::max({d, std::abs(cdf - double(i) / n), std::abs(cdf - double(i + 1) / n)});
    }
    CHECK(d < 1.628 / std::sqrt(double(n)));
  }
  SUBCASE("determinism") {
    const ParticleEnsemble a = reference_ensemble(300, 1), b = reference_ensemble(300, 1);
    CHECK(a.positions == b.positions);
    CHECK(a.velocities == b.velocities);
  }
  SUBCASE("non-normalizable density") {
    CHECK_THROWS_AS(sample_from_density(make_domain(1, 1.0), [](double) { return 0.0; }, [](double) { return 0.0; }, 10, 1), ConfigError);
  }
}

TEST_CASE("observation noise and histograms") {
  ParticleEnsemble e;
  e.positions = Eigen::MatrixXd::Zero(100000, 1);
  e.velocities = Eigen::MatrixXd::Zero(100000, 1);
  const ParticleEnsemble noisy = add_observation_noise(e, 1.0, 3);
  const double mean = noisy.positions.mean();
  const double var = (noisy.positions.array() - mean).square().mean();
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
  CHECK(noisy.velocities == e.velocities);

  const Grid g = make_grid(make_domain(1, kPi), 101);
  const ParticleEnsemble s = reference_ensemble(20000, 42);
  CHECK(integrate_field(empirical_density(s, g)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(integrate_field(empirical_density(noisy, g)) == doctest::Approx(1.0).epsilon(1e-12));
  const StateField st = empirical_state(s, g);
  CHECK(st.q.col(1).sum() * g.dx == doctest::Approx(s.velocities.mean()).epsilon(1e-12));
}

TEST_CASE("flocking diagnostics") {
  SUBCASE("theorem hypotheses hold for a compact, slow ensemble") {
    ParticleEnsemble e;
    const int n = 201;
    e.positions = Eigen::MatrixXd(n, 1);
    e.velocities = Eigen::MatrixXd(n, 1);
    for (int i = 0; i < n; ++i) {
      e.positions(i, 0) = -0.3 + 0.6 * i / (n - 1);
      e.velocities(i, 0) = 0.05 * std::sin(3.0 * e.positions(i, 0));
    }
    const ScreenedPoisson1D k{4.0, 1.0, 2 * kPi};
    const Theorem1Check check = check_theorem1(to_fluctuation_frame(e), k);
    CHECK(check.applicable);
    CHECK(check.satisfied);
    CHECK(check.phi_bar > 0.0);

    MicroConfig c;
    c.kernel = k;
    c.tf = 1.0;
    const MicroRun run = simulate_micro(c, e);
    const FlockingReport r = flocking_diagnostics(run, k);
    CHECK(r.monotone);
    CHECK(r.theorem1_satisfied);
    CHECK(r.decay_bound_respected);
    CHECK(r.spread_bound_respected);
  }
  SUBCASE("hypothesis fails for a spread-out ensemble") {
    const ParticleEnsemble e = reference_ensemble(2000, 42);
    const Theorem1Check check = check_theorem1(to_fluctuation_frame(e), ScreenedPoisson1D{});
    CHECK_FALSE(check.satisfied);
    CHECK_FALSE(check.note.empty());
  }
  SUBCASE("pair distance") {
    Eigen::MatrixXd p(4, 2);
    p << 0, 0, 1, 0, 0, 1, 0.2, 0.3;
    CHECK(max_pair_distance(p) == doctest::Approx(std::sqrt(2.0)));
    CHECK(rms_norm(p.topRows(2)) == doctest::Approx(std::sqrt(0.5)));
  }
}
