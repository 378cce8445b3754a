#pragma once

#include "swarmflow/domain.hpp"
#include "swarmflow/kernels.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace swarmflow {

/// N agents in d dimensions. Rows are agents.
struct ParticleEnsemble {
  Eigen::MatrixXd positions;
  Eigen::MatrixXd velocities;
  bool in_fluctuation_frame = false;
  /// Centre of mass and mean velocity at the moment the frame was changed.
  Vector xc0;
  Vector vc0;

  Eigen::Index size() const { return positions.rows(); }
  int dim() const { return int(positions.cols()); }
};

/// Throws ConfigError for empty ensembles or mismatched shapes.
void validate(const ParticleEnsemble& e);

/// dv_i/dt = (1/N) sum_j psi(x_j, x_i) (v_j - v_i).
///
/// The bounded 1D Green's function is separable (a product of one factor of min(x, s) and one of
/// max(x, s)), so for that kernel the sum is evaluated exactly with sorted prefix sums in
/// O(N log N). Every other kernel goes through cs_rhs_pairwise.
Eigen::MatrixXd cs_rhs(const ParticleEnsemble& e, const KernelSpec& kernel, int threads = 1);

/// Plain O(N^2) double loop, the reference for cs_rhs.
Eigen::MatrixXd cs_rhs_pairwise(const ParticleEnsemble& e, const KernelSpec& kernel, int threads = 1);

/// Velocity Verlet as printed for velocity-dependent accelerations:
///   v_half = v + a(x, v) dt/2,  x' = x + dt v_half,  v' = v + dt/2 [a(x, v) + a(x', v_half)].
/// accel maps (positions, velocities) to accelerations.
template <class Accel>
void verlet_step(Eigen::MatrixXd& x, Eigen::MatrixXd& v, Accel&& accel, double dt) {
  const Eigen::MatrixXd a0 = accel(x, v);
  const Eigen::MatrixXd v_half = v + 0.5 * dt * a0;
  x += dt * v_half;
  const Eigen::MatrixXd a1 = accel(x, v_half);
  v += 0.5 * dt * (a0 + a1);
}

ParticleEnsemble verlet_step(const ParticleEnsemble& e, const KernelSpec& kernel, double dt, int threads = 1);

/// Subtracts the centre of mass and mean velocity. Throws ConfigError when already applied.
ParticleEnsemble to_fluctuation_frame(const ParticleEnsemble& e);

/// Lab-frame positions at time t: x_hat + xc0 + t vc0.
Eigen::MatrixXd lab_positions(const ParticleEnsemble& e, double t);

using Profile1D = std::function<double(double)>;

/// Positions drawn i.i.d. from rho0 by inverse CDF; velocities set to u0(x).
ParticleEnsemble sample_from_density(const Domain& domain, const Profile1D& rho0, const Profile1D& u0, long n,
                                     std::uint64_t seed);

/// Separable 2D density rho0(x, y) = fx(x) fy(y), sampled per axis; velocities u0(x, y).
ParticleEnsemble sample_from_density(const Domain& domain, const Profile1D& fx, const Profile1D& fy,
                                     const std::function<Point2(const Point2&)>& u0, long n, std::uint64_t seed);

/// Adds N(0, sigma2) to every position coordinate. Velocities are untouched.
ParticleEnsemble add_observation_noise(const ParticleEnsemble& e, double sigma2, std::uint64_t seed);

/// Histogram count / (N dx^d). Particles outside D are counted in the nearest boundary cell.
ScalarField empirical_density(const ParticleEnsemble& e, const Grid& grid);

/// Histogram of velocity per cell / (N dx^d): the empirical momentum, one field per axis.
StateField empirical_state(const ParticleEnsemble& e, const Grid& grid);

struct MicroConfig {
  KernelSpec kernel = ScreenedPoisson1D{};
  double dt = 0.01;
  double tf = 2.0;
  int save_every = 10;
  int threads = 1;
};

struct MicroRun {
  std::vector<double> times;
  std::vector<ParticleEnsemble> frames;
};

/// Integrates with verlet_step from t = 0 and keeps every save_every-th state plus the last.
MicroRun simulate_micro(const MicroConfig& config, const ParticleEnsemble& init);

/// Outcome of the sufficient flocking condition on the initial data (1D only).
struct Theorem1Check {
  bool applicable = false;
  bool satisfied = false;
  double half_spread = 0.0;     // (1/2) max |x_i - x_j|
  double position_rms = 0.0;    // |x_hat(0)|
  double velocity_rms = 0.0;    // |v_hat(0)|
  double x_max = 0.0;           // chosen x_hat_M
  double integral = 0.0;        // int_{|x0|}^{x_M} phi
  double x_bar = 0.0;
  double phi_bar = 0.0;         // phi(x_bar), the decay rate
  double spread_bound = 0.0;    // bound x_M on |x_hat(t)|
  std::string note;
};

/// Searches x_M in (max(half_spread, |x0|), L/4) for which
/// |v0| < int_{|x0|}^{x_M} psi(-2 x_M, lambda s) ds, with lambda the kernel's own parameter.
Theorem1Check check_theorem1(const ParticleEnsemble& initial, const KernelSpec& kernel);

struct FlockingReport {
  std::vector<double> times;
  std::vector<double> velocity_fluctuation;
  std::vector<double> max_pair_distance;
  bool monotone = true;
  bool theorem1_satisfied = false;
  bool decay_bound_respected = false;
  bool spread_bound_respected = false;
  Theorem1Check theorem1;
};

/// RMS norm sqrt((1/N) sum |v_i|^2) of the rows.
double rms_norm(const Eigen::MatrixXd& rows);

double max_pair_distance(const Eigen::MatrixXd& positions);

FlockingReport flocking_diagnostics(const MicroRun& run, const KernelSpec& kernel);

}  // namespace swarmflow
