#pragma once

#include "swarmflow/domain.hpp"
#include "swarmflow/macro.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace swarmflow {

using Theta = Eigen::Vector2d;

/// Cells where p <= kSupportFloor are skipped; q is floored at kQFloor inside the log.
inline constexpr double kSupportFloor = 1e-8;
inline constexpr double kQFloor = 1e-12;

/// sum over supp(p) of p log2(p / max(q, q_floor)) dx^d.
double kl_divergence(const ScalarField& p, const ScalarField& q);
double kl_divergence(std::span<const double> p, std::span<const double> q, double cell_volume);

/// Scalar objective of theta = (k, lambda). Returns +inf when the forward run blows up.
using Objective = std::function<double(const Theta&)>;

struct LearnConfig {
  Theta theta0{1.0, 0.5};
  /// Relative finite-difference step: h_i = fd_step * max(|theta_i|, 1).
  double fd_step = 1e-4;
  int max_iters = 20;
  double grad_tol = 1e-8;
  /// Stop when a Newton step changes log(theta) by less than this.
  double step_tol = 1e-7;
  /// Eigenvalues of the Hessian are clipped at hessian_floor * sum |eigenvalue| (at least 1e-12).
  double hessian_floor = 1e-6;
  int max_backtracks = 20;
  /// Largest change of any log(theta_i) tried in one Newton step (log_space only).
  double max_log_step = 2.0;
  bool log_space = true;
  DensitySeries observations;
  /// Grid, stepping and thread count of the forward model. The kernel is replaced by theta.
  MacroConfig forward;
  /// Forward initial state. Defaults to the first observed frame.
  std::optional<StateField> initial_state;
  /// Position-noise variance of the observation model; 0 compares raw simulated densities.
  double noise_sigma2 = 0.0;
  int threads = 1;
};

void validate(const LearnConfig& config);

/// Screened-Poisson kernel of the right dimension with parameters theta on the grid's domain.
KernelSpec kernel_for(const Theta& theta, const Grid& grid);

/// Density of x + eps, eps ~ N(0, sigma2) per axis, for a particle density given on the grid;
/// mass leaving D is assigned to the boundary cells, matching empirical_density.
ScalarField observe_with_noise(const ScalarField& rho, double sigma2);

/// Forward run at theta saved on the observation timestamps.
MacroRun forward_run(const Theta& theta, const LearnConfig& config);

/// Per-frame KL(observed || simulated) at theta.
std::vector<double> per_frame_kl(const Theta& theta, const LearnConfig& config);

double objective(const Theta& theta, const LearnConfig& config);
Objective make_objective(const LearnConfig& config);

Theta fd_gradient(const Objective& f, const Theta& theta, double fd_step);

/// Second-order central differences (symmetric by construction).
Eigen::Matrix2d fd_hessian(const Objective& f, const Theta& theta, double fd_step);

struct Lanczos {
  Eigen::MatrixXd basis;  // orthonormal columns
  Vector alpha;           // diagonal of T
  Vector beta;            // off-diagonal of T
};

/// Lanczos tridiagonalisation with full reorthogonalisation. Stops early on breakdown.
Lanczos lanczos(const Eigen::MatrixXd& a, const Vector& start, int steps);

/// Symmetric positive-definite surrogate: tridiagonalise, clip eigenvalues, reassemble.
Eigen::MatrixXd psd_project(const Eigen::MatrixXd& h, double floor_rel);

Eigen::Matrix2d psd_hessian(const Objective& f, const Theta& theta, double fd_step, double floor_rel);

struct LearnState {
  Theta theta{0.0, 0.0};
  double objective = 0.0;
  Theta gradient{0.0, 0.0};
  Eigen::Matrix2d hessian_psd = Eigen::Matrix2d::Zero();
  int iteration = 0;
  std::vector<std::pair<Theta, double>> history;
  std::string status;
  long evaluations = 0;
};

/// Damped Newton theta <- theta - alpha H^-1 grad with halving backtracking.
LearnState newton_learn(const Objective& f, const LearnConfig& options);
LearnState newton_learn(const LearnConfig& config);

/// Runs newton_learn from theta0, theta0 * (4, 2) and theta0 * (2, 4); returns the best.
LearnState newton_learn_multistart(const LearnConfig& config, int starts = 3);

struct FitReport {
  std::vector<double> objective_log2;
  Vector profile_x;
  Vector fitted_profile;
  std::optional<Vector> reference_profile;
  std::vector<double> frame_times;
  std::vector<double> frame_kl;
};

/// Training curve, psi(0, x) of the fit (and of a reference kernel if given) and per-frame KL.
FitReport fit_report(const LearnState& state, const LearnConfig& config,
                     const std::optional<KernelSpec>& reference = std::nullopt);

}  // namespace swarmflow
