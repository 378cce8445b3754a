#pragma once

#include "swarmflow/domain.hpp"
#include "swarmflow/hyperbolic.hpp"
#include "swarmflow/kernels.hpp"
#include "swarmflow/spectral.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace swarmflow {

struct MacroConfig {
  Grid grid;
  KernelSpec kernel = ScreenedPoisson1D{};
  double t0 = 0.0;
  double tf = 2.0;
  /// Fixed step. When empty the step is chosen by cfl_dt every step.
  std::optional<double> dt;
  double cfl = kDefaultCfl;
  /// Save every this many steps (fixed-dt runs) when save_times is empty.
  int save_every = 10;
  /// Explicit output times in [t0, tf]. The stepper lands on each exactly.
  std::vector<double> save_times;
  int threads = 1;
};

void validate(const MacroConfig& config);

struct DensitySeries {
  std::vector<double> times;
  std::vector<StateField> states;
  /// Time of the first non-finite state when a run was cut short.
  std::optional<double> aborted_at;

  std::size_t size() const { return times.size(); }
  const Grid& grid() const { return states.front().grid; }
};

/// Auxiliary fields z and y with L z = rho, L y_j = m_j.
struct AuxFields {
  ScalarField z;
  std::vector<ScalarField> y;
};

/// Largest absolute deviation of the total mass and momentum from their initial values,
/// taken over every step of a run.
struct ConservationReport {
  double mass_drift = 0.0;
  std::vector<double> momentum_drift;
  long steps = 0;
  /// Steps whose fixed dt exceeded the CFL bound.
  long cfl_violations = 0;
};

struct MacroRun {
  DensitySeries series;
  ConservationReport report;
};

/// Maps a scalar field q to (L_psi q)(x) = int psi(x, s) q(s) ds.
using NonlocalOperator = std::function<ScalarField(const ScalarField&)>;

/// Spectral inverse of the screened-Poisson operator, or FFT convolution with a sampled
/// translation-invariant kernel. Throws ConfigError for kernels with neither path.
NonlocalOperator make_nonlocal_operator(const KernelSpec& kernel, const Grid& grid);

AuxFields auxiliary_fields(const StateField& u, const NonlocalOperator& op);

/// Momentum source rho y_j - z m_j (mass row zero).
StateField alignment_source(const StateField& u, const AuxFields& aux);

/// Time derivative of the augmented system: flux divergence plus alignment source.
Eigen::MatrixXd augmented_rhs(const StateField& u, const NonlocalOperator& op);
Eigen::MatrixXd augmented_rhs(const StateField& u, double k, double lambda);

/// Same right-hand side with the transform built by direct midpoint quadrature of psi.
Eigen::MatrixXd integral_rhs(const StateField& u, const KernelSpec& kernel, int threads = 1);

MacroRun simulate_macro(const MacroConfig& config, const StateField& init);

/// Forces the FFT-convolution path. Requires a translation-invariant kernel.
MacroRun simulate_macro_general_kernel(const MacroConfig& config, const StateField& init);

/// Drives the stepper with a caller-supplied non-local operator.
MacroRun simulate_macro_with(const MacroConfig& config, const StateField& init, const NonlocalOperator& op);

/// rho0 = (pi/2L) cos(pi x/L), u0 = -sin(pi x/L); m = rho0 u0.
StateField initial_conditions_1d(const Grid& grid);

/// rho0 = (pi^2/4L^2) cos(pi x/L) cos(pi y/L), u0 = -(1/4)(sin(pi x/L), sin(pi y/L)).
StateField initial_conditions_2d(const Grid& grid);

double initial_density_1d(double x, double L);
double initial_velocity_1d(double x, double L);

/// Total mass and momentum components.
Vector totals(const StateField& u);

}  // namespace swarmflow
