#pragma once

#include "swarmflow/domain.hpp"

#include <cmath>

namespace swarmflow {

/// Densities below this are treated as vacuum when forming u = m / rho.
inline constexpr double kVacuumFloor = 1e-10;

/// Lower bound on the transport speed used by cfl_dt.
inline constexpr double kFloorSpeed = 1e-6;

inline constexpr double kDefaultCfl = 0.45;

template <typename Scalar>
Scalar sign(Scalar a) {
  return Scalar((a > Scalar(0)) - (a < Scalar(0)));
}

/// (1/2)(sign(a) + sign(b)) min(|a|, |b|).
template <typename Scalar>
Scalar minmod(Scalar a, Scalar b) {
  using std::abs;
  using std::min;
  return Scalar(0.5) * (sign(a) + sign(b)) * min(abs(a), abs(b));
}

/// Left/right reconstructed states at one interface and the local speed max(|u-|, |u+|).
struct FluxPair {
  Eigen::VectorXd left_state;
  Eigen::VectorXd right_state;
  double local_speed = 0.0;
};

FluxPair make_flux_pair(const Eigen::VectorXd& left, const Eigen::VectorXd& right, int axis = 0);

/// Physical flux u_axis * Q for a state (rho, m_1, ..., m_d), with the mass entry equal to m_axis.
Eigen::VectorXd physical_flux(const Eigen::VectorXd& state, int axis = 0);

/// Kurganov-Tadmor flux (1/2)[F(U+) + F(U-) - a (U+ - U-)], left = U-, right = U+.
Eigen::VectorXd kt_flux(const Eigen::VectorXd& left, const Eigen::VectorXd& right, int axis = 0);

/// Minmod-limited piecewise-linear states at the Ns+1 interfaces of every grid line along `axis`.
/// Row line * (Ns+1) + j holds interface j - 1/2 (j = 0 is the left boundary). Two zero ghost cells
/// are used per side.
struct InterfaceStates {
  Eigen::MatrixXd minus;
  Eigen::MatrixXd plus;
};

InterfaceStates reconstruct_interfaces(const StateField& u, int axis = 0);

/// -(div of the numerical flux) + source, per cell.
Eigen::MatrixXd semi_discrete_rhs(const StateField& u, const StateField& source);

/// Flux divergence term only (zero source).
Eigen::MatrixXd transport_rhs(const StateField& u);

/// Second-order SSP Runge-Kutta (Heun) step for any Eigen-like state.
template <class State, class Rhs>
State ssp_rk2_step(const State& u, Rhs&& rhs, double dt) {
  State stage = u + dt * rhs(u);
  return State(0.5 * u + 0.5 * (stage + dt * rhs(stage)));
}

/// SSP-RK2 on a StateField; rhs maps StateField -> Eigen::MatrixXd time derivative.
template <class Rhs>
StateField step_time(const StateField& u, Rhs&& rhs, double dt) {
  StateField stage{u.grid, u.q + dt * rhs(u)};
  StateField out{u.grid, 0.5 * u.q + 0.5 * (stage.q + dt * rhs(stage))};
  return out;
}

/// Largest transport speed over cells: |u| in 1D, |u1| + |u2| in 2D.
double max_speed(const StateField& u);

/// cfl * dx / max(max_speed, kFloorSpeed).
double cfl_dt(const StateField& u, double cfl);

}  // namespace swarmflow
