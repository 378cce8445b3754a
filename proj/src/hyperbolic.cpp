#include "swarmflow/hyperbolic.hpp"

#include "swarmflow/errors.hpp"

#include <algorithm>
#include <array>
#include <vector>

namespace swarmflow {

namespace {

constexpr int kMaxComponents = 3;
using Cell = std::array<double, kMaxComponents>;

double velocity(const Cell& s, int axis) { return s[1 + axis] / std::max(s[0], kVacuumFloor); }

// KT flux for raw component arrays; nc = 1 + dim.
Cell kt_flux_raw(const Cell& minus, const Cell& plus, int nc, int axis) {
  const double um = velocity(minus, axis);
  const double up = velocity(plus, axis);
  const double a = std::max(std::abs(um), std::abs(up));
  Cell f{};
  f[0] = 0.5 * (plus[1 + axis] + minus[1 + axis] - a * (plus[0] - minus[0]));
  for (int c = 1; c < nc; ++c) f[c] = 0.5 * (plus[c] * up + minus[c] * um - a * (plus[c] - minus[c]));
  return f;
}

// One grid line with two zero ghost cells per side. `ext` has n + 4 cells.
struct Line {
  int n = 0;
  int nc = 0;
  std::vector<Cell> ext;
  std::vector<Cell> minus, plus;

  void reconstruct() {
    minus.assign(n + 1, Cell{});
    plus.assign(n + 1, Cell{});
    // Interface j - 1/2 sits between ext cells j+1 and j+2 (cell j-1 and j of the grid).
    for (int j = 0; j <= n; ++j) {
      const int l = j + 1;
      for (int c = 0; c < nc; ++c) {
        const double ul = ext[l][c];
        const double ur = ext[l + 1][c];
        minus[j][c] = ul + 0.5 * minmod(ur - ul, ul - ext[l - 1][c]);
        plus[j][c] = ur - 0.5 * minmod(ext[l + 2][c] - ur, ur - ul);
      }
    }
  }
};

template <class Visit>
void for_each_line(const StateField& u, int axis, Line& line, Visit&& visit) {
  const Grid& g = u.grid;
  const int n = g.cells;
  const int nc = int(u.q.cols());
  line.n = n;
  line.nc = nc;
  line.ext.assign(n + 4, Cell{});
  const int lines = g.dim() == 1 ? 1 : n;
  for (int l = 0; l < lines; ++l) {
    auto index = [&](int j) -> Eigen::Index {
      if (g.dim() == 1) return j;
      return axis == 0 ? g.flat(j, l) : g.flat(l, j);
    };
    for (int j = 0; j < n; ++j)
      for (int c = 0; c < nc; ++c) line.ext[j + 2][c] = u.q(index(j), c);
    line.reconstruct();
    visit(l, index);
  }
}

void add_flux_divergence(const StateField& u, Eigen::MatrixXd& out) {
  const Grid& g = u.grid;
  const int nc = int(u.q.cols());
  const double inv_dx = 1.0 / g.dx;
  Line line;
  std::vector<Cell> flux;
  for (int axis = 0; axis < g.dim(); ++axis) {
    for_each_line(u, axis, line, [&](int, auto index) {
      flux.resize(line.n + 1);
      for (int j = 0; j <= line.n; ++j) flux[j] = kt_flux_raw(line.minus[j], line.plus[j], nc, axis);
      for (int j = 0; j < line.n; ++j)
        for (int c = 0; c < nc; ++c) out(index(j), c) -= inv_dx * (flux[j + 1][c] - flux[j][c]);
    });
  }
}

Cell to_cell(const Eigen::VectorXd& v) {
  if (v.size() < 2 || v.size() > kMaxComponents) throw ConfigError("state vector must have 2 or 3 components");
  Cell c{};
  for (Eigen::Index i = 0; i < v.size(); ++i) c[i] = v[i];
  return c;
}

void check_axis(const Eigen::VectorXd& v, int axis) {
  if (axis < 0 || axis + 1 >= v.size()) throw ConfigError("flux axis out of range for state vector");
}

}  // namespace

FluxPair make_flux_pair(const Eigen::VectorXd& left, const Eigen::VectorXd& right, int axis) {
  check_axis(left, axis);
  const double a = std::max(std::abs(velocity(to_cell(left), axis)), std::abs(velocity(to_cell(right), axis)));
  return {left, right, a};
}

Eigen::VectorXd physical_flux(const Eigen::VectorXd& state, int axis) {
  check_axis(state, axis);
  const Cell s = to_cell(state);
  const double u = velocity(s, axis);
  Eigen::VectorXd f(state.size());
  f[0] = s[1 + axis];
  for (Eigen::Index c = 1; c < state.size(); ++c) f[c] = s[c] * u;
  return f;
}

Eigen::VectorXd kt_flux(const Eigen::VectorXd& left, const Eigen::VectorXd& right, int axis) {
  check_axis(left, axis);
  if (left.size() != right.size()) throw ConfigError("kt_flux: state size mismatch");
  const int nc = int(left.size());
  const Cell f = kt_flux_raw(to_cell(left), to_cell(right), nc, axis);
  Eigen::VectorXd out(nc);
  for (int c = 0; c < nc; ++c) out[c] = f[c];
  return out;
}

InterfaceStates reconstruct_interfaces(const StateField& u, int axis) {
  const Grid& g = u.grid;
  if (axis < 0 || axis >= g.dim()) throw ConfigError("reconstruct_interfaces: axis out of range");
  const int n = g.cells;
  const int nc = int(u.q.cols());
  const int lines = g.dim() == 1 ? 1 : n;
  InterfaceStates out{Eigen::MatrixXd(lines * (n + 1), nc), Eigen::MatrixXd(lines * (n + 1), nc)};
  Line line;
  for_each_line(u, axis, line, [&](int l, auto) {
    for (int j = 0; j <= n; ++j)
      for (int c = 0; c < nc; ++c) {
        out.minus(l * (n + 1) + j, c) = line.minus[j][c];
        out.plus(l * (n + 1) + j, c) = line.plus[j][c];
      }
  });
  return out;
}

Eigen::MatrixXd transport_rhs(const StateField& u) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(u.q.rows(), u.q.cols());
  add_flux_divergence(u, out);
  return out;
}

Eigen::MatrixXd semi_discrete_rhs(const StateField& u, const StateField& source) {
  require_same_grid(u.grid, source.grid, "semi_discrete_rhs");
  Eigen::MatrixXd out = source.q;
  add_flux_divergence(u, out);
  return out;
}

double max_speed(const StateField& u) {
  const Eigen::ArrayXd rho = u.rho().array().max(kVacuumFloor);
  Eigen::ArrayXd speed = Eigen::ArrayXd::Zero(rho.size());
  for (int a = 0; a < u.grid.dim(); ++a) speed += u.momentum(a).array().abs() / rho;
  return speed.size() ? speed.maxCoeff() : 0.0;
}

double cfl_dt(const StateField& u, double cfl) {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("cfl must lie in (0, 1]");
  return cfl * u.grid.dx / std::max(max_speed(u), kFloorSpeed);
}

}  // namespace swarmflow
