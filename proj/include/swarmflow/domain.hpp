#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>

namespace swarmflow {

using Vector = Eigen::VectorXd;
using Point2 = Eigen::Vector2d;

/// D = [-L/2, L/2]^dim.
struct Domain {
  int dim = 1;
  double half_width = 1.0;

  double width() const { return 2.0 * half_width; }
  bool contains(double x) const { return x >= -half_width && x <= half_width; }
  bool operator==(const Domain&) const = default;
};

Domain make_domain(int dim, double half_width);

/// Uniform cell-centred grid with `cells` cells per axis.
///
/// 2D storage is row-major with y varying fastest: flat index = ix * cells + iy.
struct Grid {
  Domain domain;
  int cells = 0;
  double dx = 0.0;

  int dim() const { return domain.dim; }
  Eigen::Index size() const { return dim() == 1 ? cells : Eigen::Index(cells) * cells; }
  double center(int i) const { return -domain.half_width + (i + 0.5) * dx; }
  double cell_volume() const { return dim() == 1 ? dx : dx * dx; }
  Eigen::Index flat(int ix, int iy) const { return Eigen::Index(ix) * cells + iy; }

  /// Coordinates of cell centres along one axis.
  Vector centers() const;

  bool operator==(const Grid&) const = default;
};

/// Throws ConfigError for cells < 3.
Grid make_grid(const Domain& domain, int cells);

struct ScalarField {
  Grid grid;
  Vector values;

  static ScalarField zeros(const Grid& g) { return {g, Vector::Zero(g.size())}; }
};

/// Hydrodynamic state U = (rho, m) in 1D, Q = (rho, m1, m2) in 2D.
///
/// Column 0 holds rho, columns 1..dim hold the momentum components.
struct StateField {
  Grid grid;
  Eigen::MatrixXd q;

  static StateField zeros(const Grid& g) { return {g, Eigen::MatrixXd::Zero(g.size(), 1 + g.dim())}; }

  auto rho() { return q.col(0); }
  auto rho() const { return q.col(0); }
  auto momentum(int axis) { return q.col(1 + axis); }
  auto momentum(int axis) const { return q.col(1 + axis); }

  ScalarField rho_field() const { return {grid, q.col(0)}; }
  ScalarField momentum_field(int axis) const { return {grid, q.col(1 + axis)}; }
};

/// Midpoint quadrature sum_i f_i dx^d.
double integrate_field(const ScalarField& f);

/// Midpoint-quadrature inner product <a, b>.
double inner_product(const ScalarField& a, const ScalarField& b);

/// Throws ConfigError when the grids differ.
void require_same_grid(const Grid& a, const Grid& b, const char* what);

}  // namespace swarmflow
