#include "swarmflow/domain.hpp"

#include "swarmflow/errors.hpp"

#include <cmath>
#include <string>

namespace swarmflow {

Domain make_domain(int dim, double half_width) {
  if (dim != 1 && dim != 2) throw ConfigError("domain dimension must be 1 or 2, got " + std::to_string(dim));
  if (!(half_width > 0.0) || !std::isfinite(half_width)) throw ConfigError("domain half-width must be positive");
  return {dim, half_width};
}

Vector Grid::centers() const {
  Vector c(cells);
  for (int i = 0; i < cells; ++i) c[i] = center(i);
  return c;
}

Grid make_grid(const Domain& domain, int cells) {
  if (cells < 3) throw ConfigError("grid needs at least 3 cells per axis, got " + std::to_string(cells));
  (void)make_domain(domain.dim, domain.half_width);
  return {domain, cells, domain.width() / cells};
}

double integrate_field(const ScalarField& f) { return f.values.sum() * f.grid.cell_volume(); }

double inner_product(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid, b.grid, "inner_product");
  return a.values.dot(b.values) * a.grid.cell_volume();
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw ConfigError(std::string(what) + ": fields live on different grids");
}

}  // namespace swarmflow
