#include "swarmflow/macro.hpp"

#include "swarmflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

namespace swarmflow {

namespace {

constexpr double kTimeSlack = 1e-12;

void require_matching_width(double kernel_L, const Grid& grid) {
  if (std::abs(kernel_L - grid.domain.width()) > 1e-12 * kernel_L)
    throw ConfigError("kernel L does not match the grid width");
}

bool finite(const StateField& u) { return u.q.allFinite(); }

// Output times for the run, always starting with t0 and ending with tf.
std::vector<double> output_times(const MacroConfig& c) {
  std::vector<double> out;
  if (!c.save_times.empty()) {
    out = c.save_times;
  } else if (c.dt) {
    const double every = *c.dt * c.save_every;
    const long frames = long(std::floor((c.tf - c.t0) / every + 1e-9));
    for (long j = 0; j <= frames; ++j) out.push_back(c.t0 + j * every);
    if (c.tf - out.back() > kTimeSlack * std::max(1.0, std::abs(c.tf))) out.push_back(c.tf);
    else out.back() = c.tf;
  } else {
    out = {c.t0, c.tf};
  }
  return out;
}

}  // namespace

void validate(const MacroConfig& c) {
  validate(c.kernel);
  if (!(c.tf > c.t0)) throw ConfigError("tf must exceed t0");
  if (c.dt && !(*c.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(c.cfl > 0.0 && c.cfl <= 1.0)) throw ConfigError("cfl must lie in (0, 1]");
  if (c.save_every < 1) throw ConfigError("save_every must be positive");
  if (c.threads < 1) throw ConfigError("threads must be positive");
  double prev = -INFINITY;
  for (double t : c.save_times) {
    if (t < c.t0 - kTimeSlack || t > c.tf + kTimeSlack) throw ConfigError("save time outside [t0, tf]");
    if (t <= prev) throw ConfigError("save times must be strictly increasing");
    prev = t;
  }
}

NonlocalOperator make_nonlocal_operator(const KernelSpec& kernel, const Grid& grid) {
  validate(kernel);
  if (const auto* sp = std::get_if<ScreenedPoisson1D>(&kernel)) {
    if (grid.dim() != 1) throw ConfigError("screened_poisson_1d needs a 1D grid");
    require_matching_width(sp->L, grid);
    auto solver = std::make_shared<ScreenedPoissonSolver>(grid, sp->k, sp->lambda);
    return [solver](const ScalarField& q) { return solver->apply(q); };
  }
  if (const auto* sp = std::get_if<ScreenedPoisson2DSeries>(&kernel)) {
    if (grid.dim() != 2) throw ConfigError("screened_poisson_2d needs a 2D grid");
    require_matching_width(sp->L, grid);
    auto solver = std::make_shared<ScreenedPoissonSolver>(grid, sp->k, sp->lambda);
    return [solver](const ScalarField& q) { return solver->apply(q); };
  }
  if (is_translation_invariant(kernel)) {
    auto conv = std::make_shared<FftConvolver>(sample_displacement_kernel(kernel, grid));
    return [conv](const ScalarField& q) { return conv->apply(q); };
  }
  throw ConfigError("kernel " + kernel_tag(kernel) + " has no macro solver path");
}

AuxFields auxiliary_fields(const StateField& u, const NonlocalOperator& op) {
  AuxFields aux{op(u.rho_field()), {}};
  for (int a = 0; a < u.grid.dim(); ++a) aux.y.push_back(op(u.momentum_field(a)));
  return aux;
}

StateField alignment_source(const StateField& u, const AuxFields& aux) {
  StateField s = StateField::zeros(u.grid);
  for (int a = 0; a < u.grid.dim(); ++a)
    s.momentum(a) = u.rho().cwiseProduct(aux.y[a].values) - aux.z.values.cwiseProduct(u.momentum(a));
  return s;
}

Eigen::MatrixXd augmented_rhs(const StateField& u, const NonlocalOperator& op) {
  return semi_discrete_rhs(u, alignment_source(u, auxiliary_fields(u, op)));
}

Eigen::MatrixXd augmented_rhs(const StateField& u, double k, double lambda) {
  if (!(k > 0.0 && lambda > 0.0)) throw ConfigError("augmented_rhs: k and lambda must be positive");
  const ScreenedPoissonSolver solver(u.grid, k, lambda);
  return augmented_rhs(u, [&](const ScalarField& q) { return solver.apply(q); });
}

Eigen::MatrixXd integral_rhs(const StateField& u, const KernelSpec& kernel, int threads) {
  return augmented_rhs(u, [&](const ScalarField& q) { return convolve_direct(kernel, q, threads); });
}

Vector totals(const StateField& u) {
  return u.q.colwise().sum().transpose() * u.grid.cell_volume();
}

MacroRun simulate_macro_with(const MacroConfig& config, const StateField& init, const NonlocalOperator& op) {
  validate(config);
  require_same_grid(config.grid, init.grid, "simulate_macro");
  if (init.q.cols() != 1 + config.grid.dim()) throw ConfigError("initial state has the wrong number of components");
  if ((init.rho().array() < 0.0).any()) throw ConfigError("initial density must be nonnegative");

  const auto rhs = [&](const StateField& s) { return augmented_rhs(s, op); };
  const std::vector<double> targets = output_times(config);
  const bool save_by_count = config.save_times.empty() && !config.dt;

  MacroRun run;
  run.report.momentum_drift.assign(config.grid.dim(), 0.0);
  const Vector start = totals(init);

  StateField u = init;
  double t = config.t0;
  auto save = [&] {
    run.series.times.push_back(t);
    run.series.states.push_back(u);
  };
  std::size_t next = 0;
  while (next < targets.size() && targets[next] <= t + kTimeSlack) {
    save();
    ++next;
  }

  long since_save = 0;
  while (next < targets.size()) {
    const double target = targets[next];
    double h;
    if (config.dt) {
      const long sub = std::max(1L, long(std::ceil((target - t) / *config.dt - 1e-9)));
      h = (target - t) / sub;
      if (h > cfl_dt(u, 1.0) * (1 + 1e-12)) ++run.report.cfl_violations;
    } else {
      h = std::min(cfl_dt(u, config.cfl), target - t);
    }
    u = step_time(u, rhs, h);
    ++run.report.steps;
    ++since_save;
    const bool landed = target - (t + h) <= kTimeSlack * std::max(1.0, std::abs(target));
    t = landed ? target : t + h;

    if (!finite(u)) {
      run.series.aborted_at = t;
      return run;
    }
    const Vector now = totals(u);
    run.report.mass_drift = std::max(run.report.mass_drift, std::abs(now[0] - start[0]));
    for (int a = 0; a < config.grid.dim(); ++a)
      run.report.momentum_drift[a] = std::max(run.report.momentum_drift[a], std::abs(now[1 + a] - start[1 + a]));

    if (landed) {
      save();
      ++next;
      since_save = 0;
    } else if (save_by_count && since_save == config.save_every) {
      save();
      since_save = 0;
    }
  }
  return run;
}

MacroRun simulate_macro(const MacroConfig& config, const StateField& init) {
  return simulate_macro_with(config, init, make_nonlocal_operator(config.kernel, config.grid));
}

MacroRun simulate_macro_general_kernel(const MacroConfig& config, const StateField& init) {
  if (!is_translation_invariant(config.kernel))
    throw ConfigError("simulate_macro_general_kernel needs a translation-invariant kernel");
  auto conv = std::make_shared<FftConvolver>(sample_displacement_kernel(config.kernel, config.grid));
  return simulate_macro_with(config, init, [conv](const ScalarField& q) { return conv->apply(q); });
}

double initial_density_1d(double x, double L) {
  if (std::abs(x) > L / 2) return 0.0;
  return std::numbers::pi / (2 * L) * std::cos(std::numbers::pi * x / L);
}

double initial_velocity_1d(double x, double L) {
  if (std::abs(x) > L / 2) return 0.0;
  return -std::sin(std::numbers::pi * x / L);
}

StateField initial_conditions_1d(const Grid& grid) {
  if (grid.dim() != 1) throw ConfigError("initial_conditions_1d needs a 1D grid");
  const double L = grid.domain.width();
  StateField u = StateField::zeros(grid);
  for (int i = 0; i < grid.cells; ++i) {
    const double x = grid.center(i);
    u.q(i, 0) = initial_density_1d(x, L);
    u.q(i, 1) = u.q(i, 0) * initial_velocity_1d(x, L);
  }
  return u;
}

StateField initial_conditions_2d(const Grid& grid) {
  if (grid.dim() != 2) throw ConfigError("initial_conditions_2d needs a 2D grid");
  const double L = grid.domain.width();
  const double w = std::numbers::pi / L;
  StateField u = StateField::zeros(grid);
  for (int ix = 0; ix < grid.cells; ++ix) {
    for (int iy = 0; iy < grid.cells; ++iy) {
      const double x = grid.center(ix), y = grid.center(iy);
      const Eigen::Index c = grid.flat(ix, iy);
      const double rho = w * w / 4 * std::cos(w * x) * std::cos(w * y);
      u.q(c, 0) = rho;
      u.q(c, 1) = -0.25 * rho * std::sin(w * x);
      u.q(c, 2) = -0.25 * rho * std::sin(w * y);
    }
  }
  return u;
}

}  // namespace swarmflow
