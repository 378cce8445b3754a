#include "swarmflow/learning.hpp"

#include "swarmflow/errors.hpp"
#include "swarmflow/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace swarmflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Theta steps_for(const Theta& theta, double fd_step) {
  return {fd_step * std::max(std::abs(theta[0]), 1.0), fd_step * std::max(std::abs(theta[1]), 1.0)};
}

// Evaluates f at every point in parallel; each slot is written by one worker only.
std::vector<double> evaluate_all(const Objective& f, const std::vector<Theta>& points, int threads) {
  std::vector<double> out(points.size());
  parallel_for(std::ptrdiff_t(points.size()), threads, [&](std::ptrdiff_t i) { out[i] = f(points[i]); });
  return out;
}

struct Derivatives {
  Theta gradient;
  Eigen::Matrix2d hessian;
};

// Central gradient and Hessian from the 8 neighbours of theta.
Derivatives fd_derivatives(const Objective& f, const Theta& theta, double f0, double fd_step, int threads) {
  const Theta h = steps_for(theta, fd_step);
  const Theta e0(h[0], 0.0), e1(0.0, h[1]);
  const std::vector<Theta> pts{theta + e0, theta - e0, theta + e1, theta - e1,
                               theta + e0 + e1, theta + e0 - e1, theta - e0 + e1, theta - e0 - e1};
  const std::vector<double> v = evaluate_all(f, pts, threads);
  Derivatives d;
  d.gradient << (v[0] - v[1]) / (2 * h[0]), (v[2] - v[3]) / (2 * h[1]);
  d.hessian(0, 0) = (v[0] - 2 * f0 + v[1]) / (h[0] * h[0]);
  d.hessian(1, 1) = (v[2] - 2 * f0 + v[3]) / (h[1] * h[1]);
  d.hessian(0, 1) = d.hessian(1, 0) = (v[4] - v[5] - v[6] + v[7]) / (4 * h[0] * h[1]);
  return d;
}

// 1D Gaussian transfer matrix from source cell j to observed cell c, boundary cells absorbing
// the tails. Each source cell is averaged over a few interior points.
Eigen::MatrixXd noise_transfer(const Grid& g, double sigma2) {
  const int n = g.cells;
  const double s = std::sqrt(sigma2);
  const double half = g.domain.half_width;
  auto cdf = [&](double z) { return 0.5 * std::erfc(-z / (s * std::sqrt(2.0))); };
  constexpr int kSub = 8;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int p = 0; p < kSub; ++p) {
      const double x = -half + (j + (p + 0.5) / kSub) * g.dx;
      for (int c = 0; c < n; ++c) {
        const double lo = c == 0 ? 0.0 : cdf(-half + c * g.dx - x);
        const double hi = c == n - 1 ? 1.0 : cdf(-half + (c + 1) * g.dx - x);
        t(c, j) += (hi - lo) / kSub;
      }
    }
  }
  return t;
}

}  // namespace

double kl_divergence(std::span<const double> p, std::span<const double> q, double cell_volume) {
  if (p.size() != q.size()) throw ConfigError("kl_divergence: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > kSupportFloor)) continue;
    acc += p[i] * std::log2(p[i] / std::max(q[i], kQFloor));
  }
  return acc * cell_volume;
}

double kl_divergence(const ScalarField& p, const ScalarField& q) {
  require_same_grid(p.grid, q.grid, "kl_divergence");
  return kl_divergence(std::span<const double>(p.values.data(), p.values.size()),
                       std::span<const double>(q.values.data(), q.values.size()), p.grid.cell_volume());
}

void validate(const LearnConfig& c) {
  if (!(c.theta0.array() > 0.0).all()) throw ConfigError("theta0 must be componentwise positive");
  if (!(c.fd_step > 0.0 && c.fd_step <= 1e-2)) throw ConfigError("fd_step must lie in (0, 1e-2]");
  if (c.max_iters < 0) throw ConfigError("max_iters must be >= 0");
  if (!(c.hessian_floor > 0.0)) throw ConfigError("hessian_floor must be positive");
  if (!(c.noise_sigma2 >= 0.0)) throw ConfigError("noise_sigma2 must be >= 0");
  if (c.observations.size() == 0) throw ConfigError("observations are empty");
  for (const auto& s : c.observations.states) require_same_grid(s.grid, c.forward.grid, "observations");
  if (c.initial_state) require_same_grid(c.initial_state->grid, c.forward.grid, "initial_state");
}

KernelSpec kernel_for(const Theta& theta, const Grid& grid) {
  if (grid.dim() == 1) return ScreenedPoisson1D{theta[0], theta[1], grid.domain.width()};
  return ScreenedPoisson2DSeries{theta[0], theta[1], grid.domain.width(), 256};
}

ScalarField observe_with_noise(const ScalarField& rho, double sigma2) {
  if (!(sigma2 >= 0.0)) throw ConfigError("noise variance must be >= 0");
  if (sigma2 == 0.0) return rho;
  const Grid& g = rho.grid;
  const Eigen::MatrixXd t = noise_transfer(g, sigma2);
  ScalarField out{g, Vector()};
  if (g.dim() == 1) {
    out.values = t * rho.values;
  } else {
    // Separable noise: apply the transfer along x and along y of the (x, y) matrix.
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> r(
        rho.values.data(), g.cells, g.cells);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> o = t * r * t.transpose();
    out.values = Eigen::Map<const Vector>(o.data(), o.size());
  }
  return out;
}

MacroRun forward_run(const Theta& theta, const LearnConfig& config) {
  MacroConfig fwd = config.forward;
  fwd.kernel = kernel_for(theta, fwd.grid);
  fwd.t0 = config.observations.times.front();
  fwd.tf = config.observations.times.back();
  fwd.save_times = config.observations.times;
  fwd.threads = 1;
  const StateField& init = config.initial_state ? *config.initial_state : config.observations.states.front();
  return simulate_macro(fwd, init);
}

std::vector<double> per_frame_kl(const Theta& theta, const LearnConfig& config) {
  const MacroRun run = forward_run(theta, config);
  std::vector<double> out(config.observations.size(), kInf);
  for (std::size_t f = 0; f < run.series.size(); ++f) {
    const ScalarField sim = observe_with_noise(run.series.states[f].rho_field(), config.noise_sigma2);
    out[f] = kl_divergence(config.observations.states[f].rho_field(), sim);
  }
  return out;
}

double objective(const Theta& theta, const LearnConfig& config) {
  if (!theta.allFinite() || !(theta.array() > 0.0).all()) return kInf;
  double acc = 0.0;
  for (double v : per_frame_kl(theta, config)) acc += v;
  return std::isfinite(acc) ? acc : kInf;
}

Objective make_objective(const LearnConfig& config) {
  return [&config](const Theta& theta) { return objective(theta, config); };
}

Theta fd_gradient(const Objective& f, const Theta& theta, double fd_step) {
  const Theta h = steps_for(theta, fd_step);
  return {(f(theta + Theta(h[0], 0)) - f(theta - Theta(h[0], 0))) / (2 * h[0]),
          (f(theta + Theta(0, h[1])) - f(theta - Theta(0, h[1]))) / (2 * h[1])};
}

Eigen::Matrix2d fd_hessian(const Objective& f, const Theta& theta, double fd_step) {
  return fd_derivatives(f, theta, f(theta), fd_step, 1).hessian;
}

Lanczos lanczos(const Eigen::MatrixXd& a, const Vector& start, int steps) {
  const Eigen::Index n = a.rows();
  steps = std::min<int>(steps, int(n));
  Lanczos out{Eigen::MatrixXd(n, steps), Vector(steps), Vector(std::max(steps - 1, 0))};
  Vector q = start / start.norm();
  int m = 0;
  for (; m < steps; ++m) {
    out.basis.col(m) = q;
    Vector w = a * q;
    out.alpha[m] = q.dot(w);
    // Full reorthogonalisation against every previous vector, applied twice.
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j <= m; ++j) w -= out.basis.col(j).dot(w) * out.basis.col(j);
    if (m + 1 == steps) break;
    const double b = w.norm();
    if (b <= 1e-14 * std::max(1.0, a.norm())) {
      ++m;
      break;
    }
    out.beta[m] = b;
    q = w / b;
  }
  const int kept = std::min(m + 1, steps);
  out.basis.conservativeResize(n, kept);
  out.alpha.conservativeResize(kept);
  out.beta.conservativeResize(std::max(kept - 1, 0));
  return out;
}

Eigen::MatrixXd psd_project(const Eigen::MatrixXd& h, double floor_rel) {
  const Eigen::Index n = h.rows();
  const Eigen::MatrixXd sym = 0.5 * (h + h.transpose());
  Eigen::MatrixXd basis(n, 0);
  Eigen::MatrixXd t(0, 0);
  // Restart with a fresh unit vector whenever a Krylov space closes early.
  for (Eigen::Index seed = 0; basis.cols() < n && seed < n; ++seed) {
    Vector start = Vector::Ones(n);
    if (basis.cols() > 0) {
      start = Vector::Unit(n, seed);
      start -= basis * (basis.transpose() * start);
      if (start.norm() < 1e-8) continue;
    }
    const Lanczos l = lanczos(sym, start, int(n - basis.cols()));
    const Eigen::Index old = basis.cols(), add = l.alpha.size();
    basis.conservativeResize(n, old + add);
    basis.rightCols(add) = l.basis;
    Eigen::MatrixXd tt = Eigen::MatrixXd::Zero(old + add, old + add);
    tt.topLeftCorner(old, old) = t;
    for (Eigen::Index i = 0; i < add; ++i) {
      tt(old + i, old + i) = l.alpha[i];
      if (i + 1 < add) tt(old + i, old + i + 1) = tt(old + i + 1, old + i) = l.beta[i];
    }
    t = tt;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t);
  Vector lam = eig.eigenvalues();
  const double floor = std::max(floor_rel * lam.cwiseAbs().sum(), 1e-12);
  lam = lam.cwiseMax(floor);
  const Eigen::MatrixXd v = basis * eig.eigenvectors();
  Eigen::MatrixXd out = v * lam.asDiagonal() * v.transpose();
  return 0.5 * (out + out.transpose());
}

Eigen::Matrix2d psd_hessian(const Objective& f, const Theta& theta, double fd_step, double floor_rel) {
  return psd_project(fd_hessian(f, theta, fd_step), floor_rel);
}

LearnState newton_learn(const Objective& f, const LearnConfig& o) {
  if (!(o.theta0.array() > 0.0).all()) throw ConfigError("theta0 must be componentwise positive");
  LearnState s;
  s.theta = o.theta0;
  s.objective = f(s.theta);
  ++s.evaluations;
  s.history.emplace_back(s.theta, s.objective);
  if (!std::isfinite(s.objective)) {
    s.status = "forward model blew up at theta0";
    return s;
  }
  s.status = "max_iters";
  for (s.iteration = 0; s.iteration < o.max_iters;) {
    const Derivatives d = fd_derivatives(f, s.theta, s.objective, o.fd_step, o.threads);
    s.evaluations += 8;
    if (!d.gradient.allFinite() || !d.hessian.allFinite()) {
      s.status = "stalled";
      break;
    }
    s.gradient = d.gradient;
    Theta g = d.gradient;
    Eigen::Matrix2d h = d.hessian;
    if (o.log_space) {
      // eta = log(theta): g_eta = theta * g, H_eta = D H D + diag(theta * g).
      const Eigen::Matrix2d dm = s.theta.asDiagonal();
      h = dm * h * dm;
      h.diagonal() += s.theta.cwiseProduct(g);
      g = s.theta.cwiseProduct(g);
    }
    s.hessian_psd = psd_project(h, o.hessian_floor);
    if (d.gradient.norm() <= o.grad_tol) {
      s.status = "converged";
      break;
    }
    Theta dir = -s.hessian_psd.llt().solve(g);
    // A clipped eigenvalue can make the full step arbitrarily long; bound it before backtracking.
    if (o.log_space && dir.cwiseAbs().maxCoeff() > o.max_log_step) dir *= o.max_log_step / dir.cwiseAbs().maxCoeff();
    double alpha = 1.0;
    bool accepted = false;
    Theta trial;
    double value = kInf;
    for (int b = 0; b <= o.max_backtracks; ++b, alpha *= 0.5) {
      trial = o.log_space ? Theta((s.theta.array().log() + alpha * dir.array()).exp()) : Theta(s.theta + alpha * dir);
      value = f(trial);
      ++s.evaluations;
      if (value < s.objective) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      s.status = "stalled";
      break;
    }
    const double step = o.log_space ? (trial.array().log() - s.theta.array().log()).matrix().norm()
                                    : (trial - s.theta).norm() / std::max(1.0, s.theta.norm());
    s.theta = trial;
    s.objective = value;
    ++s.iteration;
    s.history.emplace_back(s.theta, s.objective);
    if (step < o.step_tol) {
      s.status = "step_tol";
      break;
    }
  }
  return s;
}

LearnState newton_learn(const LearnConfig& config) {
  validate(config);
  return newton_learn(make_objective(config), config);
}

LearnState newton_learn_multistart(const LearnConfig& config, int starts) {
  validate(config);
  const std::array<Theta, 3> scales{Theta(1, 1), Theta(4, 2), Theta(2, 4)};
  LearnState best;
  best.objective = kInf;
  for (int i = 0; i < std::clamp(starts, 1, 3); ++i) {
    LearnConfig c = config;
    c.theta0 = config.theta0.cwiseProduct(scales[i]);
    LearnState s = newton_learn(make_objective(c), c);
    if (i == 0 || s.objective < best.objective) best = std::move(s);
  }
  return best;
}

FitReport fit_report(const LearnState& state, const LearnConfig& config, const std::optional<KernelSpec>& reference) {
  FitReport r;
  for (const auto& [theta, value] : state.history) r.objective_log2.push_back(std::log2(value));
  const Grid& g = config.forward.grid;
  r.profile_x = g.centers();
  const Eigen::Index n = r.profile_x.size();
  const KernelSpec fitted = kernel_for(state.theta, g);
  auto sample = [&](const KernelSpec& k) {
    Vector out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (g.dim() == 1) {
        out[i] = kernel_value(k, 0.0, r.profile_x[i]);
      } else {
        const Point2 x(0.0, 0.0), s(r.profile_x[i], 0.0);
        out[i] = (x - s).norm() < kSingularityTolerance ? std::nan("") : kernel_value(k, x, s);
      }
    }
    return out;
  };
  r.fitted_profile = sample(fitted);
  if (reference) r.reference_profile = sample(*reference);
  r.frame_times = config.observations.times;
  r.frame_kl = per_frame_kl(state.theta, config);
  return r;
}

}  // namespace swarmflow
