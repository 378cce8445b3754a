#include "swarmflow/micro.hpp"

#include "swarmflow/errors.hpp"
#include "swarmflow/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace swarmflow {

namespace {

// Largest lambda * L for which the sinh factors of the separable form stay representable.
constexpr double kSeparableLimit = 300.0;

void require_inside(const ParticleEnsemble& e, double L) {
  const double half = L / 2 * (1 + 1e-12);
  std::vector<Eigen::Index> bad;
  for (Eigen::Index i = 0; i < e.size(); ++i)
    if ((e.positions.row(i).array().abs() > half).any()) bad.push_back(i);
  if (bad.empty()) return;
  std::ostringstream msg;
  msg << bad.size() << " particle(s) outside D for a bounded-domain kernel, indices:";
  for (std::size_t j = 0; j < std::min<std::size_t>(bad.size(), 10); ++j) msg << ' ' << bad[j];
  if (bad.size() > 10) msg << " ...";
  throw DomainError(msg.str());
}

double bounded_width(const KernelSpec& kernel) {
  if (const auto* sp = std::get_if<ScreenedPoisson1D>(&kernel)) return sp->L;
  if (const auto* sp = std::get_if<ScreenedPoisson2DSeries>(&kernel)) return sp->L;
  return 0.0;
}

Eigen::MatrixXd separable_rhs(const ParticleEnsemble& e, const ScreenedPoisson1D& sp) {
  const Eigen::Index n = e.size();
  const double half = sp.L / 2;
  const double kk = -(sp.k / sp.lambda) / (2.0 * std::sinh(sp.lambda * sp.L));
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto& x = e.positions;
  const auto& v = e.velocities;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x(a, 0) < x(b, 0); });

  Vector sp_(n), sm_(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sp_[i] = 2.0 * std::sinh(sp.lambda * (x(i, 0) + half));
    sm_[i] = 2.0 * std::sinh(sp.lambda * (x(i, 0) - half));
  }
  // below_*: sum over ranks <= r of sigma_p w; above_*: sum over ranks > r of sigma_m w.
  Vector below_1(n), below_v(n), above_1(n), above_v(n);
  double b1 = 0.0, bv = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::Index j = order[r];
    b1 += sp_[j];
    bv += sp_[j] * v(j, 0);
    below_1[r] = b1;
    below_v[r] = bv;
  }
  double a1 = 0.0, av = 0.0;
  for (Eigen::Index r = n - 1; r >= 0; --r) {
    above_1[r] = a1;
    above_v[r] = av;
    const Eigen::Index j = order[r];
    a1 += sm_[j];
    av += sm_[j] * v(j, 0);
  }
  Eigen::MatrixXd acc(n, 1);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::Index i = order[r];
    const double s1 = kk * (sm_[i] * below_1[r] + sp_[i] * above_1[r]);
    const double sv = kk * (sm_[i] * below_v[r] + sp_[i] * above_v[r]);
    acc(i, 0) = (sv - v(i, 0) * s1) / double(n);
  }
  return acc;
}

// Inverse-CDF sampler for a nonnegative profile on [-h, h].
class InverseCdf {
 public:
  InverseCdf(const Profile1D& f, double h) : h_(h), cdf_(kIntervals + 1) {
    const double dz = 2 * h / kIntervals;
    double prev = f(-h);
    cdf_[0] = 0.0;
    for (int i = 1; i <= kIntervals; ++i) {
      const double cur = f(-h + i * dz);
      if (!(prev >= 0.0) || !(cur >= 0.0) || !std::isfinite(cur)) throw ConfigError("density must be finite and >= 0");
      cdf_[i] = cdf_[i - 1] + 0.5 * (prev + cur) * dz;
      prev = cur;
    }
    if (!(cdf_.back() > 0.0) || !std::isfinite(cdf_.back())) throw ConfigError("density is not normalisable");
  }

  double operator()(double u) const {
    const double target = u * cdf_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
    const int i = std::clamp(int(it - cdf_.begin()) - 1, 0, kIntervals - 1);
    const double span = cdf_[i + 1] - cdf_[i];
    const double frac = span > 0.0 ? (target - cdf_[i]) / span : 0.5;
    return -h_ + (i + std::clamp(frac, 0.0, 1.0)) * (2 * h_ / kIntervals);
  }

 private:
  static constexpr int kIntervals = 1 << 14;
  double h_;
  std::vector<double> cdf_;
};

int cell_index(double x, const Grid& g) {
  return std::clamp(int(std::floor((x + g.domain.half_width) / g.dx)), 0, g.cells - 1);
}

Eigen::Index cell_of(const ParticleEnsemble& e, Eigen::Index i, const Grid& g) {
  if (g.dim() == 1) return cell_index(e.positions(i, 0), g);
  return g.flat(cell_index(e.positions(i, 0), g), cell_index(e.positions(i, 1), g));
}

// Simpson's rule on [a, b] with an even number of panels.
template <class F>
double simpson(F&& f, double a, double b, int panels = 2000) {
  if (b <= a) return 0.0;
  const double h = (b - a) / panels;
  double acc = f(a) + f(b);
  for (int i = 1; i < panels; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

double kernel_lambda(const KernelSpec& kernel) {
  return std::visit(
      [](const auto& s) -> double {
        if constexpr (requires { s.lambda; }) return s.lambda;
        else return 1.0;
      },
      kernel);
}

}  // namespace

void validate(const ParticleEnsemble& e) {
  if (e.size() == 0) throw ConfigError("ensemble is empty");
  if (e.dim() < 1 || e.dim() > 2) throw ConfigError("ensemble dimension must be 1 or 2");
  if (e.velocities.rows() != e.size() || e.velocities.cols() != e.dim())
    throw ConfigError("positions and velocities differ in shape");
}

Eigen::MatrixXd cs_rhs_pairwise(const ParticleEnsemble& e, const KernelSpec& kernel, int threads) {
  validate(e);
  if (const double L = bounded_width(kernel); L > 0.0) require_inside(e, L);
  const Eigen::Index n = e.size();
  const int d = e.dim();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, d);
  parallel_for(n, threads, [&](std::ptrdiff_t i) {
    Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(d);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;  // v_i - v_i = 0, and some kernels are singular there
      const double w = d == 1 ? kernel_value(kernel, e.positions(j, 0), e.positions(i, 0))
                              : kernel_value(kernel, Point2(e.positions.row(j).transpose()),
                                             Point2(e.positions.row(i).transpose()));
      sum += w * (e.velocities.row(j) - e.velocities.row(i));
    }
    acc.row(i) = sum / double(n);
  });
  return acc;
}

Eigen::MatrixXd cs_rhs(const ParticleEnsemble& e, const KernelSpec& kernel, int threads) {
  validate(e);
  if (const auto* sp = std::get_if<ScreenedPoisson1D>(&kernel);
      sp && e.dim() == 1 && sp->lambda * sp->L < kSeparableLimit) {
    validate(kernel);
    require_inside(e, sp->L);
    return separable_rhs(e, *sp);
  }
  return cs_rhs_pairwise(e, kernel, threads);
}

ParticleEnsemble verlet_step(const ParticleEnsemble& e, const KernelSpec& kernel, double dt, int threads) {
  if (!(dt > 0.0)) throw ConfigError("verlet_step: dt must be positive");
  ParticleEnsemble out = e;
  ParticleEnsemble probe = e;
  verlet_step(
      out.positions, out.velocities,
      [&](const Eigen::MatrixXd& x, const Eigen::MatrixXd& v) {
        probe.positions = x;
        probe.velocities = v;
        return cs_rhs(probe, kernel, threads);
      },
      dt);
  return out;
}

ParticleEnsemble to_fluctuation_frame(const ParticleEnsemble& e) {
  validate(e);
  if (e.in_fluctuation_frame) throw ConfigError("ensemble is already in the fluctuation frame");
  ParticleEnsemble out = e;
  out.xc0 = e.positions.colwise().mean().transpose();
  out.vc0 = e.velocities.colwise().mean().transpose();
  out.positions.rowwise() -= out.xc0.transpose();
  out.velocities.rowwise() -= out.vc0.transpose();
  out.in_fluctuation_frame = true;
  return out;
}

Eigen::MatrixXd lab_positions(const ParticleEnsemble& e, double t) {
  if (!e.in_fluctuation_frame) return e.positions;
  Eigen::MatrixXd x = e.positions;
  x.rowwise() += (e.xc0 + t * e.vc0).transpose();
  return x;
}

ParticleEnsemble sample_from_density(const Domain& domain, const Profile1D& rho0, const Profile1D& u0, long n,
                                     std::uint64_t seed) {
  if (domain.dim != 1) throw ConfigError("sample_from_density: 1D profile on a 2D domain");
  if (n < 1) throw ConfigError("particle count must be positive");
  const InverseCdf inv(rho0, domain.half_width);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  ParticleEnsemble e{Eigen::MatrixXd(n, 1), Eigen::MatrixXd(n, 1), false, Vector::Zero(1), Vector::Zero(1)};
  for (long i = 0; i < n; ++i) {
    e.positions(i, 0) = inv(unif(rng));
    e.velocities(i, 0) = u0(e.positions(i, 0));
  }
  return e;
}

ParticleEnsemble sample_from_density(const Domain& domain, const Profile1D& fx, const Profile1D& fy,
                                     const std::function<Point2(const Point2&)>& u0, long n, std::uint64_t seed) {
  if (domain.dim != 2) throw ConfigError("sample_from_density: separable profile needs a 2D domain");
  if (n < 1) throw ConfigError("particle count must be positive");
  const InverseCdf inv_x(fx, domain.half_width), inv_y(fy, domain.half_width);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  ParticleEnsemble e{Eigen::MatrixXd(n, 2), Eigen::MatrixXd(n, 2), false, Vector::Zero(2), Vector::Zero(2)};
  for (long i = 0; i < n; ++i) {
    const double x = inv_x(unif(rng));
    const double y = inv_y(unif(rng));
    e.positions.row(i) << x, y;
    e.velocities.row(i) = u0(Point2(x, y)).transpose();
  }
  return e;
}

ParticleEnsemble add_observation_noise(const ParticleEnsemble& e, double sigma2, std::uint64_t seed) {
  if (!(sigma2 >= 0.0)) throw ConfigError("noise variance must be >= 0");
  ParticleEnsemble out = e;
  if (sigma2 == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, std::sqrt(sigma2));
  for (Eigen::Index i = 0; i < out.size(); ++i)
    for (int a = 0; a < out.dim(); ++a) out.positions(i, a) += noise(rng);
  return out;
}

ScalarField empirical_density(const ParticleEnsemble& e, const Grid& grid) {
  validate(e);
  if (e.dim() != grid.dim()) throw ConfigError("empirical_density: dimension mismatch");
  ScalarField f = ScalarField::zeros(grid);
  for (Eigen::Index i = 0; i < e.size(); ++i) f.values[cell_of(e, i, grid)] += 1.0;
  f.values /= double(e.size()) * grid.cell_volume();
  return f;
}

StateField empirical_state(const ParticleEnsemble& e, const Grid& grid) {
  validate(e);
  if (e.dim() != grid.dim()) throw ConfigError("empirical_state: dimension mismatch");
  StateField u = StateField::zeros(grid);
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const Eigen::Index c = cell_of(e, i, grid);
    u.q(c, 0) += 1.0;
    for (int a = 0; a < e.dim(); ++a) u.q(c, 1 + a) += e.velocities(i, a);
  }
  u.q /= double(e.size()) * grid.cell_volume();
  return u;
}

MicroRun simulate_micro(const MicroConfig& config, const ParticleEnsemble& init) {
  validate(init);
  validate(config.kernel);
  if (!(config.dt > 0.0) || !(config.tf > 0.0)) throw ConfigError("dt and tf must be positive");
  if (config.save_every < 1) throw ConfigError("save_every must be positive");
  const long steps = std::lround(config.tf / config.dt);
  MicroRun run;
  ParticleEnsemble e = init;
  run.times.push_back(0.0);
  run.frames.push_back(e);
  for (long s = 1; s <= steps; ++s) {
    e = verlet_step(e, config.kernel, config.dt, config.threads);
    if (!e.positions.allFinite() || !e.velocities.allFinite())
      throw BlowUpError("particle state became non-finite", s * config.dt);
    if (s % config.save_every == 0 || s == steps) {
      run.times.push_back(s * config.dt);
      run.frames.push_back(e);
    }
  }
  return run;
}

double rms_norm(const Eigen::MatrixXd& rows) {
  if (rows.rows() == 0) return 0.0;
  return std::sqrt(rows.squaredNorm() / double(rows.rows()));
}

double max_pair_distance(const Eigen::MatrixXd& p) {
  if (p.rows() < 2) return 0.0;
  if (p.cols() == 1) return p.col(0).maxCoeff() - p.col(0).minCoeff();
  // Diameter of a planar set: brute force over the convex hull (monotone chain).
  std::vector<Point2> pts(p.rows());
  for (Eigen::Index i = 0; i < p.rows(); ++i) pts[i] = Point2(p(i, 0), p(i, 1));
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  auto cross = [](const Point2& o, const Point2& a, const Point2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& q : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], q) <= 0) --k;
    hull[k++] = q;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k);
  double best = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i)
    for (std::size_t j = i + 1; j < hull.size(); ++j) best = std::max(best, (hull[i] - hull[j]).norm());
  return best;
}

Theorem1Check check_theorem1(const ParticleEnsemble& initial, const KernelSpec& kernel) {
  Theorem1Check c;
  c.half_spread = 0.5 * max_pair_distance(initial.positions);
  c.position_rms = rms_norm(initial.positions);
  c.velocity_rms = rms_norm(initial.velocities);
  if (initial.dim() != 1) {
    c.note = "hypothesis check is implemented for d = 1 only";
    return c;
  }
  double L = bounded_width(kernel);
  if (L <= 0.0) {
    c.note = "kernel has no bounded domain; L/4 limit undefined";
    return c;
  }
  c.applicable = true;
  const double lam = kernel_lambda(kernel);
  c.note = "lambda in psi(-2 x_M, lambda s) is taken from the kernel";
  const auto phi = [&](double xm, double s) {
    const double arg = lam * s;
    if (std::abs(arg) > L / 2 || 2 * xm > L / 2) return 0.0;
    return kernel_value(kernel, -2 * xm, arg);
  };
  const double lo = std::max(c.half_spread, c.position_rms);
  const double hi = L / 4;
  if (!(lo < hi)) {
    c.note += "; no x_M: half spread or |x0| is not below L/4";
    return c;
  }
  double best_margin = -INFINITY;
  constexpr int kScan = 400;
  for (int i = 1; i < kScan; ++i) {
    const double xm = lo + (hi - lo) * i / kScan;
    const double integral = simpson([&](double s) { return phi(xm, s); }, c.position_rms, xm);
    if (integral - c.velocity_rms > best_margin) {
      best_margin = integral - c.velocity_rms;
      c.x_max = xm;
      c.integral = integral;
    }
  }
  c.spread_bound = c.x_max;
  if (!(best_margin > 0.0)) {
    c.note += "; velocity bound fails for every x_M in range";
    return c;
  }
  c.satisfied = true;
  // int_{|x0|}^{x_bar} phi = |v0| by bisection; the integral is nondecreasing in x_bar.
  double a = c.position_rms, b = c.x_max;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (a + b);
    const double val = simpson([&](double s) { return phi(c.x_max, s); }, c.position_rms, mid);
    (val < c.velocity_rms ? a : b) = mid;
  }
  c.x_bar = 0.5 * (a + b);
  c.phi_bar = phi(c.x_max, c.x_bar);
  return c;
}

FlockingReport flocking_diagnostics(const MicroRun& run, const KernelSpec& kernel) {
  FlockingReport r;
  if (run.frames.empty()) return r;
  for (std::size_t f = 0; f < run.frames.size(); ++f) {
    r.times.push_back(run.times[f]);
    r.velocity_fluctuation.push_back(rms_norm(run.frames[f].velocities));
    r.max_pair_distance.push_back(max_pair_distance(run.frames[f].positions));
    if (f > 0 && r.velocity_fluctuation[f] > r.velocity_fluctuation[f - 1] * (1 + 1e-12) + 1e-15) r.monotone = false;
  }
  r.theorem1 = check_theorem1(run.frames.front(), kernel);
  r.theorem1_satisfied = r.theorem1.satisfied;
  if (r.theorem1_satisfied) {
    r.decay_bound_respected = true;
    r.spread_bound_respected = true;
    const double v0 = r.velocity_fluctuation.front();
    for (std::size_t f = 0; f < r.times.size(); ++f) {
      const double t = r.times[f] - r.times.front();
      if (r.velocity_fluctuation[f] > v0 * std::exp(-r.theorem1.phi_bar * t) * (1 + 1e-9) + 1e-14)
        r.decay_bound_respected = false;
      const Eigen::MatrixXd& x = run.frames[f].positions;
      const double x_rms = rms_norm(x.rowwise() - x.colwise().mean());
      if (x_rms > r.theorem1.spread_bound * (1 + 1e-9)) r.spread_bound_respected = false;
    }
  }
  return r;
}

}  // namespace swarmflow
