#include "swarmflow/spectral.hpp"

#include "swarmflow/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace swarmflow {

namespace {

// FFTW planning is not thread-safe; execution with the new-array API is. Plans are created
// once per (kind, shape) with FFTW_UNALIGNED so they can run on any buffer.
enum class PlanKind { kDst2, kDst3, kR2C, kC2R };

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(PlanKind kind, int n0, int n1) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(kind, n0, n1);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    const std::size_t real_len = std::size_t(n0) * (n1 > 0 ? n1 : 1);
    const std::size_t cplx_len = n1 > 0 ? std::size_t(n0) * (n1 / 2 + 1) : std::size_t(n0 / 2 + 1);
    double* r = fftw_alloc_real(real_len);
    fftw_complex* c = fftw_alloc_complex(cplx_len);
    fftw_plan plan = nullptr;
    switch (kind) {
      case PlanKind::kDst2:
        plan = n1 > 0 ? fftw_plan_r2r_2d(n0, n1, r, r, FFTW_RODFT10, FFTW_RODFT10, flags)
                      : fftw_plan_r2r_1d(n0, r, r, FFTW_RODFT10, flags);
        break;
      case PlanKind::kDst3:
        plan = n1 > 0 ? fftw_plan_r2r_2d(n0, n1, r, r, FFTW_RODFT01, FFTW_RODFT01, flags)
                      : fftw_plan_r2r_1d(n0, r, r, FFTW_RODFT01, flags);
        break;
      case PlanKind::kR2C:
        plan = n1 > 0 ? fftw_plan_dft_r2c_2d(n0, n1, r, c, flags) : fftw_plan_dft_r2c_1d(n0, r, c, flags);
        break;
      case PlanKind::kC2R:
        plan = n1 > 0 ? fftw_plan_dft_c2r_2d(n0, n1, c, r, flags) : fftw_plan_dft_c2r_1d(n0, c, r, flags);
        break;
    }
    fftw_free(r);
    fftw_free(c);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::tuple<PlanKind, int, int>, fftw_plan> plans_;
};

int second_extent(const Grid& g) { return g.dim() == 2 ? g.cells : 0; }

Vector r2r(PlanKind kind, const Grid& g, const Vector& in) {
  Vector out = in;
  fftw_execute_r2r(PlanCache::instance().get(kind, g.cells, second_extent(g)), out.data(), out.data());
  return out;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

// sinh(z)/z without cancellation near 0.
double sinhc(double z) {
  if (std::abs(z) < 1e-4) return 1.0 + z * z / 6.0;
  return std::sinh(z) / z;
}

// Closed-form lattice sum  sum_{m in Z} 2k / (((n + 2mN) pi / L)^2 + lambda^2)
//   = k dx sinh(lambda dx) / (lambda (cosh(lambda dx) - cos(n pi / N)))
// with cosh(a) - cos(b) = 2 sinh^2(a/2) + 2 sin^2(b/2) to avoid cancellation.
double midpoint_multiplier(double k, double lambda, double dx, int n, int cells) {
  const double sh = std::sinh(0.5 * lambda * dx);
  const double sn = std::sin(0.5 * std::numbers::pi * n / cells);
  return k * dx * dx * sinhc(lambda * dx) / (2.0 * sh * sh + 2.0 * sn * sn);
}

}  // namespace

SineSpectrum dst_forward(const ScalarField& f) { return {f.grid, r2r(PlanKind::kDst2, f.grid, f.values)}; }

ScalarField dst_backward(const SineSpectrum& c) {
  Vector v = r2r(PlanKind::kDst3, c.grid, c.coefficients);
  const double per_axis = 2.0 * c.grid.cells;
  v /= c.grid.dim() == 1 ? per_axis : per_axis * per_axis;
  return {c.grid, std::move(v)};
}

EllipticMultiplier default_multiplier(int dim) {
  return dim == 1 ? EllipticMultiplier::kMidpointQuadrature : EllipticMultiplier::kContinuous;
}

ScreenedPoissonSolver::ScreenedPoissonSolver(const Grid& grid, double k, double lambda)
    : ScreenedPoissonSolver(grid, k, lambda, default_multiplier(grid.dim())) {}

ScreenedPoissonSolver::ScreenedPoissonSolver(const Grid& grid, double k, double lambda,
                                             EllipticMultiplier multiplier)
    : grid_(grid), multipliers_(grid.size()) {
  if (!(k > 0.0)) throw ConfigError("screened Poisson solve needs k > 0");
  if (!std::isfinite(lambda)) throw ConfigError("screened Poisson solve needs finite lambda");
  const int ns = grid.cells;
  const double w = std::numbers::pi / grid.domain.width();
  const double lam2 = lambda * lambda;
  if (grid.dim() == 1) {
    for (int n = 1; n <= ns; ++n) {
      multipliers_[n - 1] = multiplier == EllipticMultiplier::kContinuous
                                ? 2.0 * k / ((n * w) * (n * w) + lam2)
                                : midpoint_multiplier(k, std::abs(lambda), grid.dx, n, ns);
    }
    return;
  }
  if (multiplier == EllipticMultiplier::kMidpointQuadrature)
    throw ConfigError("midpoint-quadrature multiplier is only defined in 1D (the 2D kernel is singular)");
  for (int n = 1; n <= ns; ++n)
    for (int m = 1; m <= ns; ++m)
      multipliers_[grid.flat(n - 1, m - 1)] = 2.0 * k / ((n * w) * (n * w) + (m * w) * (m * w) + lam2);
}

ScalarField ScreenedPoissonSolver::apply(const ScalarField& q) const {
  require_same_grid(q.grid, grid_, "screened Poisson solve");
  SineSpectrum c = dst_forward(q);
  c.coefficients.array() *= multipliers_.array();
  return dst_backward(c);
}

ScalarField solve_screened_poisson(const ScalarField& q, double k, double lambda) {
  return ScreenedPoissonSolver(q.grid, k, lambda).apply(q);
}

ScalarField solve_screened_poisson(const ScalarField& q, double k, double lambda, EllipticMultiplier multiplier) {
  return ScreenedPoissonSolver(q.grid, k, lambda, multiplier).apply(q);
}

ScalarField convolve_direct(const KernelSpec& kernel, const ScalarField& q, int threads) {
  validate(kernel);
  const Grid& g = q.grid;
  if (g.dim() == 1) {
    if (const auto* sp = std::get_if<ScreenedPoisson1D>(&kernel); sp && sp->lambda * sp->L < 600.0) {
      // Printed sinh form, with the per-point factors hoisted out of the double loop.
      const double half = sp->L / 2.0;
      const double kk = -(sp->k / sp->lambda) / (2.0 * std::sinh(sp->lambda * sp->L));
      const Vector x = g.centers();
      Vector sp_(g.cells), sm_(g.cells);
      for (int i = 0; i < g.cells; ++i) {
        if (std::abs(x[i]) > half * (1 + 1e-12)) throw DomainError("convolve_direct: grid exceeds kernel domain");
        sp_[i] = 2.0 * std::sinh(sp->lambda * (x[i] + half));
        sm_[i] = 2.0 * std::sinh(sp->lambda * (x[i] - half));
      }
      ScalarField out = ScalarField::zeros(g);
      parallel_for(g.cells, threads, [&](std::ptrdiff_t i) {
        double below = 0.0, above = 0.0;
        for (std::ptrdiff_t j = 0; j <= i; ++j) below += sp_[j] * q.values[j];
        for (std::ptrdiff_t j = i + 1; j < g.cells; ++j) above += sm_[j] * q.values[j];
        out.values[i] = kk * (sm_[i] * below + sp_[i] * above) * g.dx;
      });
      return out;
    }
    return convolve_direct_with([&](double x, double s) { return kernel_value(kernel, x, s); }, q, false, threads);
  }
  if (const auto* series = std::get_if<ScreenedPoisson2DSeries>(&kernel)) {
    return convolve_direct(DirichletSeriesKernel2D::from_series(g, *series), q, true, threads);
  }
  const bool singular = std::holds_alternative<RadialBessel>(kernel);
  return convolve_direct_with([&](const Point2& x, const Point2& s) { return kernel_value(kernel, x, s); }, q,
                              singular, threads);
}

DisplacementKernel sample_displacement_kernel(const KernelSpec& kernel, const Grid& grid) {
  if (!is_translation_invariant(kernel))
    throw ConfigError("FFT convolution needs a translation-invariant kernel, got " + kernel_tag(kernel));
  validate(kernel);
  const int w = 2 * grid.cells - 1;
  const int off = grid.cells - 1;
  DisplacementKernel out{grid, Vector(grid.dim() == 1 ? w : w * w)};
  if (grid.dim() == 1) {
    for (int a = 0; a < w; ++a) out.samples[a] = kernel_value(kernel, (a - off) * grid.dx, 0.0);
  } else {
    for (int a = 0; a < w; ++a)
      for (int b = 0; b < w; ++b)
        out.samples[a * w + b] = kernel_value(kernel, Point2((a - off) * grid.dx, (b - off) * grid.dx), Point2(0, 0));
  }
  return out;
}

namespace {

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

FftConvolver::FftConvolver(const DisplacementKernel& kernel) : grid_(kernel.grid) {
  const int ns = grid_.cells;
  const int w = kernel.width();
  const Eigen::Index expected = grid_.dim() == 1 ? w : Eigen::Index(w) * w;
  if (kernel.samples.size() != expected) throw ConfigError("displacement kernel has the wrong number of samples");
  padded_ = next_pow2(2 * ns - 1);
  const int p = padded_;
  const int off = ns - 1;
  // Offset a lands at index a mod P; P >= 2Ns-1 keeps wrapped tails out of the cropped window.
  auto wrap = [p](int a) { return a < 0 ? a + p : a; };
  if (grid_.dim() == 1) {
    std::vector<double> buf(p, 0.0);
    for (int a = -off; a <= off; ++a) buf[wrap(a)] = kernel.samples[a + off];
    kernel_hat_.resize(p / 2 + 1);
    fftw_execute_dft_r2c(PlanCache::instance().get(PlanKind::kR2C, p, 0), buf.data(), as_fftw(kernel_hat_.data()));
  } else {
    std::vector<double> buf(std::size_t(p) * p, 0.0);
    for (int a = -off; a <= off; ++a)
      for (int b = -off; b <= off; ++b)
        buf[std::size_t(wrap(a)) * p + wrap(b)] = kernel.samples[(a + off) * w + (b + off)];
    kernel_hat_.resize(std::size_t(p) * (p / 2 + 1));
    fftw_execute_dft_r2c(PlanCache::instance().get(PlanKind::kR2C, p, p), buf.data(), as_fftw(kernel_hat_.data()));
  }
}

ScalarField FftConvolver::apply(const ScalarField& q) const {
  if (!(q.grid == grid_)) throw ConfigError("convolve_fft: field and kernel sampled on different grids");
  const int ns = grid_.cells;
  const int p = padded_;
  ScalarField out = ScalarField::zeros(grid_);
  if (grid_.dim() == 1) {
    std::vector<double> buf(p, 0.0);
    for (int i = 0; i < ns; ++i) buf[i] = q.values[i];
    std::vector<std::complex<double>> hat(p / 2 + 1);
    fftw_execute_dft_r2c(PlanCache::instance().get(PlanKind::kR2C, p, 0), buf.data(), as_fftw(hat.data()));
    for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= kernel_hat_[i];
    fftw_execute_dft_c2r(PlanCache::instance().get(PlanKind::kC2R, p, 0), as_fftw(hat.data()), buf.data());
    const double scale = grid_.dx / p;
    for (int i = 0; i < ns; ++i) out.values[i] = buf[i] * scale;
  } else {
    std::vector<double> buf(std::size_t(p) * p, 0.0);
    for (int i = 0; i < ns; ++i)
      for (int j = 0; j < ns; ++j) buf[std::size_t(i) * p + j] = q.values[grid_.flat(i, j)];
    std::vector<std::complex<double>> hat(std::size_t(p) * (p / 2 + 1));
    fftw_execute_dft_r2c(PlanCache::instance().get(PlanKind::kR2C, p, p), buf.data(), as_fftw(hat.data()));
    for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= kernel_hat_[i];
    fftw_execute_dft_c2r(PlanCache::instance().get(PlanKind::kC2R, p, p), as_fftw(hat.data()), buf.data());
    const double scale = grid_.cell_volume() / (double(p) * p);
    for (int i = 0; i < ns; ++i)
      for (int j = 0; j < ns; ++j) out.values[grid_.flat(i, j)] = buf[std::size_t(i) * p + j] * scale;
  }
  return out;
}

ScalarField convolve_fft(const DisplacementKernel& kernel, const ScalarField& q) {
  return FftConvolver(kernel).apply(q);
}

DirichletSeriesKernel2D::DirichletSeriesKernel2D(const Grid& grid, const Eigen::MatrixXd& multipliers,
                                                 const Vector& weights)
    : grid_(grid), span_(2 * grid.cells) {
  if (grid.dim() != 2) throw ConfigError("DirichletSeriesKernel2D needs a 2D grid");
  const Eigen::Index t = multipliers.rows();
  if (multipliers.cols() != t || weights.size() != t) throw ConfigError("series multipliers must be square");
  // cos(n pi a dx / L) = cos(n pi a / Ns) for lattice offsets a = 0 .. 2Ns-1.
  Eigen::MatrixXd c(t, span_);
  for (Eigen::Index n = 0; n < t; ++n)
    for (int a = 0; a < span_; ++a) c(n, a) = weights[n] * std::cos(std::numbers::pi * double(n + 1) * a / grid.cells);
  h_ = c.transpose() * multipliers * c;
  h_ /= grid.domain.width() * grid.domain.width();
}

DirichletSeriesKernel2D DirichletSeriesKernel2D::from_series(const Grid& grid, const ScreenedPoisson2DSeries& spec) {
  if (std::abs(spec.L - grid.domain.width()) > 1e-12 * spec.L)
    throw ConfigError("series kernel L does not match the grid domain");
  const int t = spec.truncation;
  const double w = std::numbers::pi / spec.L;
  Eigen::MatrixXd m(t, t);
  for (int n = 1; n <= t; ++n)
    for (int k = 1; k <= t; ++k) m(n - 1, k - 1) = 2.0 * spec.k / ((n * w) * (n * w) + (k * w) * (k * w) + spec.lambda * spec.lambda);
  return DirichletSeriesKernel2D(grid, m, Vector::Ones(t));
}

DirichletSeriesKernel2D DirichletSeriesKernel2D::from_solver(const ScreenedPoissonSolver& solver) {
  const Grid& g = solver.grid();
  const int ns = g.cells;
  Eigen::MatrixXd m(ns, ns);
  for (int n = 0; n < ns; ++n)
    for (int k = 0; k < ns; ++k) m(n, k) = solver.multipliers()[g.flat(n, k)];
  // DST-III gives the last harmonic half weight.
  Vector w = Vector::Ones(ns);
  w[ns - 1] = 0.5;
  return DirichletSeriesKernel2D(g, m, w);
}

double DirichletSeriesKernel2D::operator()(Eigen::Index a, Eigen::Index b) const {
  const int ns = grid_.cells;
  const int i = int(a / ns), j = int(a % ns);
  const int k = int(b / ns), l = int(b % ns);
  const int d1 = std::abs(i - k), e1 = i + k + 1;
  const int d2 = std::abs(j - l), e2 = j + l + 1;
  return h_(d1, d2) - h_(d1, e2) - h_(e1, d2) + h_(e1, e2);
}

ScalarField convolve_direct(const DirichletSeriesKernel2D& kernel, const ScalarField& q, bool skip_self, int threads) {
  require_same_grid(q.grid, kernel.grid(), "convolve_direct");
  const Eigen::Index n = q.grid.size();
  const double vol = q.grid.cell_volume();
  ScalarField out = ScalarField::zeros(q.grid);
  parallel_for(n, threads, [&](std::ptrdiff_t a) {
    double acc = 0.0;
    for (Eigen::Index b = 0; b < n; ++b) {
      if (skip_self && b == a) continue;
      acc += kernel(a, b) * q.values[b];
    }
    out.values[a] = acc * vol;
  });
  return out;
}

}  // namespace swarmflow
