#pragma once

#include "swarmflow/domain.hpp"
#include "swarmflow/kernels.hpp"
#include "swarmflow/parallel.hpp"

#include <complex>
#include <type_traits>
#include <vector>

namespace swarmflow {

/// Sine coefficients of a cell-centred field. Entry n-1 (1D) or (n-1)*Ns + (m-1) (2D)
/// holds harmonic n (resp. (n, m)).
struct SineSpectrum {
  Grid grid;
  Vector coefficients;
};

/// DST-II of the cell values (unnormalised).
SineSpectrum dst_forward(const ScalarField& f);

/// DST-III scaled by 1/(2Ns) per axis, so that dst_backward(dst_forward(f)) == f.
ScalarField dst_backward(const SineSpectrum& c);

/// How the spectral solve scales the sine coefficients of q.
enum class EllipticMultiplier {
  /// 2k / (mu_n + lambda^2) with the continuous Dirichlet eigenvalues mu_n = (n pi / L)^2.
  kContinuous,
  /// Alias-summed multiplier: the exact sine-diagonalisation of the midpoint-rule integral
  /// transform with the closed-form 1D Green's function. 1D only.
  kMidpointQuadrature,
};

/// kMidpointQuadrature on the line, kContinuous in the plane.
EllipticMultiplier default_multiplier(int dim);

/// Solves -(1/2k)(Laplacian - lambda^2) phi = q with homogeneous Dirichlet data on the grid.
/// Coefficients are precomputed once; apply() can be called from several threads.
class ScreenedPoissonSolver {
 public:
  ScreenedPoissonSolver(const Grid& grid, double k, double lambda);
  ScreenedPoissonSolver(const Grid& grid, double k, double lambda, EllipticMultiplier multiplier);

  ScalarField apply(const ScalarField& q) const;
  const Vector& multipliers() const { return multipliers_; }
  const Grid& grid() const { return grid_; }

 private:
  Grid grid_;
  Vector multipliers_;
};

ScalarField solve_screened_poisson(const ScalarField& q, double k, double lambda);
ScalarField solve_screened_poisson(const ScalarField& q, double k, double lambda, EllipticMultiplier multiplier);

/// Midpoint-rule integral transform sum_j psi(x_i, x_j) q_j dx^d for an arbitrary kernel
/// callable. psi takes (double, double) in 1D and (Point2, Point2) in 2D. With skip_self the
/// j == i term is dropped (singular kernels).
template <class Psi>
ScalarField convolve_direct_with(Psi&& psi, const ScalarField& q, bool skip_self = false, int threads = 1) {
  const Grid& g = q.grid;
  ScalarField out = ScalarField::zeros(g);
  const double vol = g.cell_volume();
  if constexpr (std::is_invocable_v<Psi&, double, double>) {
    if (g.dim() != 1) throw ConfigError("convolve_direct_with: 1D kernel on a 2D grid");
    const Vector x = g.centers();
    parallel_for(g.cells, threads, [&](std::ptrdiff_t i) {
      double acc = 0.0;
      for (int j = 0; j < g.cells; ++j) {
        if (skip_self && j == i) continue;
        acc += psi(x[i], x[j]) * q.values[j];
      }
      out.values[i] = acc * vol;
    });
  } else {
    if (g.dim() != 2) throw ConfigError("convolve_direct_with: 2D kernel on a 1D grid");
    const Vector c = g.centers();
    const Eigen::Index n = g.size();
    parallel_for(n, threads, [&](std::ptrdiff_t a) {
      const Point2 xa(c[a / g.cells], c[a % g.cells]);
      double acc = 0.0;
      for (Eigen::Index b = 0; b < n; ++b) {
        if (skip_self && b == a) continue;
        acc += psi(xa, Point2(c[b / g.cells], c[b % g.cells])) * q.values[b];
      }
      out.values[a] = acc * vol;
    });
  }
  return out;
}

/// Midpoint-rule integral transform with a KernelSpec. Singular 2D kernels skip the self cell.
ScalarField convolve_direct(const KernelSpec& kernel, const ScalarField& q, int threads = 1);

/// Samples of a translation-invariant kernel psi(x - s) on every displacement of a grid:
/// offsets -(Ns-1)..(Ns-1) per axis, stored offset-major (2D row-major, y fastest).
struct DisplacementKernel {
  Grid grid;
  Vector samples;

  int width() const { return 2 * grid.cells - 1; }
};

DisplacementKernel sample_displacement_kernel(const KernelSpec& kernel, const Grid& grid);

/// Linear (non-circular) convolution via zero-padded real FFTs; the kernel transform is cached.
class FftConvolver {
 public:
  explicit FftConvolver(const DisplacementKernel& kernel);

  /// sum_j psi(x_i - x_j) q_j dx^d restricted to the original grid. Throws ConfigError on a
  /// grid mismatch.
  ScalarField apply(const ScalarField& q) const;
  int padded_size() const { return padded_; }

 private:
  Grid grid_;
  int padded_ = 0;
  std::vector<std::complex<double>> kernel_hat_;
};

ScalarField convolve_fft(const DisplacementKernel& kernel, const ScalarField& q);

/// Tabulated Dirichlet sine-series kernel on a square grid,
///   G(x, s) = (4/L^2) sum_{n,m<=T} w_n w_m M_nm sin_n(x1') sin_n(s1') sin_m(x2') sin_m(s2'),
/// evaluated at cell-centre pairs through a product-to-sum table of size (2Ns)^2.
///
/// With unit weights, T = truncation and M_nm = 2k/(mu_nm + lambda^2) this is the pointwise
/// Green's function of the square. With the solver's multipliers, T = Ns and w_Ns = 1/2 it is
/// the exact kernel of ScreenedPoissonSolver, i.e. its direct-summation counterpart.
class DirichletSeriesKernel2D {
 public:
  DirichletSeriesKernel2D(const Grid& grid, const Eigen::MatrixXd& multipliers, const Vector& weights);

  static DirichletSeriesKernel2D from_series(const Grid& grid, const ScreenedPoisson2DSeries& spec);
  static DirichletSeriesKernel2D from_solver(const ScreenedPoissonSolver& solver);

  /// Kernel value between flat cell indices a (target) and b (source).
  double operator()(Eigen::Index a, Eigen::Index b) const;
  const Grid& grid() const { return grid_; }

 private:
  Grid grid_;
  int span_ = 0;
  Eigen::MatrixXd h_;
};

/// sum_b G(a, b) q_b dx^2 over all cells, optionally without the self cell.
ScalarField convolve_direct(const DirichletSeriesKernel2D& kernel, const ScalarField& q, bool skip_self,
                            int threads = 1);

}  // namespace swarmflow
