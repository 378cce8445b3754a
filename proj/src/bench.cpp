#include "swarmflow/bench.hpp"

#include "swarmflow/errors.hpp"
#include "swarmflow/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace swarmflow {

namespace {

constexpr double kK = 4.0;
constexpr double kLambda = 1.0;
constexpr double kL = 2.0 * std::numbers::pi;

template <class F>
double median_seconds(F&& run, int repeats) {
  run();  // warm-up: FFTW plans, caches
  std::vector<double> t;
  for (int r = 0; r < repeats; ++r) {
    const auto a = std::chrono::steady_clock::now();
    run();
    const auto b = std::chrono::steady_clock::now();
    t.push_back(std::chrono::duration<double>(b - a).count());
  }
  std::sort(t.begin(), t.end());
  const std::size_t m = t.size() / 2;
  return t.size() % 2 ? t[m] : 0.5 * (t[m - 1] + t[m]);
}

double rel_linf(const Vector& a, const Vector& ref) {
  const double scale = ref.cwiseAbs().maxCoeff();
  return (a - ref).cwiseAbs().maxCoeff() / (scale > 0.0 ? scale : 1.0);
}

ScalarField random_field(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  ScalarField f = ScalarField::zeros(g);
  for (Eigen::Index i = 0; i < f.values.size(); ++i) f.values[i] = unif(rng);
  return f;
}

}  // namespace

std::vector<BenchResult> run_bench(const BenchOptions& o) {
  if (o.repeats < 5) throw ConfigError("bench needs at least 5 repeats");
  std::vector<BenchResult> out;
  for (int dim : o.dims) {
    if (dim != 1 && dim != 2) throw ConfigError("bench dimension must be 1 or 2");
    const auto& list = dim == 1 ? o.cells_1d : o.cells_2d;
    if (!std::is_sorted(list.begin(), list.end())) throw ConfigError("bench Ns list must be increasing");
    for (int ns : list) {
      const Grid g = make_grid(make_domain(dim, kL / 2), ns);
      const ScalarField q = random_field(g, o.seed + std::uint64_t(ns));
      const ScreenedPoissonSolver solver(g, kK, kLambda);
      std::optional<DirichletSeriesKernel2D> table;
      if (dim == 2) table.emplace(DirichletSeriesKernel2D::from_solver(solver));
      std::optional<FftConvolver> conv;

      std::map<std::string, std::function<ScalarField()>> runners;
      runners["direct"] = [&] {
        if (dim == 1) return convolve_direct(ScreenedPoisson1D{kK, kLambda, kL}, q, o.threads);
        return convolve_direct(*table, q, false, o.threads);
      };
      runners["spectral"] = [&] { return solve_screened_poisson(q, kK, kLambda); };
      runners["fft_conv"] = [&] {
        if (!conv) conv.emplace(sample_displacement_kernel(FreeSpaceExp{kK, kLambda}, g));
        return conv->apply(q);
      };

      const Vector reference = runners["direct"]().values;
      for (const auto& method : o.methods) {
        const auto it = runners.find(method);
        if (it == runners.end()) throw ConfigError("unknown bench method " + method);
        BenchResult r;
        r.dim = dim;
        r.method = method;
        r.cells = ns;
        r.threads = method == "direct" ? o.threads : 1;
        r.repeats = o.repeats;
        ScalarField last;
        r.seconds = median_seconds([&] { last = it->second(); }, o.repeats);
        // The free-space convolution solves a different problem; only the Dirichlet pair is compared.
        r.max_rel_diff = method == "fft_conv" ? 0.0 : rel_linf(last.values, reference);
        out.push_back(r);
      }
    }
  }
  return out;
}

double loglog_slope(const std::vector<BenchResult>& results, int dim, const std::string& method, int lo, int hi) {
  std::vector<double> xs, ys;
  for (const auto& r : results) {
    if (r.dim != dim || r.method != method || r.cells < lo || r.cells > hi) continue;
    xs.push_back(std::log(double(r.cells)));
    ys.push_back(std::log(r.seconds));
  }
  if (xs.size() < 2) throw ConfigError("loglog_slope needs at least two points");
  const double n = double(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Crossover crossover_report(const std::vector<BenchResult>& results, int dim) {
  std::map<int, double> direct, spectral;
  for (const auto& r : results) {
    if (r.dim != dim) continue;
    if (r.method == "direct") direct[r.cells] = r.seconds;
    if (r.method == "spectral") spectral[r.cells] = r.seconds;
  }
  Crossover c;
  c.dim = dim;
  bool first = true;
  for (const auto& [ns, td] : direct) {
    const auto it = spectral.find(ns);
    if (it == spectral.end()) continue;
    const double speedup = td / it->second;
    if (first) c.speedup_smallest = speedup;
    first = false;
    if (!c.cells && it->second < td) c.cells = ns;
    c.speedup_largest = speedup;
    c.largest_cells = ns;
  }
  if (first) throw ConfigError("crossover_report needs direct and spectral results");
  return c;
}

std::string Crossover::describe() const {
  std::ostringstream s;
  s << dim << "D: ";
  if (cells) s << "spectral faster from Ns = " << *cells;
  else s << "none within range";
  s << "; speedup " << speedup_largest << "x at Ns = " << largest_cells;
  return s.str();
}

}  // namespace swarmflow
