#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace swarmflow {

struct BenchResult {
  int dim = 1;
  std::string method;  // direct, spectral or fft_conv
  int cells = 0;
  int threads = 1;
  double seconds = 0.0;  // median over repeats
  int repeats = 0;
  /// Relative L-infinity gap to the direct result on the same input (0 for direct itself).
  double max_rel_diff = 0.0;
};

struct BenchOptions {
  std::vector<int> dims{1, 2};
  std::vector<std::string> methods{"direct", "spectral"};
  std::vector<int> cells_1d{16, 32, 64, 128, 256, 512, 1024, 2048, 4096, 8192};
  std::vector<int> cells_2d{4, 8, 16, 32, 64, 128};
  int repeats = 5;
  int threads = 1;
  std::uint64_t seed = 7;
};

/// Times every (dim, method, Ns) on a fixed random field after one warm-up run.
/// The direct 2D method is the exact quadrature counterpart of the spectral solver.
std::vector<BenchResult> run_bench(const BenchOptions& options);

/// Least-squares slope of log(seconds) against log(Ns) over results with Ns in [lo, hi].
double loglog_slope(const std::vector<BenchResult>& results, int dim, const std::string& method, int lo, int hi);

struct Crossover {
  int dim = 1;
  std::optional<int> cells;  // smallest Ns at which spectral beats direct
  double speedup_smallest = 0.0;
  double speedup_largest = 0.0;
  int largest_cells = 0;
  std::string describe() const;
};

Crossover crossover_report(const std::vector<BenchResult>& results, int dim);

}  // namespace swarmflow
