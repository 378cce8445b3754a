#include "swarmflow/bench.hpp"
#include "swarmflow/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace swarmflow;

TEST_CASE("slope of synthetic timings") {
  std::vector<BenchResult> r;
  for (int n : {16, 32, 64, 128}) {
    r.push_back({1, "direct", n, 1, 1e-9 * n * n, 5, 0.0});
    r.push_back({1, "spectral", n, 1, 1e-6 * n * std::log2(n), 5, 0.0});
  }
  CHECK(loglog_slope(r, 1, "direct", 16, 128) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(loglog_slope(r, 1, "direct", 32, 64) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(loglog_slope(r, 2, "direct", 16, 128), ConfigError);

  const Crossover c = crossover_report(r, 1);
  // direct < spectral until 1e-9 n^2 > 1e-6 n log2 n, which first happens beyond 128.
  CHECK_FALSE(c.cells.has_value());
  r.push_back({1, "direct", 16384, 1, 1e-9 * 16384.0 * 16384.0, 5, 0.0});
  r.push_back({1, "spectral", 16384, 1, 1e-6 * 16384 * 14, 5, 0.0});
  const Crossover c2 = crossover_report(r, 1);
  REQUIRE(c2.cells.has_value());
  CHECK(*c2.cells == 16384);
  CHECK(c2.describe().find("16384") != std::string::npos);
}

TEST_CASE("small benchmark run") {
  BenchOptions o;
  o.cells_1d = {16, 32};
  o.cells_2d = {4, 8};
  const auto r = run_bench(o);
  CHECK(r.size() == 8);
  for (const auto& b : r) {
    CHECK(b.seconds > 0.0);
    CHECK(b.max_rel_diff <= 1e-10);
  }
  o.repeats = 2;
  CHECK_THROWS_AS(run_bench(o), ConfigError);
}
