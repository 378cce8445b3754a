#include "swarmflow/errors.hpp"
#include "swarmflow/io.hpp"

#include <doctest.h>

#include <numbers>
#include <sstream>

using namespace swarmflow;
constexpr double kPi = std::numbers::pi;

TEST_CASE("series round trip") {
  for (int dim : {1, 2}) {
    const Grid g = make_grid(make_domain(dim, kPi), dim == 1 ? 101 : 16);
    DensitySeries s;
    s.times = {0.0, 0.1};
    const StateField u = dim == 1 ? initial_conditions_1d(g) : initial_conditions_2d(g);
    s.states = {u, StateField{g, 0.5 * u.q}};
    std::stringstream buf;
    write_series_csv(buf, s);
    const DensitySeries back = read_series_csv(buf);
    REQUIRE(back.size() == 2);
    CHECK(back.grid().cells == g.cells);
    CHECK(back.grid().dx == doctest::Approx(g.dx).epsilon(1e-14));
    CHECK(back.times == s.times);
    CHECK(back.states[1].q == s.states[1].q);
    CHECK_FALSE(back.aborted_at.has_value());
  }
}

TEST_CASE("aborted series keeps its marker") {
  const Grid g = make_grid(make_domain(1, kPi), 10);
  DensitySeries s;
  s.times = {0.0};
  s.states = {initial_conditions_1d(g)};
  s.aborted_at = 0.37;
  std::stringstream buf;
  write_series_csv(buf, s);
  CHECK(buf.str().find("aborted_at") != std::string::npos);
  const DensitySeries back = read_series_csv(buf);
  REQUIRE(back.aborted_at.has_value());
  CHECK(*back.aborted_at == 0.37);
}

TEST_CASE("density-only input") {
  std::stringstream buf("t,x,rho\n0,-1,0.25\n0,0,0.5\n0,1,0.25\n");
  const DensitySeries s = read_series_csv(buf);
  CHECK(s.grid().cells == 3);
  CHECK(s.states[0].q.col(1).cwiseAbs().maxCoeff() == 0.0);
  std::stringstream bad("t,x,rho\n0,-1\n");
  CHECK_THROWS_AS(read_series_csv(bad), ConfigError);
}

TEST_CASE("kernel json") {
  const KernelSpec k = kernel_from_json(nlohmann::json::parse(R"({"type": "cucker_smale", "K": 5, "gamma": 2})"));
  REQUIRE(std::holds_alternative<CuckerSmale>(k));
  CHECK(std::get<CuckerSmale>(k).K == 5.0);
  CHECK(kernel_from_json(to_json(KernelSpec(ScreenedPoisson1D{3.0, 0.5, 2.0}))) == KernelSpec(ScreenedPoisson1D{3.0, 0.5, 2.0}));
  CHECK_THROWS_AS(kernel_from_json(nlohmann::json::parse(R"({"type": "cucker_smale", "K": 5, "gama": 2})")), ConfigError);
  CHECK_THROWS_AS(kernel_from_json(nlohmann::json::parse(R"({"type": "screened_poisson_1d", "k": -1, "lambda": 1})")), ConfigError);
  CHECK_THROWS_AS(kernel_from_json(nlohmann::json::parse(R"({"type": "nope"})")), ConfigError);
}

TEST_CASE("number formatting") {
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_real(2.0) == "2");
  CHECK(std::stod(format_real(kPi)) == kPi);
}
