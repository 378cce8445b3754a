// swarmflow command-line driver. Every subcommand reads one JSON config; flags override
// seed, output directory and thread count. Exit codes: 0 ok, 2 config error, 3 runtime abort.

#include "swarmflow/bench.hpp"
#include "swarmflow/errors.hpp"
#include "swarmflow/io.hpp"
#include "swarmflow/learning.hpp"
#include "swarmflow/macro.hpp"
#include "swarmflow/micro.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace swarmflow;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  int threads = 1;
};

struct Loaded {
  json j;
  std::uint64_t seed = 0;
  fs::path out_dir = ".";
  int threads = 1;
};

Loaded load(const Common& c) {
  std::ifstream in(c.config);
  if (!in) throw ConfigError("cannot open config " + c.config);
  Loaded l;
  try {
    l.j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!l.j.is_object()) throw ConfigError("config must be a JSON object");
  if (l.j.contains("seed")) l.seed = l.j.at("seed").get<std::uint64_t>();
  if (l.j.contains("out_dir")) l.out_dir = l.j.at("out_dir").get<std::string>();
  if (c.seed) l.seed = *c.seed;
  if (c.out) l.out_dir = *c.out;
  if (c.threads < 1) throw ConfigError("--threads must be positive");
  l.threads = c.threads;
  fs::create_directories(l.out_dir);
  return l;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

Grid grid_from(const json& j) {
  const int dim = get_or(j, "dim", 1);
  const double L = get_or(j, "L", 2.0 * std::numbers::pi);
  return make_grid(make_domain(dim, L / 2), get_or(j, "cells", dim == 1 ? 101 : 64));
}

KernelSpec kernel_or_default(const json& j, const Grid& g) {
  if (j.contains("kernel")) return kernel_from_json(j.at("kernel"));
  if (g.dim() == 1) return ScreenedPoisson1D{4.0, 1.0, g.domain.width()};
  return ScreenedPoisson2DSeries{4.0, 1.0, g.domain.width()};
}

StateField reference_initial_state(const Grid& g) {
  return g.dim() == 1 ? initial_conditions_1d(g) : initial_conditions_2d(g);
}

int cmd_simulate_micro(const Common& c) {
  const Loaded l = load(c);
  const json& j = l.j;
  require_keys(j,
               {"dim", "L", "cells", "particles", "dt", "tf", "save_every", "kernel", "noise_sigma2",
                "write_trajectory", "seed", "out_dir"},
               "simulate-micro");
  const Grid g = grid_from(j);
  const long n = get_or(j, "particles", 20000L);
  if (n < 1) throw ConfigError("particles must be positive");
  MicroConfig mc;
  mc.kernel = kernel_or_default(j, g);
  mc.dt = get_or(j, "dt", 0.01);
  mc.tf = get_or(j, "tf", 2.0);
  mc.save_every = get_or(j, "save_every", 10);
  mc.threads = l.threads;
  const double sigma2 = get_or(j, "noise_sigma2", 0.0);
  if (!(sigma2 >= 0.0)) throw ConfigError("noise_sigma2 must be >= 0");

  const double L = g.domain.width();
  ParticleEnsemble e;
  if (g.dim() == 1) {
    e = sample_from_density(
        g.domain, [L](double x) { return initial_density_1d(x, L); }, [L](double x) { return initial_velocity_1d(x, L); },
        n, l.seed);
  } else {
    const double w = std::numbers::pi / L;
    e = sample_from_density(
        g.domain, [w](double x) { return std::cos(w * x); }, [w](double y) { return std::cos(w * y); },
        [w](const Point2& p) { return Point2(-0.25 * std::sin(w * p.x()), -0.25 * std::sin(w * p.y())); }, n, l.seed);
  }
  e = to_fluctuation_frame(e);
  const MicroRun run = simulate_micro(mc, e);

  DensitySeries obs;
  for (std::size_t f = 0; f < run.frames.size(); ++f) {
    const ParticleEnsemble seen = add_observation_noise(run.frames[f], sigma2, l.seed + 1 + f);
    obs.times.push_back(run.times[f]);
    obs.states.push_back(empirical_state(seen, g));
  }
  auto dens = open_out(l.out_dir / "density.csv");
  write_series_csv(dens, obs);
  if (get_or(j, "write_trajectory", true)) {
    auto traj = open_out(l.out_dir / "trajectory.csv");
    write_trajectory_csv(traj, run);
  }
  auto diag = open_out(l.out_dir / "flocking.json");
  diag << to_json(flocking_diagnostics(run, mc.kernel)).dump(2) << '\n';
  return 0;
}

int cmd_simulate_macro(const Common& c) {
  const Loaded l = load(c);
  const json& j = l.j;
  require_keys(j, {"dim", "L", "cells", "kernel", "t0", "tf", "dt", "cfl", "save_every", "save_times", "seed", "out_dir"},
               "simulate-macro");
  const Grid g = grid_from(j);
  MacroConfig mc{g};
  mc.kernel = kernel_or_default(j, g);
  mc.t0 = get_or(j, "t0", 0.0);
  mc.tf = get_or(j, "tf", 2.0);
  if (j.contains("dt")) mc.dt = j.at("dt").get<double>();
  mc.cfl = get_or(j, "cfl", kDefaultCfl);
  mc.save_every = get_or(j, "save_every", 10);
  if (j.contains("save_times")) mc.save_times = j.at("save_times").get<std::vector<double>>();
  mc.threads = l.threads;
  const MacroRun run = simulate_macro(mc, reference_initial_state(g));
  auto dens = open_out(l.out_dir / "density.csv");
  write_series_csv(dens, run.series);
  json report = to_json(run.report);
  report["path"] = is_translation_invariant(mc.kernel) ? "fft_convolution" : "spectral";
  if (run.series.aborted_at) report["aborted_at"] = *run.series.aborted_at;
  auto rep = open_out(l.out_dir / "conservation.json");
  rep << report.dump(2) << '\n';
  if (run.series.aborted_at) {
    std::cerr << "simulate-macro: non-finite state at t = " << *run.series.aborted_at << '\n';
    return 3;
  }
  return 0;
}

int cmd_learn(const Common& c) {
  const Loaded l = load(c);
  const json& j = l.j;
  require_keys(j,
               {"observations", "theta0", "fd_step", "max_iters", "grad_tol", "step_tol", "hessian_floor", "multistart",
                "noise_sigma2", "initial_state", "dt", "cfl", "reference_kernel", "seed", "out_dir"},
               "learn");
  if (!j.contains("observations")) throw ConfigError("learn: missing 'observations'");
  const std::string path = j.at("observations");
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open observations " + path);
  LearnConfig lc;
  lc.observations = read_series_csv(in);
  lc.forward.grid = lc.observations.grid();
  if (j.contains("dt")) lc.forward.dt = j.at("dt").get<double>();
  lc.forward.cfl = get_or(j, "cfl", kDefaultCfl);
  if (j.contains("theta0")) {
    const auto t = j.at("theta0").get<std::vector<double>>();
    if (t.size() != 2) throw ConfigError("theta0 must have two entries");
    lc.theta0 = Theta(t[0], t[1]);
  }
  lc.fd_step = get_or(j, "fd_step", lc.fd_step);
  lc.max_iters = get_or(j, "max_iters", lc.max_iters);
  lc.grad_tol = get_or(j, "grad_tol", lc.grad_tol);
  lc.step_tol = get_or(j, "step_tol", lc.step_tol);
  lc.hessian_floor = get_or(j, "hessian_floor", lc.hessian_floor);
  lc.noise_sigma2 = get_or(j, "noise_sigma2", 0.0);
  lc.threads = l.threads;
  const std::string init = get_or<std::string>(j, "initial_state", "observed");
  if (init == "analytic") lc.initial_state = reference_initial_state(lc.forward.grid);
  else if (init != "observed") throw ConfigError("initial_state must be 'observed' or 'analytic'");
  std::optional<KernelSpec> reference;
  if (j.contains("reference_kernel")) reference = kernel_from_json(j.at("reference_kernel"));

  const int starts = get_or(j, "multistart", 1);
  const LearnState state = starts > 1 ? newton_learn_multistart(lc, starts) : newton_learn(lc);
  const FitReport report = fit_report(state, lc, reference);
  auto fit = open_out(l.out_dir / "fit.json");
  fit << fit_json(state, report).dump(2) << '\n';
  auto tr = open_out(l.out_dir / "training_error.csv");
  write_training_error_csv(tr, report);
  auto prof = open_out(l.out_dir / "kernel_profile.csv");
  write_kernel_profile_csv(prof, report);
  std::cout << "theta = (" << format_real(state.theta[0]) << ", " << format_real(state.theta[1]) << "), "
            << state.iteration << " iterations, status " << state.status << '\n';
  return 0;
}

int cmd_bench(const Common& c) {
  const Loaded l = load(c);
  const json& j = l.j;
  require_keys(j, {"dims", "methods", "cells_1d", "cells_2d", "repeats", "seed", "out_dir"}, "bench");
  BenchOptions o;
  o.dims = get_or(j, "dims", o.dims);
  o.methods = get_or(j, "methods", o.methods);
  o.cells_1d = get_or(j, "cells_1d", o.cells_1d);
  o.cells_2d = get_or(j, "cells_2d", o.cells_2d);
  o.repeats = get_or(j, "repeats", o.repeats);
  o.threads = l.threads;
  o.seed = l.seed;
  const auto results = run_bench(o);
  auto csv = open_out(l.out_dir / "bench.csv");
  write_bench_csv(csv, results);
  for (int dim : o.dims) {
    bool both = false;
    for (const auto& m : o.methods) both |= m == "spectral";
    if (both) std::cout << crossover_report(results, dim).describe() << '\n';
  }
  return 0;
}

int cmd_kernel_eval(const Common& c) {
  const Loaded l = load(c);
  const json& j = l.j;
  require_keys(j, {"dim", "L", "cells", "kernel", "x_fixed", "seed", "out_dir"}, "kernel-eval");
  const Grid g = grid_from(j);
  const KernelSpec k = kernel_or_default(j, g);
  const json xs = get_or(j, "x_fixed", json::array({0.0}));
  if (!xs.is_array()) throw ConfigError("x_fixed must be an array");
  const Vector centres = g.centers();
  auto os = open_out(l.out_dir / "kernel_samples.csv");
  long singular = 0;
  auto value = [&](auto&& eval) {
    try {
      return format_real(eval());
    } catch (const SingularityError&) {
      ++singular;
      return std::string("nan");
    }
  };
  if (g.dim() == 1) {
    os << "x_fixed,s,psi\n";
    for (const auto& xj : xs) {
      const double x = xj.get<double>();
      for (int i = 0; i < g.cells; ++i)
        os << format_real(x) << ',' << format_real(centres[i]) << ','
           << value([&] { return kernel_value(k, x, centres[i]); }) << '\n';
    }
  } else {
    os << "x_fixed,y_fixed,s_x,s_y,psi\n";
    for (const auto& xj : xs) {
      const auto p = xj.get<std::vector<double>>();
      if (p.size() != 2) throw ConfigError("2D x_fixed entries must be [x, y] pairs");
      const Point2 x(p[0], p[1]);
      for (int a = 0; a < g.cells; ++a)
        for (int b = 0; b < g.cells; ++b) {
          const Point2 s(centres[a], centres[b]);
          os << format_real(x.x()) << ',' << format_real(x.y()) << ',' << format_real(s.x()) << ','
             << format_real(s.y()) << ',' << value([&] { return kernel_value(k, x, s); }) << '\n';
        }
    }
  }
  if (singular) std::cerr << "kernel-eval: " << singular << " singular sample(s) written as nan\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cucker-Smale swarm simulation and interaction-kernel learning"};
  app.require_subcommand(1);
  Common common;
  std::function<int(const Common&)> action;

  auto add = [&](const char* name, const char* help, int (*fn)(const Common&)) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", common.config, "JSON config file")->required();
    sub->add_option("--seed", common.seed, "RNG seed (overrides config)");
    sub->add_option("--out", common.out, "Output directory (overrides config)");
    sub->add_option("--threads", common.threads, "Worker threads for parallel loops");
    sub->callback([&action, fn] { action = fn; });
  };
  add("simulate-micro", "Particle simulation and empirical densities", cmd_simulate_micro);
  add("simulate-macro", "Hydrodynamic simulation with conservation report", cmd_simulate_macro);
  add("learn", "Fit (k, lambda) to an observed density series", cmd_learn);
  add("bench", "Time direct and spectral evaluation of the non-local term", cmd_bench);
  add("kernel-eval", "Sample psi(x_fixed, .) on a grid", cmd_kernel_eval);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return action(common);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const BlowUpError& e) {
    std::cerr << "aborted at t = " << e.time() << ": " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 3;
  }
}
