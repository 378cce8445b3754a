#include "swarmflow/io.hpp"

#include "swarmflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace swarmflow {

using nlohmann::json;

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

double parse_real(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ConfigError("trailing characters in number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("malformed number '" + s + "'");
  }
}

double get_positive(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("kernel: missing key '") + key + "'");
  if (!j.at(key).is_number()) throw ConfigError(std::string("kernel: '") + key + "' must be a number");
  return j.at(key).get<double>();
}

// Cell centres -> grid with the same centring convention as make_grid.
Grid grid_from_centres(std::vector<double> xs, int dim) {
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  if (xs.size() < 3) throw ConfigError("series needs at least 3 cells per axis");
  const double dx = (xs.back() - xs.front()) / double(xs.size() - 1);
  const double half = -xs.front() + dx / 2;
  if (std::abs(xs.back() - (half - dx / 2)) > 1e-9 * half) throw ConfigError("series grid is not centred on 0");
  const Grid g = make_grid(make_domain(dim, half), int(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (std::abs(xs[i] - g.center(int(i))) > 1e-9 * std::max(1.0, half))
      throw ConfigError("series cell centres are not uniform");
  return g;
}

}  // namespace

void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

void write_field_csv(std::ostream& os, const ScalarField& f) {
  const Grid& g = f.grid;
  if (g.dim() == 1) {
    os << "x,value\n";
    for (int i = 0; i < g.cells; ++i) os << format_real(g.center(i)) << ',' << format_real(f.values[i]) << '\n';
    return;
  }
  os << "x,y,value\n";
  for (int ix = 0; ix < g.cells; ++ix)
    for (int iy = 0; iy < g.cells; ++iy)
      os << format_real(g.center(ix)) << ',' << format_real(g.center(iy)) << ','
         << format_real(f.values[g.flat(ix, iy)]) << '\n';
}

void write_series_csv(std::ostream& os, const DensitySeries& s) {
  if (s.size() == 0) return;
  const Grid& g = s.grid();
  os << (g.dim() == 1 ? "t,x,rho,m\n" : "t,x,y,rho,m1,m2\n");
  for (std::size_t f = 0; f < s.size(); ++f) {
    const std::string t = format_real(s.times[f]);
    const auto& q = s.states[f].q;
    if (g.dim() == 1) {
      for (int i = 0; i < g.cells; ++i)
        os << t << ',' << format_real(g.center(i)) << ',' << format_real(q(i, 0)) << ',' << format_real(q(i, 1))
           << '\n';
    } else {
      for (int ix = 0; ix < g.cells; ++ix)
        for (int iy = 0; iy < g.cells; ++iy) {
          const Eigen::Index c = g.flat(ix, iy);
          os << t << ',' << format_real(g.center(ix)) << ',' << format_real(g.center(iy)) << ','
             << format_real(q(c, 0)) << ',' << format_real(q(c, 1)) << ',' << format_real(q(c, 2)) << '\n';
        }
    }
  }
  if (s.aborted_at) os << "# aborted_at," << format_real(*s.aborted_at) << '\n';
}

DensitySeries read_series_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("series CSV is empty");
  const auto header = split(line);
  int dim = 0;
  bool momentum = false;
  if (header == std::vector<std::string>{"t", "x", "rho", "m"}) dim = 1, momentum = true;
  else if (header == std::vector<std::string>{"t", "x", "rho"}) dim = 1;
  else if (header == std::vector<std::string>{"t", "x", "y", "rho", "m1", "m2"}) dim = 2, momentum = true;
  else if (header == std::vector<std::string>{"t", "x", "y", "rho"}) dim = 2;
  else throw ConfigError("unrecognised series CSV header: " + line);

  std::vector<std::vector<double>> rows;
  std::optional<double> aborted;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    if (line.rfind("# aborted_at,", 0) == 0) {
      aborted = parse_real(split(line)[1]);
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != header.size()) throw ConfigError("series CSV row has the wrong number of columns");
    std::vector<double> r;
    for (const auto& c : cells) r.push_back(parse_real(c));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ConfigError("series CSV has no data rows");

  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    xs.push_back(r[1]);
    if (dim == 2) ys.push_back(r[2]);
  }
  const Grid g = grid_from_centres(xs, dim);
  if (dim == 2) {
    const Grid gy = grid_from_centres(ys, 1);
    if (gy.cells != g.cells) throw ConfigError("series grid must be square");
  }
  const std::size_t per_frame = std::size_t(g.size());
  if (rows.size() % per_frame) throw ConfigError("series CSV has an incomplete frame");

  DensitySeries s;
  s.aborted_at = aborted;
  for (std::size_t f = 0; f < rows.size() / per_frame; ++f) {
    StateField u = StateField::zeros(g);
    const double t = rows[f * per_frame][0];
    for (std::size_t c = 0; c < per_frame; ++c) {
      const auto& r = rows[f * per_frame + c];
      if (r[0] != t) throw ConfigError("series CSV frame has mixed timestamps");
      const int col = dim == 1 ? 2 : 3;
      u.q(Eigen::Index(c), 0) = r[col];
      if (momentum)
        for (int a = 0; a < dim; ++a) u.q(Eigen::Index(c), 1 + a) = r[col + 1 + a];
    }
    if (!s.times.empty() && t <= s.times.back()) throw ConfigError("series timestamps must increase");
    s.times.push_back(t);
    s.states.push_back(std::move(u));
  }
  return s;
}

json to_json(const ConservationReport& r) {
  return {{"mass_drift", r.mass_drift},
          {"momentum_drift", r.momentum_drift},
          {"steps", r.steps},
          {"cfl_violations", r.cfl_violations}};
}

json to_json(const FlockingReport& r) {
  const auto& c = r.theorem1;
  return {{"times", r.times},
          {"velocity_fluctuation", r.velocity_fluctuation},
          {"max_pair_distance", r.max_pair_distance},
          {"monotone", r.monotone},
          {"theorem1_satisfied", r.theorem1_satisfied},
          {"decay_bound_respected", r.decay_bound_respected},
          {"spread_bound_respected", r.spread_bound_respected},
          {"theorem1",
           {{"applicable", c.applicable},
            {"half_spread", c.half_spread},
            {"position_rms", c.position_rms},
            {"velocity_rms", c.velocity_rms},
            {"x_max", c.x_max},
            {"integral", c.integral},
            {"x_bar", c.x_bar},
            {"phi_bar", c.phi_bar},
            {"spread_bound", c.spread_bound},
            {"note", c.note}}}};
}

json to_json(const KernelSpec& k) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ScreenedPoisson1D>)
          return {{"type", "screened_poisson_1d"}, {"k", s.k}, {"lambda", s.lambda}, {"L", s.L}};
        else if constexpr (std::is_same_v<T, FreeSpaceExp>)
          return {{"type", "free_space_exp"}, {"k", s.k}, {"lambda", s.lambda}};
        else if constexpr (std::is_same_v<T, CuckerSmale>)
          return {{"type", "cucker_smale"}, {"K", s.K}, {"gamma", s.gamma}};
        else if constexpr (std::is_same_v<T, ScreenedPoisson2DSeries>)
          return {{"type", "screened_poisson_2d"}, {"k", s.k}, {"lambda", s.lambda}, {"L", s.L},
                  {"truncation", s.truncation}};
        else
          return {{"type", "radial_bessel"}, {"k", s.k}, {"lambda", s.lambda}, {"d", s.d}, {"L", s.L}};
      },
      k);
}

KernelSpec kernel_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
    throw ConfigError("kernel: expected an object with a string 'type'");
  const std::string type = j.at("type");
  KernelSpec out;
  if (type == "screened_poisson_1d") {
    require_keys(j, {"type", "k", "lambda", "L"}, "kernel");
    out = ScreenedPoisson1D{get_positive(j, "k"), get_positive(j, "lambda"), get_positive(j, "L")};
  } else if (type == "free_space_exp") {
    require_keys(j, {"type", "k", "lambda"}, "kernel");
    out = FreeSpaceExp{get_positive(j, "k"), get_positive(j, "lambda")};
  } else if (type == "cucker_smale") {
    require_keys(j, {"type", "K", "gamma"}, "kernel");
    out = CuckerSmale{get_positive(j, "K"), get_positive(j, "gamma")};
  } else if (type == "screened_poisson_2d") {
    require_keys(j, {"type", "k", "lambda", "L", "truncation"}, "kernel");
    ScreenedPoisson2DSeries s{get_positive(j, "k"), get_positive(j, "lambda"), get_positive(j, "L")};
    if (j.contains("truncation")) {
      if (!j.at("truncation").is_number_integer()) throw ConfigError("kernel: 'truncation' must be an integer");
      s.truncation = j.at("truncation").get<int>();
    }
    out = s;
  } else if (type == "radial_bessel") {
    require_keys(j, {"type", "k", "lambda", "d", "L"}, "kernel");
    if (!j.contains("d") || !j.at("d").is_number_integer()) throw ConfigError("kernel: 'd' must be an integer");
    out = RadialBessel{get_positive(j, "k"), get_positive(j, "lambda"), j.at("d").get<int>(), get_positive(j, "L")};
  } else {
    throw ConfigError("kernel: unknown type '" + type + "'");
  }
  validate(out);
  return out;
}

void write_trajectory_csv(std::ostream& os, const MicroRun& run, bool lab_frame) {
  if (run.frames.empty()) return;
  const int d = run.frames.front().dim();
  os << (d == 1 ? "t,particle_id,x,vx\n" : "t,particle_id,x,y,vx,vy\n");
  for (std::size_t f = 0; f < run.frames.size(); ++f) {
    const auto& e = run.frames[f];
    const Eigen::MatrixXd x = lab_frame ? lab_positions(e, run.times[f]) : e.positions;
    Eigen::MatrixXd v = e.velocities;
    if (lab_frame && e.in_fluctuation_frame) v.rowwise() += e.vc0.transpose();
    const std::string t = format_real(run.times[f]);
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      os << t << ',' << i;
      for (int a = 0; a < d; ++a) os << ',' << format_real(x(i, a));
      for (int a = 0; a < d; ++a) os << ',' << format_real(v(i, a));
      os << '\n';
    }
  }
}

void write_bench_csv(std::ostream& os, const std::vector<BenchResult>& results) {
  os << "dim,method,Ns,threads,seconds_median,repeats\n";
  for (const auto& r : results)
    os << r.dim << ',' << r.method << ',' << r.cells << ',' << r.threads << ',' << format_real(r.seconds) << ','
       << r.repeats << '\n';
}

void write_training_error_csv(std::ostream& os, const FitReport& r) {
  os << "iter,objective_log2\n";
  for (std::size_t i = 0; i < r.objective_log2.size(); ++i) os << i << ',' << format_real(r.objective_log2[i]) << '\n';
}

void write_kernel_profile_csv(std::ostream& os, const FitReport& r) {
  os << (r.reference_profile ? "x,psi_fit,psi_ref\n" : "x,psi_fit\n");
  for (Eigen::Index i = 0; i < r.profile_x.size(); ++i) {
    os << format_real(r.profile_x[i]) << ',' << format_real(r.fitted_profile[i]);
    if (r.reference_profile) os << ',' << format_real((*r.reference_profile)[i]);
    os << '\n';
  }
}

json fit_json(const LearnState& s, const FitReport& r) {
  json frames = json::array();
  for (std::size_t f = 0; f < r.frame_times.size(); ++f) frames.push_back({{"t", r.frame_times[f]}, {"kl", r.frame_kl[f]}});
  return {{"k", s.theta[0]},
          {"lambda", s.theta[1]},
          {"iterations", s.iteration},
          {"objective", s.objective},
          {"initial_objective", s.history.empty() ? s.objective : s.history.front().second},
          {"status", s.status},
          {"evaluations", s.evaluations},
          {"gradient", {s.gradient[0], s.gradient[1]}},
          {"per_frame_kl", frames}};
}

}  // namespace swarmflow
