#pragma once

#include "swarmflow/bench.hpp"
#include "swarmflow/kernels.hpp"
#include "swarmflow/learning.hpp"
#include "swarmflow/macro.hpp"
#include "swarmflow/micro.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace swarmflow {

/// 17 significant digits, "nan"/"inf" for non-finite values.
std::string format_real(double v);

/// `x,value` or `x,y,value`, one row per cell.
void write_field_csv(std::ostream& os, const ScalarField& f);

/// `t,x,rho,m` or `t,x,y,rho,m1,m2`; frames ordered by t, cells by flat index.
void write_series_csv(std::ostream& os, const DensitySeries& s);

/// Reads the format above. The momentum columns may be absent (filled with zeros).
/// The grid is reconstructed from the cell centres. Throws ConfigError on malformed input.
DensitySeries read_series_csv(std::istream& is);

nlohmann::json to_json(const ConservationReport& r);
nlohmann::json to_json(const FlockingReport& r);
nlohmann::json to_json(const KernelSpec& k);

/// Strict: unknown or missing keys and non-positive scales raise ConfigError.
KernelSpec kernel_from_json(const nlohmann::json& j);

/// `t,particle_id,x(,y),vx(,vy)` in lab-frame positions when the ensemble carries a frame.
void write_trajectory_csv(std::ostream& os, const MicroRun& run, bool lab_frame = false);

/// `dim,method,Ns,threads,seconds_median,repeats`.
void write_bench_csv(std::ostream& os, const std::vector<BenchResult>& results);

/// `iter,objective_log2`.
void write_training_error_csv(std::ostream& os, const FitReport& r);

/// `x,psi_fit(,psi_ref)` for psi(0, x).
void write_kernel_profile_csv(std::ostream& os, const FitReport& r);

nlohmann::json fit_json(const LearnState& s, const FitReport& r);

/// Throws ConfigError naming the first key of j that is not in `allowed`.
void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where);

}  // namespace swarmflow
