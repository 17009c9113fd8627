#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rbec/assembly.hpp"
#include "rbec/convergence.hpp"
#include "rbec/riemannian_solver.hpp"
#include "rbec/spectrum.hpp"

namespace rbec {

/// Invalid configuration file. what() lists every problem, one per line.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Flat `key = value` configuration. `#` starts a comment. Keys:
///
///   domain.half_width        required
///   mesh.subdivisions        default 64
///   mesh.order               default 1 (1 or 2)
///   model.beta               required
///   model.omega              required
///   model.gamma_x            required
///   model.gamma_y            required
///   solver.energy_tol        default 1e-10
///   solver.max_iter          default 20000
///   solver.initial_step      default 1
///   solver.backtrack_factor  default 0.5
///   solver.growth_factor     default 1.1
///   solver.max_step          default 1
///   solver.min_step          default 1e-12
///   solver.inner_tol         default 1e-10
///   solver.inner_max_iter    default 20000
///   solver.residual_tol      default 0 (off)
///   solver.preconditioner    multigrid (default) or jacobi
///   solver.seed              default 20240501
///   spectrum.count           default 15
///   spectrum.tol             default 1e-8
///   spectrum.max_iter        default 1000
///   study.levels             comma separated, e.g. 16, 32, 64, 128
///   study.reference          default 0 (twice the finest level)
///   study.warm_start         default true
///   study.density_flag_threshold  default 0.5
struct RunConfig {
  ModelParams params;
  int subdivisions = 64;
  int order = 1;
  SolverConfig solver;
  int spectrum_count = 15;
  SpectrumOptions spectrum;
  std::vector<int> levels;
  int reference = 0;
  bool warm_start = true;
  double density_flag_threshold = 0.5;
  /// Every key with its effective value, in documented order.
  std::vector<std::pair<std::string, std::string>> echo;

  StudyConfig study() const;
};

/// Throws ConfigError listing malformed lines, unknown or duplicate keys,
/// missing required keys and out-of-range values together.
RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::string& path);

/// Checks needed only by the convergence command (non-empty level list and
/// nestedness). Throws ConfigError.
void validate_study(const RunConfig& config);

/// `key = value` lines reproducing the effective configuration.
std::string config_echo(const RunConfig& config);

}  // namespace rbec
