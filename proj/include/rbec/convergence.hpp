#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rbec/gpe_model.hpp"
#include "rbec/riemannian_solver.hpp"

namespace rbec {

struct StudyConfig {
  ModelParams params;
  int order = 1;
  std::vector<int> levels;  ///< coarse N_h values
  int reference = 0;        ///< reference N_h; 0 means twice the finest level
  SolverConfig solver;
  bool warm_start = true;
  /// A level whose relative density error || |u_h|^2 - |u|^2 || / || |u|^2 ||
  /// exceeds this value is flagged as a possibly distinct minimizer.
  double density_flag_threshold = 0.5;
  /// Progress messages (level started / finished).
  std::function<void(const std::string&)> log;

  int reference_subdivisions() const;
  /// Throws std::invalid_argument listing every violated constraint.
  void validate() const;
};

struct LevelRow {
  int subdivisions = 0;
  double h = 0.0;
  double err_l2 = 0.0;
  double err_h1 = 0.0;
  double err_h1_seminorm = 0.0;
  double err_l2_unaligned = 0.0;
  double energy = 0.0;
  double lambda = 0.0;
  double energy_diff = 0.0;  ///< E(u_h) - E(u)
  double lambda_diff = 0.0;  ///< lambda_h - lambda
  double density_error = 0.0;
  double phase = 0.0;        ///< alignment angle applied to the reference
  int iterations = 0;
  double residual = 0.0;
  double seconds = 0.0;
  bool flagged = false;
  std::string flag_reason;

  double err_energy() const;
  double err_lambda() const;
};

struct ReferenceInfo {
  int subdivisions = 0;
  double h = 0.0;
  double energy = 0.0;
  double lambda = 0.0;
  int iterations = 0;
  double residual = 0.0;
  double seconds = 0.0;
  bool a4_holds = true;
};

struct EocRow {
  std::optional<double> l2, h1, energy, lambda;
};

struct ConvergenceTable {
  std::vector<LevelRow> rows;  ///< decreasing h
  std::vector<EocRow> eoc;     ///< between consecutive rows
  ReferenceInfo reference;
  std::string strategy;        ///< how starting values were chosen
};

/// log(e_i / e_{i+1}) / log(h_i / h_{i+1}); undefined (nullopt) when an error
/// is zero. Throws std::invalid_argument for nonpositive or non-decreasing h.
std::vector<std::optional<double>> compute_eoc(const std::vector<double>& h, const std::vector<double>& err);

/// || |u_h|^2 - |u|^2 ||_{L2} / || |u|^2 ||_{L2}, u_h prolongated to the space of u.
double relative_density_error(const FeField& u_h, const FeField& u);

/// Errors of one solved level against the reference (u_h prolongated, the
/// reference phase-aligned to it). `seconds` is left at zero.
LevelRow measure_level(const GroundStateResult& level, const GroundStateResult& reference,
                       const GpeOperators& ref_ops, double density_flag_threshold);

/// Callback receiving every solved level (coarse levels, then the reference)
/// for callers that need the states.
using LevelObserver = std::function<void(int subdivisions, const GpeOperators&, const GroundStateResult&)>;

ConvergenceTable run_study(const StudyConfig& config, const LevelObserver& observer = {});

/// Header `h,errL2,errH1,errEnergy,errLambda`, data rows, then `eoc,` rows.
void write_csv(std::ostream& out, const ConvergenceTable& table);

/// JSON sidecar: config echo, reference info, per-level details and flags.
std::string metadata_json(const StudyConfig& config, const ConvergenceTable& table);

}  // namespace rbec
