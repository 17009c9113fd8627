#pragma once

#include <iosfwd>
#include <string>

namespace rbec::cli {

enum ExitCode : int {
  success = 0,
  config_error = 2,
  data_mismatch = 3,
  solver_failure = 4,
};

struct CommandOptions {
  std::string config;
  std::string out;
  std::string state;     ///< ground-state dump (spectrum only)
  bool inf_sup = false;  ///< spectrum: also run the tangent inf-sup check
  bool verbose = false;
};

/// Writes the field dump to `out` and `lambda energy iterations residual a4`
/// to stdout and `out`.summary (with the config echo as comments).
int cmd_solve(const CommandOptions& options, std::ostream& console, std::ostream& diagnostics);

/// Reads the dump in `state`, writes the spectrum report to `out`.
int cmd_spectrum(const CommandOptions& options, std::ostream& console, std::ostream& diagnostics);

/// Writes the CSV table to `out` and the metadata to `out`.json.
int cmd_convergence(const CommandOptions& options, std::ostream& console, std::ostream& diagnostics);

}  // namespace rbec::cli
