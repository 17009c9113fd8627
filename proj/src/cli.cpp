#include "rbec/cli.hpp"

#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "rbec/convergence.hpp"
#include "rbec/diagnostics.hpp"
#include "rbec/errors.hpp"
#include "rbec/field_io.hpp"
#include "rbec/run_config.hpp"
#include "rbec/spectrum.hpp"

namespace rbec::cli {
namespace {

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw OutputError("cannot write '" + path + "'");
  f << std::setprecision(17);
  return f;
}

void write_echo(std::ostream& out, const RunConfig& config) {
  out << "# config\n";
  for (const auto& [k, v] : config.echo) out << "# " << k << " = " << v << '\n';
}

int guarded(std::ostream& diagnostics, const std::function<int()>& body) {
  const WarningHandler previous =
      set_warning_handler([&diagnostics](const std::string& msg) { diagnostics << "warning: " << msg << '\n'; });
  int code = success;
  try {
    code = body();
  } catch (const ConfigError& e) {
    diagnostics << "error: " << e.what() << '\n';
    code = config_error;
  } catch (const DataMismatchError& e) {
    diagnostics << "error: data mismatch: " << e.what() << '\n';
    code = data_mismatch;
  } catch (const SolverError& e) {
    diagnostics << "error: solver failure: " << e.what() << " (" << e.history().size() << " energies recorded";
    if (!e.history().empty()) diagnostics << ", last " << std::setprecision(17) << e.history().back();
    diagnostics << ")\n";
    code = solver_failure;
  } catch (const NumericalError& e) {
    diagnostics << "error: solver failure: " << e.what() << '\n';
    code = solver_failure;
  } catch (const OutputError& e) {
    diagnostics << "error: " << e.what() << '\n';
    code = 1;
  } catch (const std::invalid_argument& e) {
    diagnostics << "error: invalid input: " << e.what() << '\n';
    code = config_error;
  }
  set_warning_handler(previous);
  return code;
}

void attach_progress(SolverConfig& solver, std::ostream& diagnostics) {
  solver.progress = [&diagnostics](int it, double e, double tau) {
    if (it % 100 == 0)
      diagnostics << "  iteration " << it << "  E=" << std::setprecision(12) << e << "  tau=" << std::setprecision(3)
                  << tau << '\n';
  };
}

}  // namespace

int cmd_solve(const CommandOptions& options, std::ostream& console, std::ostream& diagnostics) {
  return guarded(diagnostics, [&] {
    RunConfig config = load_run_config(options.config);
    if (options.verbose) attach_progress(config.solver, diagnostics);
    auto space = make_space(config.params.half_width, config.subdivisions, config.order);
    const GpeOperators ops(space, config.params);
    const GroundStateResult res =
        solve_ground_state(ops, config.solver, initial_guess(space, config.params, ops.mass()));

    std::ofstream dump = open_output(options.out);
    write_result(dump, res);
    dump.close();
    const std::string line = summary_line(res);
    std::ofstream summary = open_output(options.out + ".summary");
    summary << "# lambda energy iterations residual a4\n" << line << '\n';
    write_echo(summary, config);
    console << line << '\n';
    return static_cast<int>(success);
  });
}

int cmd_spectrum(const CommandOptions& options, std::ostream& console, std::ostream& diagnostics) {
  return guarded(diagnostics, [&] {
    RunConfig config = load_run_config(options.config);
    if (options.verbose) {
      config.spectrum.progress = [&diagnostics](int it, const std::vector<double>& values) {
        if (it % 10 == 0 && !values.empty())
          diagnostics << "  iteration " << it << "  mu1=" << std::setprecision(12) << values.front() << '\n';
      };
    }
    auto space = make_space(config.params.half_width, config.subdivisions, config.order);
    std::ifstream in(options.state);
    if (!in) throw DataMismatchError("cannot read ground-state dump '" + options.state + "'");
    const FeField u = read_field(in, space);
    const GpeOperators ops(space, config.params);
    const FeField un = normalize(u, ops.mass());
    const SpectrumResult res = lowest_spectrum(ops, un, config.spectrum_count, config.spectrum);

    std::ofstream out = open_output(options.out);
    write_spectrum_report(out, res);
    std::ostringstream line;
    line << std::setprecision(12) << res.lambda << ' ' << res.eigenvalues.front() << ' ' << res.gap << ' '
         << res.overlap_iu << ' ' << (res.quasi_isolated ? 1 : 0);
    if (options.inf_sup) {
      const InfSupResult inf = check_tangent_inf_sup(ops, un, res.lambda, config.spectrum);
      out << "# inf_sup mu residual\n" << inf.value << ' ' << inf.mu << ' ' << inf.residual << '\n';
      line << ' ' << inf.value;
    }
    write_echo(out, config);
    console << line.str() << '\n';
    return static_cast<int>(success);
  });
}

int cmd_convergence(const CommandOptions& options, std::ostream& console, std::ostream& diagnostics) {
  return guarded(diagnostics, [&] {
    const RunConfig config = load_run_config(options.config);
    validate_study(config);
    StudyConfig study = config.study();
    if (options.verbose) {
      study.log = [&diagnostics](const std::string& msg) { diagnostics << msg << '\n'; };
      attach_progress(study.solver, diagnostics);
    }
    const ConvergenceTable table = run_study(study);

    std::ofstream csv = open_output(options.out);
    write_csv(csv, table);
    csv.close();
    std::ofstream meta = open_output(options.out + ".json");
    meta << metadata_json(study, table) << '\n';
    write_csv(console, table);
    return static_cast<int>(success);
  });
}

}  // namespace rbec::cli
