#include <iostream>

#include <CLI11.hpp>

#include "rbec/cli.hpp"

int main(int argc, char** argv) {
  using namespace rbec::cli;
  CLI::App app{"Ground states of rotating Bose-Einstein condensates"};
  app.require_subcommand(1);

  CommandOptions opts;
  auto add_common = [&opts](CLI::App* cmd) {
    cmd->add_option("--config", opts.config, "configuration file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out, "output path")->required();
    cmd->add_flag("--verbose", opts.verbose, "progress on stderr");
  };

  CLI::App* solve = app.add_subcommand("solve", "compute a discrete ground state");
  add_common(solve);
  CLI::App* spectrum = app.add_subcommand("spectrum", "lowest eigenvalues of the second energy derivative");
  add_common(spectrum);
  spectrum->add_option("--state", opts.state, "ground-state dump written by solve")->required();
  spectrum->add_flag("--inf-sup", opts.inf_sup, "also check the tangent inf-sup constant");
  CLI::App* convergence = app.add_subcommand("convergence", "mesh convergence study");
  add_common(convergence);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : config_error;
  }

  if (solve->parsed()) return cmd_solve(opts, std::cout, std::cerr);
  if (spectrum->parsed()) return cmd_spectrum(opts, std::cout, std::cerr);
  return cmd_convergence(opts, std::cout, std::cerr);
}
