#pragma once

// qfi_lab command line: list, verify, brackets, discover, solve.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qfi::cli {

enum ExitCode : int { kOk = 0, kBreach = 1, kUsage = 2 };

struct RunConfig {
  std::string command;
  std::string potential;
  std::string params = "{}";
  std::string integrator = "verlet";
  double dt = 1e-3;
  double t_end = 10.0;
  std::uint64_t seed = 1;
  std::string out;  // empty writes to the output stream
  std::string format = "json";
  bool integral3 = false;
};

/// Parses args (without the program name) and runs the command. Reports go
/// to `out` or the --out file, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Runs an already parsed config; throws qfi::Error subclasses on failure.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace qfi::cli
