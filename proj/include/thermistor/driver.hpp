#pragma once

#include "thermistor/diagnostics.hpp"
#include "thermistor/materials.hpp"
#include "thermistor/scheme.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace thermistor {

struct MeshSource {
  std::optional<std::filesystem::path> file;  // built-in unit square when empty
  int n = 8;
  SideTags tags{};
};

struct RunConfig {
  MeshSource mesh;
  PtcParameters model;
  double theta0 = 0.0;  // uniform initial temperature on free nodes
  SolverConfig solver;
  std::filesystem::path output_dir = "out";
  int stride = 1;
  bool assert_mode = false;
  bool dual_norms = true;
  std::optional<double> weighted_ceiling;
  std::optional<double> energy_ceiling;
  int validation_samples = 10000;
  std::string hash;  // FNV-1a of the config text, hex

  /// Checks everything that does not need the mesh. Throws ConfigError.
  void validate() const;
};

std::uint64_t fnv1a64(const std::string& text);

/// Parses the INI-style config. Relative paths resolve against base_dir.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = ".");
RunConfig load_run_config(const std::filesystem::path& path);

Mesh build_mesh(const RunConfig& config);

/// Exit codes of the command-line tool.
enum ExitCode : int { kOk = 0, kConfigError = 2, kSolverError = 3, kViolation = 4 };

int command_run(const RunConfig& config, std::ostream& out, std::ostream& err);
int command_check(const RunConfig& config, std::ostream& out, std::ostream& err);
int command_cascade(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full CLI: subcommands run, check, cascade with --config, --out, --assert, --stride.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

void write_trajectory_csv(std::ostream& out, const std::string& header_comment, const Discretization& disc,
                          const Trajectory& trajectory, int stride);
void write_cascade_csv(std::ostream& out, const std::string& header_comment, const CascadeReport& report,
                       const std::vector<DiagnosticsReport>& diagnostics);

}  // namespace thermistor
