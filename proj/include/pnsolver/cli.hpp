#pragma once

// Batch pipeline behind the pnsolver command line: configuration, the
// build -> compile -> assemble -> solve -> export run, profile comparison, the
// Monte Carlo reference and stencil code generation.
//
// Config files are flat "key = value" lines; '#' starts a comment. Keys are
// the long flag names without dashes (order, res, bc, floor, ...).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pnsolver/field.hpp"
#include "pnsolver/problems.hpp"
#include "pnsolver/solver.hpp"

namespace pnsolver {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_nonconvergence = 3, exit_internal = 4 };

struct RunConfig {
  std::string problem = "pointsource";  // checkerboard | pointsource | heterogeneous
  std::string method = "pn";            // pn | cda
  int order = 1;
  int dim = 0;         // 0: the problem's own dimension
  int resolution = 0;  // 0: the problem's default
  std::string bc;      // empty: the problem's default
  double floor = 0.0;  // sigma_t floor; 0 disables
  double tol = 1e-8;
  double primal_tol = 0.0;
  int max_iter = 200000;
  bool jacobi = false;
  std::string out = "pnsolver-out";
  std::uint64_t seed = 1;
  bool dump_equations = true;
  bool dump_stencil = true;
  // point source
  double sigma_t = 8.0;
  double albedo = 0.9;
  double extent = 2.0;  // half width of the cube
  // heterogeneous
  double vacuum = 0.2;
};

/// Applies one key=value setting. Throws ConfigError for unknown keys or
/// malformed values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Applies every setting of a config text on top of `config`.
void apply_config_text(RunConfig& config, const std::string& text);
void apply_config_file(RunConfig& config, const std::string& path);

/// Throws ConfigError on an invalid combination.
void validate(const RunConfig& config);

/// Key=value text that reproduces the configuration.
std::string to_config_text(const RunConfig& config);

/// Problem described by the configuration, floor applied.
ProblemSpec make_problem(const RunConfig& config);

struct RunOutcome {
  ExitCode code = exit_ok;
  std::string message;
  SolveReport report;
  std::optional<SolutionField> field;  // collocated
  std::vector<ProfilePoint> profile;
};

/// Runs the whole pipeline. When `write_artifacts` is set, writes into
/// config.out: field.pnfld, profile.csv, report.log, config.txt and, if
/// enabled, equations.txt and stencil.txt. Errors are mapped to exit codes.
RunOutcome run(const RunConfig& config, bool write_artifacts = true);

struct CompareMetrics {
  int points = 0;
  double l2_relative = 0.0;
  double linf_relative = 0.0;
  double mean_signed_relative = 0.0;
};

/// Compares `profile` against `reference` (linearly interpolated) over
/// r_min < r < r_max.
CompareMetrics compare_profiles(const std::vector<ProfilePoint>& profile, const std::vector<ProfilePoint>& reference,
                                double r_min, double r_max);

std::string format_metrics(const CompareMetrics& metrics);

/// Loads a profile from a CSV file or, for a PNFLD1 file, from its centre line.
std::vector<ProfilePoint> load_profile(const std::string& path);

/// MC reference curve on the voxel-centre radii r = i h (i >= 1) of a cube of
/// the given resolution and half width, each shell one voxel wide.
std::vector<ProfilePoint> mc_reference_profile(double sigma_t, double albedo, int resolution, double half_extent,
                                               std::uint64_t paths, std::uint64_t seed);

/// Generated C++ header for the stencil program of the configuration.
std::string codegen(const RunConfig& config, const std::string& namespace_name);

}  // namespace pnsolver
