// pnsolver command line: run | compare | mc | codegen

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "pnsolver/cli.hpp"
#include "pnsolver/errors.hpp"
#include "pnsolver/pn_builder.hpp"
#include "pnsolver/stencil.hpp"

namespace {

using namespace pnsolver;

int write_or_print(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return exit_ok;
  }
  std::ofstream os(path);
  if (!os) {
    std::cerr << "cannot write " << path << "\n";
    return exit_config;
  }
  os << text;
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Real-valued P_N radiative transfer solver"};
  app.require_subcommand(1);

  // run
  auto* run_cmd = app.add_subcommand("run", "build, compile, assemble, solve and export");
  std::string config_path;
  std::string spec_path;
  std::map<std::string, std::string> overrides;
  const char* value_keys[] = {"problem", "method", "order", "dim",     "res",   "bc",     "floor",  "tol",
                              "primal-tol", "max-iter", "out", "seed", "sigma-t", "albedo", "extent", "vacuum"};
  run_cmd->add_option("--config", config_path, "key=value run configuration file");
  run_cmd->add_option("--spec", spec_path, "key=value problem specification file");
  for (const char* key : value_keys) run_cmd->add_option(std::string("--") + key, overrides[key]);
  bool dump_equations = true;
  bool dump_stencil = true;
  bool jacobi = false;
  run_cmd->add_flag("--dump-equations,!--no-dump-equations", dump_equations, "write equations.txt");
  run_cmd->add_flag("--dump-stencil,!--no-dump-stencil", dump_stencil, "write stencil.txt");
  run_cmd->add_flag("--jacobi", jacobi, "diagonal preconditioner on the normal equations");

  // compare
  auto* compare_cmd = app.add_subcommand("compare", "error metrics of a profile against a reference curve");
  std::string profile_path;
  std::string reference_path;
  std::string compare_out;
  double r_min = 0.0;
  double r_max = 1e300;
  compare_cmd->add_option("--profile", profile_path, "profile CSV or PNFLD1 field")->required();
  compare_cmd->add_option("--reference", reference_path, "reference profile CSV")->required();
  compare_cmd->add_option("--r-min", r_min, "exclude r <= r-min (near field)");
  compare_cmd->add_option("--r-max", r_max, "exclude r >= r-max");
  compare_cmd->add_option("--out", compare_out, "metrics file (stdout if omitted)");

  // mc
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo point-source reference curve");
  double mc_sigma_t = 8.0;
  double mc_albedo = 0.9;
  int mc_res = 48;
  double mc_extent = 2.0;
  std::uint64_t mc_paths = 1000000;
  std::uint64_t mc_seed = 1;
  std::string mc_out;
  mc_cmd->add_option("--sigma-t", mc_sigma_t);
  mc_cmd->add_option("--albedo", mc_albedo);
  mc_cmd->add_option("--res", mc_res, "resolution whose voxel radii are tabulated");
  mc_cmd->add_option("--extent", mc_extent, "half width of the cube");
  mc_cmd->add_option("--paths", mc_paths);
  mc_cmd->add_option("--seed", mc_seed);
  mc_cmd->add_option("--out", mc_out, "CSV file (stdout if omitted)");

  // codegen
  auto* codegen_cmd = app.add_subcommand("codegen", "emit the stencil program as C++ source");
  int cg_order = 1;
  int cg_dim = 3;
  std::string cg_method = "pn";
  std::string cg_namespace = "generated";
  std::string cg_out;
  codegen_cmd->add_option("--order", cg_order);
  codegen_cmd->add_option("--dim", cg_dim);
  codegen_cmd->add_option("--method", cg_method);
  codegen_cmd->add_option("--namespace", cg_namespace);
  codegen_cmd->add_option("--out", cg_out, "header file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (*run_cmd) {
      RunConfig config;
      if (!config_path.empty()) apply_config_file(config, config_path);
      if (!spec_path.empty()) apply_config_file(config, spec_path);
      for (const char* key : value_keys)
        if (run_cmd->get_option(std::string("--") + key)->count() > 0) apply_setting(config, key, overrides[key]);
      if (run_cmd->get_option("--dump-equations")->count() > 0) config.dump_equations = dump_equations;
      if (run_cmd->get_option("--dump-stencil")->count() > 0) config.dump_stencil = dump_stencil;
      if (jacobi) config.jacobi = true;
      const RunOutcome outcome = run(config);
      (outcome.code == exit_ok ? std::cout : std::cerr) << outcome.message << "\n";
      return outcome.code;
    }
    if (*compare_cmd) {
      const CompareMetrics m = compare_profiles(load_profile(profile_path), load_profile(reference_path), r_min, r_max);
      return write_or_print(compare_out, format_metrics(m));
    }
    if (*mc_cmd) {
      const auto profile = mc_reference_profile(mc_sigma_t, mc_albedo, mc_res, mc_extent, mc_paths, mc_seed);
      if (mc_out.empty()) {
        std::cerr << "mc: --out is required\n";
        return exit_config;
      }
      write_profile_csv(mc_out, profile);
      return exit_ok;
    }
    if (*codegen_cmd) {
      const EquationSet set = cg_method == "cda" ? build_cda(cg_dim) : build_pn(cg_order, cg_dim);
      return write_or_print(cg_out, emit_source(compile(set), cg_namespace));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return exit_internal;
  }
  return exit_internal;
}
