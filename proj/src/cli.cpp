#include "pnsolver/cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pnsolver/errors.hpp"
#include "pnsolver/pn_builder.hpp"
#include "pnsolver/render.hpp"
#include "pnsolver/stencil.hpp"

namespace pnsolver {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError("invalid value '" + value + "' for " + key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw ConfigError("invalid boolean '" + value + "' for " + key);
}

int problem_dim(const std::string& problem) { return problem == "checkerboard" ? 2 : 3; }

EquationSet build_equations(const RunConfig& c, int dim) {
  if (c.method == "cda") return build_cda(dim);
  return build_pn(c.order, dim);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << text;
}

std::string report_text(const RunConfig& c, const ProblemSpec& p, const SolveReport& r, std::size_t rows) {
  std::ostringstream os;
  os << "problem " << p.name << "\n"
     << "method " << c.method << "\n"
     << "order " << c.order << "\n"
     << "dim " << p.grid.dim << "\n"
     << "resolution " << p.grid.resolution[0] << " " << p.grid.resolution[1] << " " << p.grid.resolution[2] << "\n"
     << "bc " << to_string(p.bc) << "\n"
     << "floor " << cas::format_number(p.floor) << "\n"
     << "rows " << rows << "\n"
     << "tol " << cas::format_number(c.tol) << "\n"
     << "iterations " << r.iterations << "\n"
     << "converged " << (r.converged ? "yes" : "no") << "\n"
     << "normal_residual " << cas::format_number(r.normal_residual) << "\n"
     << "primal_residual " << cas::format_number(r.primal_residual) << "\n"
     << "wall_seconds " << r.wall_seconds << "\n"
     << "history iteration normal primal\n";
  for (std::size_t i = 0; i < r.normal_history.size(); ++i)
    os << i << " " << cas::format_number(r.normal_history[i]) << " " << cas::format_number(r.primal_history[i]) << "\n";
  return os.str();
}

}  // namespace

void apply_setting(RunConfig& c, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "problem") {
    c.problem = value;
  } else if (key == "method") {
    c.method = value;
  } else if (key == "order") {
    c.order = parse_number<int>(key, value);
  } else if (key == "dim") {
    c.dim = parse_number<int>(key, value);
  } else if (key == "res") {
    c.resolution = parse_number<int>(key, value);
  } else if (key == "bc") {
    c.bc = value;
  } else if (key == "floor") {
    c.floor = parse_number<double>(key, value);
  } else if (key == "tol") {
    c.tol = parse_number<double>(key, value);
  } else if (key == "primal-tol") {
    c.primal_tol = parse_number<double>(key, value);
  } else if (key == "max-iter") {
    c.max_iter = parse_number<int>(key, value);
  } else if (key == "jacobi") {
    c.jacobi = parse_bool(key, value);
  } else if (key == "out") {
    c.out = value;
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "dump-equations") {
    c.dump_equations = parse_bool(key, value);
  } else if (key == "dump-stencil") {
    c.dump_stencil = parse_bool(key, value);
  } else if (key == "sigma-t") {
    c.sigma_t = parse_number<double>(key, value);
  } else if (key == "albedo") {
    c.albedo = parse_number<double>(key, value);
  } else if (key == "extent") {
    c.extent = parse_number<double>(key, value);
  } else if (key == "vacuum") {
    c.vacuum = parse_number<double>(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void apply_config_text(RunConfig& config, const std::string& text) {
  std::istringstream is(text);
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    apply_setting(config, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path);
  std::ostringstream os;
  os << is.rdbuf();
  apply_config_text(config, os.str());
}

void validate(const RunConfig& c) {
  if (c.problem != "checkerboard" && c.problem != "pointsource" && c.problem != "heterogeneous")
    throw ConfigError("unknown problem '" + c.problem + "'");
  if (c.method != "pn" && c.method != "cda") throw ConfigError("method must be pn or cda");
  if (c.method == "pn" && c.order < 1) throw ConfigError("order must be >= 1");
  if (c.order > 15) throw ConfigError("order must be <= 15");
  if (c.dim != 0 && c.dim != problem_dim(c.problem))
    throw ConfigError("problem " + c.problem + " is " + std::to_string(problem_dim(c.problem)) + "D");
  if (c.resolution < 0) throw ConfigError("resolution must be positive");
  if (c.resolution > 0 && c.resolution < 8) throw ConfigError("resolution must be >= 8");
  if (!c.bc.empty()) parse_boundary(c.bc);
  if (c.floor < 0.0 || !std::isfinite(c.floor)) throw ConfigError("floor must be >= 0");
  if (!(c.tol > 0.0) || !(c.tol < 1.0)) throw ConfigError("tol must be in (0,1)");
  if (c.primal_tol < 0.0) throw ConfigError("primal-tol must be >= 0");
  if (c.max_iter < 1) throw ConfigError("max-iter must be >= 1");
  if (c.out.empty()) throw ConfigError("output directory must not be empty");
  if (!(c.sigma_t > 0.0)) throw ConfigError("sigma-t must be positive");
  if (c.albedo < 0.0 || c.albedo > 1.0) throw ConfigError("albedo must be in [0,1]");
  if (!(c.extent > 0.0)) throw ConfigError("extent must be positive");
  if (c.vacuum < 0.0 || c.vacuum >= 1.0) throw ConfigError("vacuum must be in [0,1)");
}

std::string to_config_text(const RunConfig& c) {
  std::ostringstream os;
  os << "problem = " << c.problem << "\n"
     << "method = " << c.method << "\n"
     << "order = " << c.order << "\n"
     << "dim = " << c.dim << "\n"
     << "res = " << c.resolution << "\n";
  if (!c.bc.empty()) os << "bc = " << c.bc << "\n";
  os << "floor = " << cas::format_number(c.floor) << "\n"
     << "tol = " << cas::format_number(c.tol) << "\n"
     << "primal-tol = " << cas::format_number(c.primal_tol) << "\n"
     << "max-iter = " << c.max_iter << "\n"
     << "jacobi = " << (c.jacobi ? "true" : "false") << "\n"
     << "out = " << c.out << "\n"
     << "seed = " << c.seed << "\n"
     << "dump-equations = " << (c.dump_equations ? "true" : "false") << "\n"
     << "dump-stencil = " << (c.dump_stencil ? "true" : "false") << "\n"
     << "sigma-t = " << cas::format_number(c.sigma_t) << "\n"
     << "albedo = " << cas::format_number(c.albedo) << "\n"
     << "extent = " << cas::format_number(c.extent) << "\n"
     << "vacuum = " << cas::format_number(c.vacuum) << "\n";
  return os.str();
}

ProblemSpec make_problem(const RunConfig& c) {
  ProblemSpec spec;
  if (c.problem == "checkerboard") {
    spec = make_checkerboard(c.resolution > 0 ? c.resolution : 71);
  } else if (c.problem == "pointsource") {
    PointSourceParams p;
    if (c.resolution > 0) p.resolution = c.resolution;
    p.sigma_t = c.sigma_t;
    p.albedo = c.albedo;
    p.half_extent = c.extent;
    spec = make_pointsource(p);
  } else if (c.problem == "heterogeneous") {
    HeterogeneousParams p;
    if (c.resolution > 0) p.resolution = c.resolution;
    p.seed = c.seed;
    p.vacuum_fraction = c.vacuum;
    spec = make_heterogeneous(p);
  } else {
    throw ConfigError("unknown problem '" + c.problem + "'");
  }
  if (!c.bc.empty()) spec.bc = parse_boundary(c.bc);
  if (c.floor > 0.0) spec = floor_sigma_t(spec, c.floor);
  return spec;
}

RunOutcome run(const RunConfig& config, bool write_artifacts) {
  RunOutcome outcome;
  try {
    validate(config);
    const ProblemSpec problem = make_problem(config);
    check_admissible(problem);
    const EquationSet equations = build_equations(config, problem.grid.dim);
    const StencilProgram program = compile(equations);
    const SparseSystem sys = assemble(program, problem);

    SolveOptions options;
    options.tol = config.tol;
    options.primal_tol = config.primal_tol;
    options.max_iter = config.max_iter;
    options.jacobi = config.jacobi;
    std::vector<double> u;
    outcome.report = solve_normal_cg(sys, u, options);
    outcome.field = unstagger(make_staggered_field(program, problem.grid, std::move(u)), problem.bc);
    outcome.profile = line_profile(*outcome.field);

    if (write_artifacts) {
      const std::filesystem::path dir(config.out);
      std::filesystem::create_directories(dir);
      write_field((dir / "field.pnfld").string(), *outcome.field);
      write_profile_csv((dir / "profile.csv").string(), outcome.profile);
      write_text(dir / "report.log", report_text(config, problem, outcome.report, sys.Q.size()));
      write_text(dir / "config.txt", to_config_text(config));
      if (config.dump_equations) write_text(dir / "equations.txt", dump_equations(equations));
      if (config.dump_stencil) write_text(dir / "stencil.txt", dump_stencil(program));
    }
    if (!outcome.report.converged) {
      outcome.code = exit_nonconvergence;
      outcome.message = "solver did not converge: " + std::to_string(outcome.report.iterations) +
                        " iterations, normal residual " + cas::format_number(outcome.report.normal_residual);
    } else {
      outcome.message = "converged in " + std::to_string(outcome.report.iterations) + " iterations";
    }
  } catch (const ConfigError& e) {
    outcome.code = exit_config;
    outcome.message = std::string("config error: ") + e.what();
  } catch (const AdmissionError& e) {
    outcome.code = exit_config;
    outcome.message = std::string("problem rejected: ") + e.what();
  } catch (const std::exception& e) {
    outcome.code = exit_internal;
    outcome.message = std::string("internal error: ") + e.what();
  }
  return outcome;
}

CompareMetrics compare_profiles(const std::vector<ProfilePoint>& profile, const std::vector<ProfilePoint>& reference,
                                double r_min, double r_max) {
  CompareMetrics m;
  double diff2 = 0.0;
  double ref2 = 0.0;
  double signed_sum = 0.0;
  for (const auto& p : profile) {
    if (!(p.r > r_min && p.r < r_max)) continue;
    if (reference.empty() || p.r < reference.front().r || p.r > reference.back().r) continue;
    const double ref = interpolate_profile(reference, p.r);
    const double d = p.value - ref;
    diff2 += d * d;
    ref2 += ref * ref;
    if (ref != 0.0) {
      m.linf_relative = std::max(m.linf_relative, std::abs(d / ref));
      signed_sum += d / ref;
    }
    ++m.points;
  }
  if (m.points == 0) throw ConfigError("no profile points inside the comparison window");
  m.l2_relative = ref2 > 0.0 ? std::sqrt(diff2 / ref2) : std::sqrt(diff2);
  m.mean_signed_relative = signed_sum / m.points;
  return m;
}

std::string format_metrics(const CompareMetrics& m) {
  std::ostringstream os;
  os << "points " << m.points << "\n"
     << "l2_relative " << cas::format_number(m.l2_relative) << "\n"
     << "linf_relative " << cas::format_number(m.linf_relative) << "\n"
     << "mean_signed_relative " << cas::format_number(m.mean_signed_relative) << "\n";
  return os.str();
}

std::vector<ProfilePoint> load_profile(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::string first;
  if (!is || !std::getline(is, first)) throw ConfigError("cannot read " + path);
  if (first == "PNFLD1") return line_profile(read_field(path));
  return read_profile_csv(path);
}

std::vector<ProfilePoint> mc_reference_profile(double sigma_t, double albedo, int resolution, double half_extent,
                                               std::uint64_t paths, std::uint64_t seed) {
  const double h = 2.0 * half_extent / resolution;
  const int count = resolution - resolution / 2 - 1;
  std::vector<double> edges;
  for (int i = 0; i <= count; ++i) edges.push_back((i + 0.5) * h);
  const McResult mc = mc_fluence_oracle(sigma_t, albedo, edges, paths, seed);
  std::vector<ProfilePoint> out;
  for (int i = 0; i < count; ++i)
    out.push_back({(i + 1) * h, mc.shells[static_cast<size_t>(i)].fluence, mc.shells[static_cast<size_t>(i)].std_error});
  return out;
}

std::string codegen(const RunConfig& c, const std::string& namespace_name) {
  validate(c);
  const int dim = c.dim != 0 ? c.dim : problem_dim(c.problem);
  return emit_source(compile(build_equations(c, dim)), namespace_name);
}

}  // namespace pnsolver
