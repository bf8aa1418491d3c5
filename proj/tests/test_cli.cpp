#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pnsolver/cli.hpp"
#include "pnsolver/errors.hpp"
#include "pnsolver/pn_builder.hpp"
#include "pnsolver/stencil.hpp"

using namespace pnsolver;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::current_path() / "cli_scratch" / name;
  fs::remove_all(dir);
  fs::create_directories(dir.parent_path());
  return dir;
}

int shell(const std::string& args) {
  const int status = std::system((std::string(PNSOLVER_BINARY) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

RunConfig small_pointsource(const fs::path& out) {
  RunConfig c;
  c.problem = "pointsource";
  c.order = 1;
  c.resolution = 12;
  c.tol = 1e-9;
  c.out = out.string();
  return c;
}

}  // namespace

TEST(Config, ParsesKeyValueWithComments) {
  RunConfig c;
  apply_config_text(c, "# comment\nproblem = checkerboard\n\norder=3   # trailing\n  bc = neumann\nfloor = 0.25\njacobi = true\n");
  EXPECT_EQ(c.problem, "checkerboard");
  EXPECT_EQ(c.order, 3);
  EXPECT_EQ(c.bc, "neumann");
  EXPECT_EQ(c.floor, 0.25);
  EXPECT_TRUE(c.jacobi);
}

TEST(Config, RejectsUnknownAndMalformed) {
  RunConfig c;
  EXPECT_THROW(apply_config_text(c, "colour = blue\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "order\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "order = three\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "tol = 1e-8x\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "jacobi = maybe\n"), ConfigError);
  EXPECT_THROW(apply_config_file(c, "/nonexistent/config.txt"), ConfigError);
}

TEST(Config, TextRoundTrip) {
  RunConfig c;
  apply_config_text(c, "problem = heterogeneous\nmethod = cda\nres = 24\nfloor = 0.1\ntol = 1e-7\nseed = 42\nvacuum = 0.3\n"
                       "primal-tol = 1e-9\ndump-stencil = false\nbc = neumann\n");
  RunConfig d;
  apply_config_text(d, to_config_text(c));
  EXPECT_EQ(to_config_text(d), to_config_text(c));
  EXPECT_EQ(d.seed, 42u);
  EXPECT_EQ(d.primal_tol, 1e-9);
  EXPECT_FALSE(d.dump_stencil);
}

TEST(Config, Validation) {
  RunConfig c;
  EXPECT_NO_THROW(validate(c));
  auto bad = [](const std::string& text) {
    RunConfig c;
    apply_config_text(c, text);
    EXPECT_THROW(validate(c), ConfigError) << text;
  };
  bad("order = 0");
  bad("problem = teapot");
  bad("method = sn");
  bad("res = 4");
  bad("tol = 0");
  bad("albedo = 1.5");
  bad("problem = checkerboard\ndim = 3");
}

TEST(Run, PointSourceInProcess) {
  const auto out = scratch("inproc");
  const auto outcome = run(small_pointsource(out));
  ASSERT_EQ(outcome.code, exit_ok) << outcome.message;
  EXPECT_TRUE(outcome.report.converged);
  for (const char* name : {"field.pnfld", "profile.csv", "report.log", "config.txt", "equations.txt", "stencil.txt"})
    EXPECT_TRUE(fs::exists(out / name)) << name;
  // Artifacts round-trip through their readers.
  const auto field = read_field((out / "field.pnfld").string());
  EXPECT_EQ(field.values, outcome.field->values);
  const auto profile = read_profile_csv((out / "profile.csv").string());
  ASSERT_EQ(profile.size(), outcome.profile.size());
  for (std::size_t i = 0; i < profile.size(); ++i) EXPECT_EQ(profile[i].value, outcome.profile[i].value);
  RunConfig back;
  apply_config_file(back, (out / "config.txt").string());
  EXPECT_EQ(to_config_text(back), to_config_text(small_pointsource(out)));
  EXPECT_EQ(read_text(out / "stencil.txt"), dump_stencil(compile(build_pn(1, 3))));
  // Fluence peaks at the source and decays outwards.
  for (std::size_t i = 1; i < outcome.profile.size(); ++i) EXPECT_LT(outcome.profile[i].value, outcome.profile[i - 1].value);
}

TEST(Run, ErrorsMapToExitCodes) {
  auto c = small_pointsource(scratch("order0"));
  c.order = 0;
  auto o = run(c);
  EXPECT_EQ(o.code, exit_config);
  EXPECT_FALSE(fs::exists(c.out));

  RunConfig h;
  h.problem = "heterogeneous";
  h.resolution = 8;
  h.out = scratch("vacuum").string();
  o = run(h);
  EXPECT_EQ(o.code, exit_config);
  EXPECT_NE(o.message.find("floor"), std::string::npos) << o.message;
  EXPECT_FALSE(fs::exists(h.out));

  c = small_pointsource(scratch("stall"));
  c.max_iter = 2;
  o = run(c);
  EXPECT_EQ(o.code, exit_nonconvergence);
  EXPECT_FALSE(o.report.converged);
}

TEST(Compare, MetricsOracle) {
  const std::vector<ProfilePoint> ref{{0.0, 4.0}, {1.0, 2.0}, {2.0, 1.0}, {3.0, 0.5}};
  const std::vector<ProfilePoint> p{{0.0, 100.0}, {0.5, 3.3}, {1.0, 2.2}, {2.0, 0.9}, {3.0, 7.0}};
  const auto m = compare_profiles(p, ref, 0.1, 2.5);
  ASSERT_EQ(m.points, 3);
  // Reference at 0.5 is 3.0.
  const double d[] = {0.3, 0.2, -0.1}, r[] = {3.0, 2.0, 1.0};
  double num = 0, den = 0, linf = 0, mean = 0;
  for (int i = 0; i < 3; ++i) {
    num += d[i] * d[i];
    den += r[i] * r[i];
    linf = std::max(linf, std::abs(d[i] / r[i]));
    mean += d[i] / r[i] / 3;
  }
  EXPECT_NEAR(m.l2_relative, std::sqrt(num / den), 1e-14);
  EXPECT_NEAR(m.linf_relative, linf, 1e-14);
  EXPECT_NEAR(m.mean_signed_relative, mean, 1e-14);
  EXPECT_THROW(compare_profiles(p, ref, 5.0, 6.0), ConfigError);
}

TEST(Binary, RunCompareAndRejection) {
  const auto out = scratch("bin_run");
  ASSERT_EQ(shell("run --problem pointsource --order 1 --res 12 --tol 1e-9 --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "field.pnfld"));

  const auto metrics = scratch("bin_metrics.txt");
  ASSERT_EQ(shell("compare --profile " + (out / "field.pnfld").string() + " --reference " + (out / "profile.csv").string() +
                  " --out " + metrics.string()),
            0);
  const std::string text = read_text(metrics);
  EXPECT_NE(text.find("l2_relative 0\n"), std::string::npos) << text;
  EXPECT_NE(text.find("linf_relative 0\n"), std::string::npos) << text;

  const auto rejected = scratch("bin_order0");
  EXPECT_EQ(shell("run --problem pointsource --order 0 --out " + rejected.string()), 2);
  EXPECT_FALSE(fs::exists(rejected));
  EXPECT_EQ(shell("run --problem heterogeneous --res 8 --out " + rejected.string()), 2);
  EXPECT_FALSE(fs::exists(rejected));
  EXPECT_EQ(shell("run --problem pointsource --res 12 --max-iter 1 --no-dump-stencil --out " + rejected.string()), 3);
  EXPECT_FALSE(fs::exists(rejected / "stencil.txt"));
  EXPECT_EQ(shell("run --bogus"), 2);
  EXPECT_EQ(shell("frobnicate"), 2);
}

TEST(Binary, ConfigFileAndOverrides) {
  const auto dir = scratch("bin_config");
  fs::create_directories(dir);
  std::ofstream(dir / "run.cfg") << "problem = pointsource\norder = 2\nres = 10\ntol = 1e-9\n";
  ASSERT_EQ(shell("run --config " + (dir / "run.cfg").string() + " --order 1 --out " + (dir / "out").string()), 0);
  RunConfig c;
  apply_config_file(c, (dir / "out" / "config.txt").string());
  EXPECT_EQ(c.order, 1);
  EXPECT_EQ(c.resolution, 10);
}

TEST(Binary, CodegenMatchesLibrary) {
  const auto path = scratch("gen.hpp");
  ASSERT_EQ(shell("codegen --order 2 --dim 2 --namespace demo --out " + path.string()), 0);
  EXPECT_EQ(read_text(path), emit_source(compile(build_pn(2, 2)), "demo"));
  RunConfig c;
  c.problem = "checkerboard";
  c.order = 2;
  EXPECT_EQ(codegen(c, "demo"), read_text(path));
}

TEST(Binary, McWritesReferenceCsv) {
  const auto path = scratch("mc.csv");
  ASSERT_EQ(shell("mc --res 16 --extent 1 --paths 20000 --seed 3 --out " + path.string()), 0);
  const auto p = read_profile_csv(path.string());
  ASSERT_EQ(p.size(), 7u);
  EXPECT_NEAR(p[0].r, 0.125, 1e-15);
  for (const auto& x : p) EXPECT_GT(x.std_error, 0.0);
  const auto direct = mc_reference_profile(8.0, 0.9, 16, 1.0, 20000, 3);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(p[i].value, direct[i].value);
}
