#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "config.hpp"
#include "json.hpp"
#include "viscoctl/errors.hpp"

using namespace viscoctl;
using namespace viscoctl::cli;
namespace fs = std::filesystem;

namespace {

fs::path fixture(const std::string& name) { return fs::path(VISCOCTL_FIXTURE_DIR) / (name + ".cfg"); }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("viscoctl_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "t.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

nlohmann::json manifest(const fs::path& dir) {
  std::ifstream f(dir / "manifest.json");
  return nlohmann::json::parse(f);
}

int run(const std::string& command, const std::string& name, const fs::path& out, const std::string& mode = "") {
  std::ostringstream err;
  return run_command_file(command, fixture(name), mode, out, std::nullopt, err);
}

}  // namespace

TEST(Config, ParsesFixture) {
  const RunConfig c = load_config(fixture("fig2"));
  EXPECT_EQ(c.dimension, 2);
  EXPECT_EQ(c.nodes, (std::vector<int>{31, 31}));
  EXPECT_EQ(c.flow_kind, "translation");
  EXPECT_DOUBLE_EQ(c.margin1, 0.02);
  const Shape s = parse_shape(2, c.omega0);
  EXPECT_TRUE(s.contains(Point(0.0, 1.0)));
  EXPECT_FALSE(s.contains(Point(0.0, 0.4)));
}

TEST(Config, ErrorsNameLineAndKey) {
  EXPECT_NE(error_of("dimension = 1\nbogus = 3\n").find("t.cfg:2: unknown key 'bogus'"), std::string::npos);
  EXPECT_NE(error_of("steps = 10\nsteps = 20\n").find("t.cfg:2: duplicate key 'steps'"), std::string::npos);
  EXPECT_NE(error_of("horizon = -1\n").find("key 'horizon'"), std::string::npos);
  EXPECT_NE(error_of("beta = abc\n").find("key 'beta'"), std::string::npos);
  EXPECT_NE(error_of("omega0 = box:0.1\nflow = static\n").find("key 'omega0'"), std::string::npos);
  EXPECT_NE(error_of("flow = spiral 1\n").find("key 'flow'"), std::string::npos);
  EXPECT_NE(error_of("nodes = 3\nomega0 = box:0.1,0.2\nflow = static\n").size(), 0u);
  EXPECT_EQ(error_of("# comment only\n\n"), "");
}

TEST(Config, FieldAndCoefficientForms) {
  const RunConfig c = parse_config("y0 = 2 1; 0.5 3\nb = cos 2 0.5 1\n");
  const Grid g = Grid::build(1, {1.0}, {11}, 1.0, 10);
  const Field y0 = c.y0.sample(g);
  const double x = g.coord(2).x();
  EXPECT_NEAR(y0[2], 2.0 * std::sin(M_PI * x) + 0.5 * std::sin(3 * M_PI * x), 1e-14);
  EXPECT_NEAR(c.b.build(g).b[2], 2.0 + 0.5 * std::cos(2 * M_PI * x), 1e-14);
  const RunConfig t = parse_config("b = table 1 3\n");
  EXPECT_NEAR(t.b.build(g).b[4], 1.0 + 2.0 * g.coord(4).x(), 1e-14);
}

TEST(Config, FlowForms) {
  RunConfig c = parse_config("dimension = 2\nextent = 1 1\nnodes = 9 9\nflow = rotation 0.5 0.5 2\n");
  EXPECT_NEAR(c.flow()(Point(1.0, 0.5), 0.0).y(), 1.0, 1e-14);
  c = parse_config("flow = oscillating 1 0.5 0.25\n");
  EXPECT_NO_THROW(c.flow());
  c = parse_config("flow = tabulated 0 1 2 0 1\n");
  EXPECT_NEAR(c.flow()(Point(0.5, 0.0), 0.0).x(), 0.5, 1e-14);
  EXPECT_THROW(parse_config("flow = rotation 0 0 1\n"), ConfigError);
}

TEST(Commands, CheckGeometryWritesOutputsAndManifest) {
  const fs::path out = scratch("geometry");
  ASSERT_EQ(run("check-geometry", "fig2", out), kExitOk);
  for (const char* f : {"geometry_report.txt", "geometry_timeseries.csv", "omega0_masks.csv", "manifest.json"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  std::ifstream rep(out / "geometry_report.txt");
  const std::string text((std::istreambuf_iterator<char>(rep)), {});
  EXPECT_NE(text.find("A3e = FAIL"), std::string::npos);
  const auto m = manifest(out);
  EXPECT_EQ(m["command"], "check-geometry");
  EXPECT_EQ(m["exit_code"], 0);
  EXPECT_EQ(m["version"], kVersion);
  EXPECT_EQ(m["outputs"].size(), 3u);
  std::ifstream cfg(fixture("fig2"));
  const std::string raw((std::istreambuf_iterator<char>(cfg)), {});
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(raw)));
  EXPECT_EQ(m["config_hash"], std::string("fnv1a64:") + hex);
}

TEST(Commands, Fnv1aReferenceValues) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Commands, BuildWeightsExitCodes) {
  EXPECT_EQ(run("build-weights", "fig1", scratch("w_ok")), kExitOk);
  EXPECT_EQ(run("build-weights", "fig2", scratch("w_fig2")), kExitPrecondition);
  EXPECT_EQ(run("build-weights", "t1_zero", scratch("w_t1")), kExitPrecondition);
  const fs::path out = scratch("w_overflow");
  EXPECT_EQ(run("build-weights", "overflow", out), kExitPrecondition);
  EXPECT_NE(manifest(out)["message"].get<std::string>().find("advisory"), std::string::npos);
}

TEST(Commands, ControlModes) {
  const fs::path hum = scratch("hum");
  EXPECT_EQ(run("control", "hum_moving", hum, "hum"), kExitOk);
  EXPECT_TRUE(fs::exists(hum / "control.csv"));
  const fs::path cas = scratch("cascade");
  EXPECT_EQ(run("control", "cascade", cas, "cascade"), kExitOk);
  for (const char* f : {"cascade_report.txt", "phase1_residuals.csv", "control.csv", "w.csv"})
    EXPECT_TRUE(fs::exists(cas / f)) << f;
  // Cascade control needs b = 1.
  EXPECT_EQ(run("control", "hum_moving", scratch("cascade_b"), "cascade"), kExitPrecondition);
  EXPECT_EQ(run("control", "hum_moving", scratch("bad_mode"), "other"), kExitConfig);
}

TEST(Commands, SimulateAndObservability) {
  const fs::path sim = scratch("simulate");
  EXPECT_EQ(run("simulate", "fig1", sim), kExitOk);
  EXPECT_TRUE(fs::exists(sim / "norms.csv"));
  EXPECT_EQ(run("estimate-observability", "obs_transport", scratch("obs_t")), kExitOk);
  EXPECT_EQ(run("estimate-observability", "obs_moving_coarse", scratch("obs_m")), kExitOk);
  // The fine static estimate cannot be certified.
  EXPECT_EQ(run("estimate-observability", "obs_static_fine", scratch("obs_s")), kExitNumerical);
}

TEST(Commands, VerifyCarlemanRequiresAdmissibleGeometry) {
  EXPECT_EQ(run("verify-carleman", "fig6", scratch("carl_bad")), kExitPrecondition);
}

TEST(Commands, MissingFileAndUnknownCommand) {
  std::ostringstream err;
  EXPECT_EQ(run_command_file("check-geometry", "/nonexistent.cfg", "", std::nullopt, std::nullopt, err), kExitConfig);
  EXPECT_EQ(run_command("frobnicate", RunConfig{}, "", err), kExitConfig);
}

TEST(Commands, SeedOverrideIsRecorded) {
  const fs::path out = scratch("seed");
  std::ostringstream err;
  ASSERT_EQ(run_command_file("check-geometry", fixture("fig1"), "", out, 42ULL, err), kExitOk);
  EXPECT_EQ(manifest(out)["seed"], 42);
}

TEST(Executable, ArgumentErrorsExitWithConfigCode) {
  const std::string exe = VISCOCTL_CLI_PATH;
  EXPECT_EQ(WEXITSTATUS(std::system((exe + " > /dev/null 2>&1").c_str())), kExitConfig);
  EXPECT_EQ(WEXITSTATUS(std::system((exe + " check-geometry > /dev/null 2>&1").c_str())), kExitConfig);
  EXPECT_EQ(WEXITSTATUS(std::system((exe + " --help > /dev/null 2>&1").c_str())), kExitOk);
  const fs::path out = scratch("exe");
  const std::string ok = exe + " check-geometry --config " + fixture("fig1").string() + " --out " + out.string();
  EXPECT_EQ(WEXITSTATUS(std::system(ok.c_str())), kExitOk);
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
}
