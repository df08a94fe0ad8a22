#include "fbv/cli/experiment.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "fbv/numeric.hpp"

using namespace fbv::cli;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fbv");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / ("fbv_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(CliConfig, DefaultsAndOverrides) {
  const auto c = resolve("green-stokes", {{"level", "5"}});
  EXPECT_EQ(c.values.at("level"), "5");
  EXPECT_EQ(c.values.at("domain"), "interval");
  EXPECT_EQ(c.values.at("seed"), "1");
  EXPECT_EQ(experiments().size(), 5u);
}

TEST(CliConfig, UsageErrorsNameTheKey) {
  EXPECT_THROW(resolve("no-such-experiment", {}), UsageError);
  auto key_of = [](const std::string& exp, std::map<std::string, std::string> o) {
    try {
      resolve(exp, o);
    } catch (const UsageError& e) {
      return e.key();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(key_of("mollify", {{"bogus", "1"}}), "bogus");
  EXPECT_EQ(key_of("mollify", {{"eps", "0.1,-2"}}), "eps");
  EXPECT_EQ(key_of("mollify", {{"f", "x1 +"}}), "f");
  EXPECT_EQ(key_of("mollify", {{"level", "2.5"}}), "level");
  EXPECT_EQ(key_of("bmk-verify", {{"q", "1"}}), "q");
  EXPECT_EQ(key_of("bmk-verify", {{"n", "2"}, {"q", "1"}}), "antiholo");
  EXPECT_EQ(key_of("green-stokes", {{"a", "1,2"}}), "a");
  EXPECT_EQ(key_of("green-stokes", {{"format", "xml"}}), "format");
  EXPECT_EQ(key_of("young-scan", {{"b", "0.5"}}), "b");
  EXPECT_EQ(key_of("young-scan", {{"t", "2"}, {"s", "1"}}), "t");
}

TEST(Run, CauchyFormulaExample) {
  const auto r = run_experiment(resolve("bmk-verify", {{"f", "z1^2"}}));
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.columns, (std::vector<std::string>{"x1", "x2", "level", "residual", "boundary_term_norm",
                                                 "volume_term_norm", "potential_dbar_norm"}));
  EXPECT_EQ(r.rows.size(), 8u);
}

TEST(Run, SameSeedSameRows) {
  for (const std::string exp : {"bmk-verify", "young-scan"}) {
    std::map<std::string, std::string> o{{"seed", "42"}};
    if (exp == "young-scan") o = {{"seed", "42"}, {"fit_level", "3"}, {"samples", "4"}, {"level", "1"}};
    const auto a = run_experiment(resolve(exp, o));
    const auto b = run_experiment(resolve(exp, o));
    EXPECT_EQ(a.rows, b.rows) << exp;
    o["seed"] = "43";
    EXPECT_NE(run_experiment(resolve(exp, o)).rows, a.rows) << exp;
  }
}

TEST(Run, ThresholdsMoveOnlyTheVerdict) {
  const auto loose = run_experiment(resolve("green-stokes", {}));
  const auto tight = run_experiment(resolve("green-stokes", {{"max_residual", "1e-300"}}));
  EXPECT_EQ(loose.rows, tight.rows);
  EXPECT_TRUE(loose.pass());
  // The hand case u = x, v = 1 is exact in floating point.
  EXPECT_EQ(loose.checks[0].value, 0.0);
  const auto shifted = run_experiment(resolve("green-stokes", {{"u", "exp(x1)"}, {"level", "0"},
                                                               {"steps", "1"}, {"max_residual", "1e-300"}}));
  EXPECT_FALSE(shifted.pass());
}

TEST(Run, NumericalFailureIsAFailedReport) {
  // Not supported inside the strip's support box: the field constructor rejects it.
  const auto r = run_experiment(resolve("mollify", {{"f", "1"}, {"level", "3"}, {"eps", "0.2"}, {"p", "1"}}));
  EXPECT_FALSE(r.error.empty());
  EXPECT_FALSE(r.pass());
}

TEST(Emit, EmptyRowsGiveHeaderOnlyCsvAndValidJson) {
  // No case applies at p = 1.5 for t = s = 2, a = b = 1.
  const auto config = resolve("young-scan", {{"t", "2"}, {"s", "2"}, {"a", "1"}, {"b", "1"}, {"p", "1.5"},
                                             {"fit_level", "3"}});
  const auto r = run_experiment(config);
  EXPECT_TRUE(r.rows.empty());
  const fs::path csv = scratch_dir() / "empty.csv";
  emit_report(r, config, csv, "csv");
  EXPECT_EQ(slurp(csv), "t,s,a,b,p,r,case,estimate,level\n");
  const auto j = nlohmann::json::parse(slurp(csv.string() + ".json"));
  EXPECT_EQ(j["row_count"], 0);
  EXPECT_EQ(j["columns"].size(), 9u);
  EXPECT_TRUE(j.contains("verdict"));
  EXPECT_THROW(emit_report(r, config, "/nonexistent-dir/x.csv", "csv"), fbv::Error);
}

TEST(Cli, ExitCodesMirrorTheVerdict) {
  const fs::path dir = scratch_dir();
  const auto pass = cli({"green-stokes", "--out", (dir / "gs.csv").string()});
  EXPECT_EQ(pass.code, 0) << pass.err;
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "gs.csv.json"))["verdict"], "pass");
  const auto fail = cli({"green-stokes", "--u", "exp(x1)", "--level", "0", "--steps", "1",
                         "--max_residual", "1e-300", "--out", (dir / "gs2.json").string(), "--format", "json"});
  EXPECT_EQ(fail.code, 1);
  const auto j = nlohmann::json::parse(slurp(dir / "gs2.json"));
  EXPECT_EQ(j["verdict"], "fail");
  EXPECT_EQ(j["rows"].size(), 1u);
  EXPECT_EQ(cli({"no-such-experiment"}).code, 2);
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"mollify", "--eps", "abc"}).code, 2);
  EXPECT_EQ(cli({"green-stokes", "--bogus", "1"}).code, 2);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(Cli, IniConfigWithFlagOverrides) {
  const fs::path dir = scratch_dir();
  const fs::path ini = dir / "box.ini";
  std::ofstream(ini) << "[green-stokes]\ndomain = box\nlo = -1, -1\nhi = 1, 0.5\na = 1, i*x1\n"
                        "u = x1*x2^2 + zb1\nv = exp(x2)\nlevel = 2\nmax_residual = 1e-8\n";
  const auto r = cli({"--config", ini.string(), "green-stokes", "--steps", "2", "--out", "-"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "level,lhs_re,lhs_im,rhs_re,rhs_im,residual");
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 3);
  EXPECT_EQ(r.out.compare(r.out.find('\n') + 1, 2, "2,"), 0);
  std::ofstream(dir / "bad.ini") << "[green-stokes]\nbogus = 1\n";
  EXPECT_EQ(cli({"--config", (dir / "bad.ini").string()}).code, 2);
}
