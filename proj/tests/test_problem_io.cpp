#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#if defined(__unix__) || defined(__APPLE__)
#include <sys/wait.h>
#endif

#include <gtest/gtest.h>

#include "resbound/resbound.hpp"

using namespace resbound;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::MethodMismatch;
}

ProblemFile parse(const char* text) { return parse_problem(Json::parse(text)); }

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "resbound_io_tests";
  fs::create_directories(dir);
  return dir;
}

fs::path write(const std::string& name, const std::string& text) {
  const fs::path path = scratch() / name;
  std::ofstream(path) << text;
  return path;
}

struct Run {
  int status = -1;
  std::string out;
  std::string err;
};

Run cli(const std::string& args) {
  const fs::path out = scratch() / "stdout.txt";
  const fs::path err = scratch() / "stderr.txt";
  const std::string cmd = std::string("\"") + RESBOUND_CLI + "\" " + args + " > \"" + out.string() + "\" 2> \"" +
                          err.string() + "\"";
  Run r;
  const int raw = std::system(cmd.c_str());
#ifdef WIFEXITED
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
#else
  r.status = raw;
#endif
  std::stringstream so, se;
  so << std::ifstream(out).rdbuf();
  se << std::ifstream(err).rdbuf();
  r.out = so.str();
  r.err = se.str();
  return r;
}

std::string sample(const char* name) { return std::string("\"") + RESBOUND_SOURCE_DIR + "/problems/" + name + "\""; }

constexpr const char* kOdeA = R"({
  "kind": "ode",
  "coefficients": [2, 3],
  "domain": {"T": 1, "K": 200},
  "residual": {"expression": "0.1"}
})";

}  // namespace

TEST(ParseProblem, MinimalOde) {
  const auto p = parse(kOdeA);
  EXPECT_EQ(p.kind, ProblemKind::Ode);
  EXPECT_EQ(p.intervals, 200u);
  const auto s = loose_bound(build_ode(p));
  EXPECT_NEAR(s.series.bound.back(), 0.05, 1e-12);
}

TEST(ParseProblem, SchemaErrors) {
  EXPECT_EQ(kind_of([] { parse(R"({"coefficients": [1]})"); }), ErrorKind::SchemaError);
  EXPECT_EQ(kind_of([] { parse(R"({"kind": "heat"})"); }), ErrorKind::SchemaError);
  EXPECT_EQ(kind_of([] { parse(R"({"kind": "ode", "coefficients": [1], "domain": {"T": 1}, "residual": {"expression": "1"}, "extra": 0})"); }),
            ErrorKind::SchemaError);
  EXPECT_EQ(kind_of([] { parse(R"({"kind": "ode", "coefficients": "1", "domain": {"T": 1}, "residual": {"expression": "1"}})"); }),
            ErrorKind::SchemaError);
  EXPECT_EQ(kind_of([] { parse(R"({"kind": "ode", "coefficients": [1], "domain": {"T": 1}, "residual": {}})"); }),
            ErrorKind::SchemaError);
  EXPECT_EQ(kind_of([] { parse(R"({"kind": "ode", "coefficients": [1], "domain": {"T": 1}, "residual": {"expression": "x"}})"); }),
            ErrorKind::SchemaError);
  EXPECT_EQ(kind_of([] { parse(R"({"kind": "ode", "coefficients": [1], "domain": {"T": -1}, "residual": {"expression": "1"}})"); }),
            ErrorKind::InvalidDomain);
  EXPECT_EQ(kind_of([] { parse(R"({"kind": "ode", "coefficients": [1], "domain": {"T": 1}, "residual": {"expression": "1+"}})"); }),
            ErrorKind::SyntaxError);
}

TEST(ParseProblem, CsvResidualRelativeToFile) {
  write("r.csv", "t,r\n0,0.1\n0.5,0.1\n1,0.1\n");
  const fs::path path = write("csv_problem.json", R"({"kind": "ode", "coefficients": [2, 3], "domain": {"T": 1, "K": 100},
    "residual": {"csv": "r.csv"}})");
  const auto p = load_problem(path);
  EXPECT_NEAR(tight_bound(build_ode(p)).bound.back(), tight_bound(build_ode(parse(kOdeA))).bound.back(), 1e-3);
}

// Every catalog case survives export -> JSON text -> parse -> build with the
// same bound as the in-memory problem.
TEST(ExportCase, RoundTripsThroughJson) {
  for (const auto& mc : oracle::catalog()) {
    const ProblemFile exported = export_case(mc);
    const Json text = Json::parse(to_json(exported).dump());
    const ProblemFile back = parse_problem(text);
    EXPECT_EQ(to_json(back).dump(), to_json(exported).dump()) << mc.id;

    std::visit(
        [&](const auto& c) {
          using C = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<C, oracle::OdeCase>) {
            const auto a = tight_bound(c.problem(500));
            auto p = back;
            p.intervals = 500;
            const auto b = tight_bound(build_ode(p));
            for (std::size_t k = 0; k < a.t.size(); ++k) EXPECT_NEAR(a.bound[k], b.bound[k], 1e-14) << mc.id;
          } else if constexpr (std::is_same_v<C, oracle::SystemCase>) {
            auto p = back;
            p.intervals = 500;
            const auto a = norm_bound(c.problem(500));
            const auto b = norm_bound(build_system(p));
            for (std::size_t k = 0; k < a.t.size(); ++k) EXPECT_NEAR(a.norm[k], b.norm[k], 1e-10 * (1 + a.norm[k])) << mc.id;
          } else if constexpr (std::is_same_v<C, oracle::DuffingCase>) {
            auto p = back;
            p.intervals = 500;
            const auto a = component_bounds(c.problem(500));
            const auto b = component_bounds(build_nonlinear(p));
            for (std::size_t j = 0; j < a.bound.size(); ++j) {
              EXPECT_NEAR(max_abs(a.bound[j]), max_abs(b.bound[j]), 1e-12 * (1 + max_abs(a.bound[j]))) << mc.id;
            }
          } else {
            const auto q = build_pde(back);
            EXPECT_NEAR(constant_bound(c.pde, 64, 64).bound, constant_bound(q, 64, 64).bound, 1e-14) << mc.id;
          }
        },
        mc.definition);
  }
}

TEST(Cli, TightBoundWritesOneRowPerNode) {
  const fs::path out = scratch() / "b.csv";
  const auto r = cli("bound --problem " + sample("ode_a.json") + " --method tight --out \"" + out.string() + "\"");
  ASSERT_EQ(r.status, 0) << r.err;
  std::ifstream f(out);
  std::string line;
  std::getline(f, line);
  EXPECT_EQ(line, "t,B");
  std::size_t rows = 0;
  while (std::getline(f, line)) ++rows;
  EXPECT_EQ(rows, 10001u);
}

TEST(Cli, UnstableLooseBoundExitsFour) {
  const auto r = cli("bound --problem " + sample("ode_c.json") + " --method loose");
  EXPECT_EQ(r.status, 4);
  EXPECT_NE(r.err.find("UnstableSystem"), std::string::npos) << r.err;
}

TEST(Cli, ConstantBoundIsSingleJsonValue) {
  const auto r = cli("bound --problem " + sample("pde_const.json") + " --method const");
  ASSERT_EQ(r.status, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_TRUE(j.contains("B"));
  EXPECT_GT(j["B"].get<double>(), 0.0);
}

TEST(Cli, MethodMismatchExitsThree) {
  const auto r = cli("bound --problem " + sample("ode_a.json") + " --method characteristic");
  EXPECT_EQ(r.status, 3);
  EXPECT_NE(r.err.find("MethodMismatch"), std::string::npos);
}

TEST(Cli, SchemaErrorsExitTwo) {
  const fs::path bad = write("bad.json", R"({"kind": "ode", "coefficients": [1], "bogus": true})");
  EXPECT_EQ(cli("bound --problem \"" + bad.string() + "\" --method tight").status, 2);
  const fs::path broken = write("broken.json", "{ not json");
  EXPECT_EQ(cli("bound --problem \"" + broken.string() + "\" --method tight").status, 2);
  EXPECT_EQ(cli("bound --problem " + sample("ode_a.json") + " --method fastest").status, 2);
  EXPECT_EQ(cli("bound --method tight").status, 2);
}

TEST(Cli, CoefficientVanishesExitsFour) {
  const fs::path p = write("vanish.json", R"({"kind": "pde", "a": "1", "b": "0", "c": "x", "f": "0",
    "domain": {"x": [-1, 1], "y": [-1, 1], "mesh": [32, 32]}, "gamma": [{"edge": "left"}],
    "residual": {"expression": "1"}})");
  const auto r = cli("bound --problem \"" + p.string() + "\" --method const");
  EXPECT_EQ(r.status, 4);
  EXPECT_NE(r.err.find("CoefficientVanishes"), std::string::npos);
}

TEST(Cli, PlotDataAddsErrorColumn) {
  const auto r = cli("bound --problem " + sample("ode_a.json") + " --method tight --emit-plot-data --grid-k 100");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "t,B,abs_error");
  std::size_t rows = 0;
  for (char c : r.out) rows += c == '\n';
  EXPECT_EQ(rows, 102u);
}

TEST(Cli, JsonFormat) {
  const auto r = cli("bound --problem " + sample("sys_6.json") + " --method componentwise --format json --grid-k 50");
  ASSERT_EQ(r.status, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["t"].size(), 51u);
  EXPECT_EQ(j["B"][0].size(), 6u);
}

TEST(Cli, VerifySingleCase) {
  const auto r = cli("verify --case ODE-A");
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("ODE-A"), std::string::npos);
  EXPECT_EQ(r.out.find("ODE-B"), std::string::npos);
}

TEST(Cli, VerifyWithZeroPerturbation) {
  const auto r = cli("verify --case SYS-6 --perturbation-scale 0");
  EXPECT_EQ(r.status, 0) << r.out;
}

TEST(Cli, ExportedFilesMatchCommittedSamples) {
  const fs::path dir = scratch() / "export";
  fs::remove_all(dir);
  ASSERT_EQ(cli("export --case ODE-B --out \"" + dir.string() + "\"").status, 0);
  std::stringstream a, b;
  a << std::ifstream(dir / "ode_b.json").rdbuf();
  b << std::ifstream(fs::path(RESBOUND_SOURCE_DIR) / "problems" / "ode_b.json").rdbuf();
  EXPECT_EQ(a.str(), b.str());
}
