#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "minres/cli.hpp"

using namespace minres;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "minres");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string temp(const std::string& name) { return (fs::path(::testing::TempDir()) / name).string(); }

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

double sigma_of(const std::string& line) {
  const auto p = line.find("sigma2=");
  return p == std::string::npos ? -1.0 : std::stod(line.substr(p + 7));
}

}  // namespace

TEST(CliSigma, ReportsOptimalResolution) {
  const auto a = run_cli({"sigma", "--n", "2", "--r", "4"});
  EXPECT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, "n=2 r=4 sigma2=0.548709\n");
  const auto b = run_cli({"sigma", "--n", "2", "--r", "3", "--rprime", "4"});
  EXPECT_EQ(b.code, 0) << b.err;
  EXPECT_TRUE(contains(b.out, "r'=4 ")) << b.out;
  EXPECT_NEAR(sigma_of(b.out), 0.691, 1e-3) << b.out;
  const auto c = run_cli({"sigma", "--n", "1", "--r", "7"});
  EXPECT_NEAR(sigma_of(c.out), 0.0603, 1e-4) << c.out;
  const auto d = run_cli({"sigma", "--n", "2", "--r", "3", "--symmetry", "both"});
  EXPECT_TRUE(contains(d.out, "agree")) << d.out;
}

TEST(CliSigma, JsonCsvAndCoefficientFile) {
  const auto j = run_cli({"sigma", "--n", "2", "--r", "2:3", "--format", "json"});
  ASSERT_EQ(j.code, 0) << j.err;
  const auto arr = nlohmann::json::parse(j.out);
  ASSERT_EQ(arr.size(), 2u);
  EXPECT_NEAR(arr[0].at("sigma2").get<double>(), 1.0, 1e-6);
  EXPECT_TRUE(arr[0].contains("reduced"));

  const auto c = run_cli({"sigma", "--n", "2", "--r", "4", "--format", "csv"});
  std::istringstream is(c.out);
  std::string header;
  std::string row;
  std::getline(is, header);
  std::getline(is, row);
  EXPECT_EQ(header, "n,r,rprime,sigma2");
  EXPECT_NEAR(std::stod(row.substr(row.rfind(',') + 1)), solve_kernel(2, 4).sigma2, 1e-9);

  const auto path = temp("cli_kernel.json");
  ASSERT_EQ(run_cli({"sigma", "--n", "2", "--r", "4", "--out", path}).code, 0);
  const auto k = io::read_kernel_file(path);
  EXPECT_EQ(k.r(), 4);
  const auto a = run_cli({"approx", "--kernel-file", path, "--func", "builtin:one", "--grid", "11"});
  EXPECT_EQ(a.code, 0) << a.err;
  EXPECT_TRUE(contains(a.out, "error=0.000000")) << a.out;
}

TEST(CliBlocks, TableRows) {
  const auto a = run_cli({"blocks", "--n", "5", "--r", "5"});
  EXPECT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, "n | r | k(n,r) | k_1, ..., k_k | s(n,r)\n5 | 5 | 5 | 19, 25, 14, 8, 3 | 252\n");
  EXPECT_TRUE(contains(run_cli({"blocks", "--n", "2", "--r", "1"}).out, "2 | 1 | 2 | 2, 1 | 3\n"));
  EXPECT_TRUE(contains(run_cli({"blocks", "--n", "3", "--r", "10"}).out, "3 | 10 | 3 | 67, 94, 31 | 286\n"));
  const auto j = nlohmann::json::parse(run_cli({"blocks", "--n", "3", "--r", "3", "--format", "json"}).out);
  EXPECT_EQ(j[0].at("dims"), nlohmann::json({7, 6, 1}));
}

TEST(CliApprox, KernelsAndSweeps) {
  const auto d = run_cli({"approx", "--n", "2", "--r", "3", "--func", "builtin:one", "--kernel", "dirichlet", "--grid", "11"});
  EXPECT_EQ(d.code, 0) << d.err;
  EXPECT_EQ(d.out, "func=one kernel=dirichlet n=2 r=3 grid=11 error=0.000000\n");

  const auto serial = run_cli({"approx", "--n", "2", "--r", "2:6", "--func", "qsin", "--grid", "21", "--threads", "1"});
  const auto threaded = run_cli({"approx", "--n", "2", "--r", "2:6", "--func", "qsin", "--grid", "21", "--threads", "3"});
  EXPECT_EQ(serial.code, 0) << serial.err;
  EXPECT_EQ(serial.out, threaded.out);
  std::istringstream is(threaded.out);
  std::string line;
  int expect_r = 2;
  while (std::getline(is, line)) EXPECT_TRUE(contains(line, " r=" + std::to_string(expect_r++) + " ")) << line;
  EXPECT_EQ(expect_r, 7);

  const auto grid = temp("cli_grid.csv");
  ASSERT_EQ(run_cli({"approx", "--n", "2", "--r", "4", "--kernel", "product", "--grid", "5", "--out", grid}).code, 0);
  std::ifstream g(grid);
  std::string header;
  std::getline(g, header);
  EXPECT_EQ(header, "x1,x2,f,approx");
  int rows = 0;
  while (std::getline(g, line)) ++rows;
  EXPECT_EQ(rows, 25);
}

TEST(CliExitCodes, UsageAndFailures) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"sigma", "--n", "0"}).code, 2);
  EXPECT_EQ(run_cli({"sigma", "--r", "x"}).code, 2);
  EXPECT_EQ(run_cli({"sigma", "--r", "3", "--rprime", "2"}).code, 2);
  EXPECT_EQ(run_cli({"sigma", "--symmetry", "sideways"}).code, 2);
  EXPECT_EQ(run_cli({"approx", "--func", "table:/nonexistent.json"}).code, 2);
  EXPECT_EQ(run_cli({"approx", "--kernel", "product", "--r", "5"}).code, 2);
  EXPECT_EQ(run_cli({"regress", "--stretch", "--fast"}).code, 2);
  const auto fail = run_cli({"sigma", "--n", "3", "--r", "3", "--max-iters", "1"});
  EXPECT_EQ(fail.code, 1);
  EXPECT_TRUE(contains(fail.err, "iteration limit")) << fail.err;
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(CliConfig, FlagsOverrideSidecar) {
  const auto cfg = temp("cli_config.json");
  std::ofstream(cfg) << R"({"n": 1, "r": 7, "symmetry": "off"})";
  EXPECT_TRUE(contains(run_cli({"sigma", "--config", cfg}).out, "n=1 r=7 sigma2=0.060307"));
  EXPECT_EQ(run_cli({"sigma", "--config", cfg, "--r", "5"}).out, "n=1 r=5 sigma2=0.099031\n");
  std::ofstream(cfg) << R"({"colour": "blue"})";
  EXPECT_EQ(run_cli({"sigma", "--config", cfg}).code, 2);
}

TEST(CliRegress, SelectedCriterion) {
  const auto r = run_cli({"regress", "--only", "3"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_TRUE(contains(r.out, "[pass] criterion 3")) << r.out;
  EXPECT_TRUE(contains(r.out, "PASS")) << r.out;
}

TEST(CliBinary, ExitStatusFromProcess) {
  const std::string bin = MINRES_CLI_PATH;
  auto status = [&](const std::string& args) {
    const int s = std::system((bin + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status("sigma --n 2 --r 2"), 0);
  EXPECT_EQ(status("sigma --n 3 --r 3 --max-iters 1"), 1);
  EXPECT_EQ(status("bogus"), 2);
  FILE* p = popen((bin + " sigma --n 2 --r 4").c_str(), "r");
  ASSERT_NE(p, nullptr);
  char buf[256] = {};
  const std::string line = fgets(buf, sizeof buf, p) ? buf : "";
  pclose(p);
  EXPECT_EQ(line, "n=2 r=4 sigma2=0.548709\n");
}
