#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hdual/config.hpp"

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

// Runs the CLI through the shell; stderr is merged into out when merge_err.
CliRun run(const std::string& args, bool merge_err = false) {
  const std::string cmd = std::string(HDUAL_CLI) + ' ' + args + (merge_err ? " 2>&1" : " 2>/dev/null");
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "hdual_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string write_file(const std::string& name, const std::string& text) {
  const auto p = scratch(name);
  std::ofstream(p) << text;
  return p.string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, PotentialTableStartsWithBesselI0) {
  const CliRun r = run("--no-header potentials --family xy --beta 1 --table");
  ASSERT_EQ(r.code, 0);
  std::istringstream is(r.out);
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  EXPECT_EQ(header, "n,c_n,V_n");
  ASSERT_EQ(row.substr(0, 2), "0,");
  EXPECT_NEAR(std::stod(row.substr(2)), 1.2660658777520082, 1e-13);
}

TEST(Cli, HeaderLineIsTimestamped) {
  const CliRun r = run("potentials --family ivgff --beta 2 --grid 8");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("# hdual potentials ", 0), 0u);
  EXPECT_NE(r.out.find("alpha,w,U,U1,U2"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("--config " + write_file("empty.ini", "")).code, 2);
  const CliRun blank = run("--config " + write_file("blank.ini", "# nothing\n\n") + " potentials", true);
  EXPECT_EQ(blank.code, 2);
  EXPECT_NE(blank.out.find("Usage"), std::string::npos);
  EXPECT_EQ(run("--config " + write_file("bad.ini", "[graph]\nsides = 3\n") + " potentials").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
}

TEST(Cli, PrintConfigRoundTrips) {
  const std::string cfg = write_file("model.ini",
                                     "[graph]\nbuilder = cycle\nsize = 5\n[potential]\nbeta = 0.7\n"
                                     "[potential hot]\nfamily = ivgff\nbeta = 2\nedges = 0 3\n"
                                     "[mcmc]\nsweeps = 300\nburn_in = 20\nseed = 9\n");
  const CliRun r = run("--config " + cfg + " --print-config");
  ASSERT_EQ(r.code, 0);
  const hdual::RunConfig printed = hdual::config_from_text(r.out);
  EXPECT_EQ(printed, hdual::load_config(cfg));
  EXPECT_EQ(hdual::config_text(printed), r.out);
}

TEST(Cli, SampleIsReproducibleWithoutHeader) {
  const std::string cfg = write_file("cycle.ini", "[graph]\nbuilder = cycle\nsize = 4\n");
  const std::string args = "--config " + cfg + " --no-header sample --sweeps 400 --burnin 50 --chains 2 --seed 3";
  const CliRun a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.rfind("chain,sample,J0,J1,J2,J3\n", 0), 0u);
  EXPECT_NE(a.out, run("--config " + cfg + " --no-header sample --sweeps 400 --burnin 50 --chains 2 --seed 4").out);
  // 350 kept sweeps per chain plus the header
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 701);
}

TEST(Cli, AnalyzeTorusDiamondSamples) {
  const std::string cfg = write_file("torus.ini", "[graph]\nbuilder = torus\nsize = 4\n[oracle]\nsector = diamond\n");
  const std::string samples = scratch("torus.csv").string(), summary = scratch("torus.json").string();
  ASSERT_EQ(run("--config " + cfg + " sample --sweeps 20000 --burnin 1000 --out " + samples).code, 0);
  const CliRun r = run("--config " + cfg + " analyze -i " + samples + " --summary " + summary);
  EXPECT_EQ(r.code, 0) << read_file(summary);
  EXPECT_NE(r.out.find("i,c,c_se,partial"), std::string::npos);
  const std::string json = read_file(summary);
  EXPECT_NE(json.find("\"symmetric_sum\""), std::string::npos);
  EXPECT_NE(json.find("\"pass\": true"), std::string::npos);
}

TEST(Cli, BudgetDiagnosticExitsThree) {
  const CliRun r = run("--budget 10 verify", true);
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("--budget"), std::string::npos);
}

TEST(Cli, VerifyConfiguredModel) {
  const std::string cfg = write_file("theta.ini", "[graph]\nbuilder = theta\n[potential]\nbeta = 0.5\n");
  const CliRun r = run("--config " + cfg + " --no-header verify");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("duality"), std::string::npos);
  EXPECT_EQ(r.out.find(",false"), std::string::npos);
}

TEST(Cli, TransformLogReplays) {
  const std::string graph = write_file("wheel.txt",
                                       "v 0\nv 1\nv 2\nv 3\nv 4\nv 5\n"
                                       "e 0 1 0\ne 0 2 0\ne 0 3 0\ne 0 4 0\ne 1 2 0\ne 2 3 0\ne 3 4 0\ne 4 1 0\n"
                                       "e 5 0 0\nboundary 5\n");
  const std::string log = scratch("ops.log").string();
  const CliRun direct = run("--no-header transform --graph " + graph + " --op star-tree --log-out " + log);
  ASSERT_EQ(direct.code, 0);
  const std::string ops = read_file(log);
  EXPECT_EQ(ops.rfind("reduce 0", 0), 0u) << ops;
  EXPECT_NE(ops.find("merge"), std::string::npos);
  const CliRun replay = run("--no-header transform --graph " + graph + " --log " + log);
  ASSERT_EQ(replay.code, 0);
  EXPECT_EQ(direct.out, replay.out);
  EXPECT_NE(direct.out.find("# vertex_map"), std::string::npos);
}
