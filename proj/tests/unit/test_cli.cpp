#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "semirobin/cli.hpp"
#include "semirobin/io.hpp"

using namespace semirobin;

namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out, err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string config(const std::string& name) { return (fs::path(SEMIROBIN_CONFIG_DIR) / name).string(); }

fs::path out_dir() {
  const auto d = fs::temp_directory_path() / "semirobin_cli_test";
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Cli, SpectrumWritesTableAndCertificates) {
  const CliRun r = run({"spectrum", config("linear.ini"), "-o", out_dir().string(), "--dump-forms"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(out_dir() / "linear_spectrum.csv"));
  EXPECT_TRUE(fs::exists(out_dir() / "linear_gamma.csv"));
  EXPECT_TRUE(fs::exists(out_dir() / "linear_mesh.json"));
  std::ifstream in(out_dir() / "linear_certificates.json");
  const Json j = Json::parse(in);
  EXPECT_GT(j["coercivity"]["c0"].get<double>(), 0.0);
  ASSERT_EQ(j["gap_certificates"].size(), 2u);
  for (const auto& g : j["gap_certificates"]) EXPECT_GT(g["constant"].get<double>(), 0.0);
  EXPECT_TRUE(j["first_eigen"]["ok"].get<bool>());
}

TEST(Cli, CheckFExitCodes) {
  const CliRun bad = run({"check-f", config("linear.ini")});
  EXPECT_EQ(bad.code, kExitVerdict);
  EXPECT_NE(bad.out.find("(iii) resonance at infinity    FAIL"), std::string::npos) << bad.out;
  const CliRun sq = run({"check-f", config("square.ini")});
  EXPECT_EQ(sq.code, kExitVerdict);
  EXPECT_NE(sq.out.find("(i) linear growth              FAIL"), std::string::npos) << sq.out;
  const CliRun good = run({"check-f", config("reference.ini")});
  EXPECT_EQ(good.code, kExitOk) << good.out;
}

TEST(Cli, SolveAndVerifyRobinInterval) {
  const CliRun r = run({"solve", config("robin_interval.ini"), "-o", out_dir().string()});
  ASSERT_EQ(r.code, kExitOk) << r.out << r.err;
  std::ifstream in(out_dir() / "robin_interval_report.json");
  const Json j = Json::parse(in);
  EXPECT_TRUE(j["success"].get<bool>());
  EXPECT_EQ(j["solutions"].size(), 2u);
  EXPECT_EQ(j["config"]["domain"]["n"].get<int>(), 257);
  for (int i = 0; i < 2; ++i) {
    const auto csv = out_dir() / ("robin_interval_solution_" + std::to_string(i) + ".csv");
    const CliRun v = run({"verify", config("robin_interval.ini"), csv.string()});
    EXPECT_EQ(v.code, kExitOk) << v.out << v.err;
  }
}

TEST(Cli, VerifyRejectsPerturbedSolution) {
  const auto src = out_dir() / "perturbed.csv";
  {
    std::ofstream f(src);
    f << "node,x,u\n";
    for (int i = 0; i < 257; ++i) f << i << ',' << i / 256.0 << ',' << 0.1 * ((i % 7) - 3) << '\n';
  }
  const CliRun v = run({"verify", config("robin_interval.ini"), src.string()});
  EXPECT_EQ(v.code, kExitVerdict);
  EXPECT_NE(v.out.find("FAIL"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  const CliRun missing = run({"solve"});
  EXPECT_EQ(missing.code, kExitUsage);
  EXPECT_NE(missing.err.find("solve"), std::string::npos);
  EXPECT_EQ(run({"solve", "/nonexistent/config.ini"}).code, kExitUsage);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
}

TEST(Cli, ConfigErrorsAreUsageErrors) {
  const auto path = out_dir() / "bad.ini";
  {
    std::ofstream f(path);
    f << "[domain]\nn = 10\nfoo = 1\n[reaction]\n";
  }
  const CliRun r = run({"spectrum", path.string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("foo"), std::string::npos);
  EXPECT_NE(r.err.find("line 3"), std::string::npos);
}
