#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "locodl/cli/commands.hpp"
#include "locodl/cli/config_file.hpp"
#include "locodl/cli/svg_chart.hpp"
#include "locodl/error.hpp"
#include "locodl/trace.hpp"

using namespace locodl;
using namespace locodl::cli;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"([problem]
source = quadratic
dim = 6
clients = 3
kappa = 50
data_seed = 2

[run]
seeds = 1
stop_sqdist_ratio = 1e-6

[method:locodl]
algorithm = locodl
compressor = identity
)";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("locodl_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  int cli(std::vector<std::string> args) {
    args.insert(args.begin(), "locodl");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST(ConfigFile, ParsesSectionsAndMethods) {
  const ConfigFile f = parse_config(std::string(kMinimal) + "\n[method:gd]\nalgorithm = gd\n", "/data");
  ASSERT_EQ(f.methods.size(), 2u);
  EXPECT_EQ(f.methods[0].label, "locodl");
  EXPECT_EQ(f.methods[1].config.algorithm, Algorithm::gd);
  EXPECT_EQ(f.methods[0].config.clients, 3u);
  EXPECT_EQ(f.methods[0].config.source.data_seed, 2u);
  EXPECT_EQ(f.methods[0].config.stop.sqdist_ratio, 1e-6);
  EXPECT_EQ(f.methods[0].config.config_hash, f.content_hash);
}

TEST(ConfigFile, RelativePathsResolveAgainstConfigDir) {
  const ConfigFile f =
      parse_config("[problem]\nsource = libsvm\npath = ../data/x.libsvm\n[method:a]\nalgorithm = gd\n", "/cfg/run");
  EXPECT_EQ(f.methods[0].config.source.path, "/cfg/data/x.libsvm");
}

TEST(ConfigFile, Errors) {
  EXPECT_THROW(parse_config("[problem]\nsource = quadratic\n", "."), InputError);
  EXPECT_THROW(parse_config("[problem]\nbogus = 1\n[method:a]\nalgorithm = gd\n", "."), InputError);
  EXPECT_THROW(parse_config("[problem]\nkappa = ten\n[method:a]\nalgorithm = gd\n", "."), InputError);
  EXPECT_THROW(parse_config("[problem]\n[method:a]\ncompressor = natural\n", "."), InputError);
  try {
    parse_config("[problem]\nsource = quadratic\nthis line is not ini\n", ".");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ConfigFile, GitBlobHash) {
  EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST_F(CliTest, RunWritesOneCsvWithSchemaHeader) {
  const std::string cfg = write("min.ini", kMinimal);
  ASSERT_EQ(cli({"run", cfg, "--out", (dir_ / "out").string()}), 0) << err_.str();
  const std::string csv = slurp(dir_ / "out" / "locodl_identity_seed1.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), trace_csv_header());
  std::size_t csvs = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "out")) csvs += e.path().extension() == ".csv";
  EXPECT_EQ(csvs, 1u);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "locodl_identity_seed1.meta.txt"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "manifest.txt"));
  for (const char* col : {"gamma", "chi", "rho", "p", "omega", "omega_av", "tau"}) {
    EXPECT_NE(out_.str().find(col), std::string::npos);
  }
}

TEST_F(CliTest, RerunIsByteIdentical) {
  const std::string cfg = write("min.ini", kMinimal);
  ASSERT_EQ(cli({"run", cfg, "--out", (dir_ / "a").string(), "--seeds", "3,4"}), 0);
  ASSERT_EQ(cli({"run", cfg, "--out", (dir_ / "b").string(), "--seeds", "3,4"}), 0);
  for (const char* f : {"locodl_identity_seed3.csv", "locodl_identity_seed4.csv"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f));
    EXPECT_FALSE(slurp(dir_ / "a" / f).empty());
  }
}

TEST_F(CliTest, ResolvedParametersRoundTrip) {
  const std::string cfg = write("rk.ini", std::string(kMinimal) +
                                              "\n[method:diana]\nalgorithm = diana\ncompressor = rand_k\n"
                                              "[method:lk]\nalgorithm = locodl\ncompressor = rand_k_natural\nk = 2\n");
  ASSERT_EQ(cli({"run", cfg, "--out", (dir_ / "a").string()}), 0) << err_.str();
  ASSERT_EQ(cli({"run", (dir_ / "a" / "resolved.ini").string(), "--out", (dir_ / "b").string()}), 0) << err_.str();
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "a")) {
    if (e.path().extension() != ".csv") continue;
    EXPECT_EQ(slurp(e.path()), slurp(dir_ / "b" / e.path().filename())) << e.path();
    ++compared;
  }
  EXPECT_EQ(compared, 3u);
}

TEST_F(CliTest, ConditionViolationExitsThree) {
  const std::string cfg = write("bad.ini", std::string(kMinimal) + "chi = 1.5\n");
  EXPECT_EQ(cli({"run", cfg, "--out", (dir_ / "o").string()}), 3);
  EXPECT_NE(err_.str().find("2*rho - rho^2*(1+omega_av) - chi >= 0"), std::string::npos);
}

TEST_F(CliTest, MissingFilesExitTwo) {
  EXPECT_EQ(cli({"run", (dir_ / "nope.ini").string()}), 2);
  const std::string cfg = write("data.ini", "[problem]\nsource = libsvm\npath = missing.libsvm\n[method:g]\nalgorithm = gd\n");
  EXPECT_EQ(cli({"run", cfg, "--out", (dir_ / "o").string()}), 2);
}

TEST_F(CliTest, DuplicateOutputNamesExitTwo) {
  const std::string cfg = write("dup.ini", std::string(kMinimal) + "[method:again]\nalgorithm = locodl\n");
  EXPECT_EQ(cli({"run", cfg, "--out", (dir_ / "o").string()}), 2);
}

TEST_F(CliTest, OutputDirectoryFromEnvironment) {
  const std::string cfg = write("min.ini", kMinimal);
  const std::string env_dir = (dir_ / "from_env").string();
  ::setenv(kOutDirEnv, env_dir.c_str(), 1);
  const int code = cli({"run", cfg});
  ::unsetenv(kOutDirEnv);
  ASSERT_EQ(code, 0);
  EXPECT_TRUE(fs::exists(fs::path(env_dir) / "locodl_identity_seed1.csv"));
}

TEST_F(CliTest, SweepOverKappa) {
  const std::string cfg = write("min.ini", kMinimal);
  ASSERT_EQ(cli({"sweep", cfg, "--vary", "kappa=10,100,1000", "--out", (dir_ / "s").string()}), 0) << err_.str();
  const CsvTable summary = parse_csv(slurp(dir_ / "s" / "summary.csv"));
  EXPECT_EQ(summary.rows.size(), 3u);
  const std::string exponent = slurp(dir_ / "s" / "exponent.txt");
  EXPECT_EQ(std::count(exponent.begin(), exponent.end(), '\n'), 1);
  EXPECT_EQ(exponent.find("nan"), std::string::npos);
}

TEST_F(CliTest, SweepOverClientsOnDiabetesShapedData) {
  // d = 8 with n = 6, 37, 73 covers n < d, d < n < d^2 and n > d^2
  const std::string cfg = write("diab.ini", R"([problem]
source = synthetic_logistic
name = diabetes_like
dim = 8
samples_per_client = 10
kappa = 100
data_seed = 5

[run]
seeds = 1
stop_sqdist_ratio = 1e-4
max_iterations = 20000

[method:locodl]
algorithm = locodl
compressor = rand_k
)");
  ASSERT_EQ(cli({"sweep", cfg, "--vary", "n=6,37,73", "--out", (dir_ / "s").string()}), 0) << err_.str();
  const CsvTable summary = parse_csv(slurp(dir_ / "s" / "summary.csv"));
  ASSERT_EQ(summary.rows.size(), 3u);
  const std::size_t n_col = summary.column("n");
  EXPECT_EQ(summary.rows[0][n_col], "6");
  EXPECT_EQ(summary.rows[1][n_col], "37");
  EXPECT_EQ(summary.rows[2][n_col], "73");
}

TEST_F(CliTest, EmptyVaryListExitsTwo) {
  const std::string cfg = write("min.ini", kMinimal);
  EXPECT_EQ(cli({"sweep", cfg, "--vary", "kappa="}), 2);
  EXPECT_EQ(cli({"sweep", cfg, "--vary", "kappa"}), 2);
}

TEST_F(CliTest, CertifyIdentity) {
  ASSERT_EQ(cli({"certify", "identity", "-d", "10", "--trials", "10000"}), 0);
  EXPECT_NE(out_.str().find("variance_ratio=0 "), std::string::npos);
  EXPECT_NE(out_.str().find("PASS"), std::string::npos);
}

TEST_F(CliTest, CertifyRandOneOnOnes) {
  ASSERT_EQ(cli({"certify", "rand_k", "-d", "10", "-k", "1", "--probe", "ones"}), 0);
  const std::string text = out_.str();
  const auto pos = text.find("variance_ratio=");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_NEAR(std::stod(text.substr(pos + 15)), 9.0, 0.2);
  EXPECT_NE(text.find("declared_omega=9"), std::string::npos);
}

TEST_F(CliTest, CertifyMisdeclaredOmegaFails) {
  EXPECT_EQ(cli({"certify", "rand_k", "-d", "10", "-k", "1", "--declared-omega", "2"}), 1);
  EXPECT_NE(out_.str().find("FAIL"), std::string::npos);
}

TEST_F(CliTest, CertifyRejectsBadInput) {
  EXPECT_EQ(cli({"certify", "topk"}), 2);
  EXPECT_EQ(cli({"certify", "natural", "--trials", "100"}), 2);
  EXPECT_EQ(cli({"certify", "rand_k", "-d", "4", "-k", "9"}), 2);
}

TEST_F(CliTest, PlotOneAndTwoSeries) {
  const std::string cfg =
      write("two.ini", std::string(kMinimal) + "\n[method:gd]\nalgorithm = gd\n");
  ASSERT_EQ(cli({"run", cfg, "--out", (dir_ / "o").string()}), 0);
  const std::string a = (dir_ / "o" / "locodl_identity_seed1.csv").string();
  const std::string b = (dir_ / "o" / "gd_identity_seed1.csv").string();

  ASSERT_EQ(cli({"plot", a, "--out", (dir_ / "one.svg").string()}), 0);
  std::string svg = slurp(dir_ / "one.svg");
  auto count = [](const std::string& s, const std::string& what) {
    std::size_t n = 0;
    for (auto p = s.find(what); p != std::string::npos; p = s.find(what, p + 1)) ++n;
    return n;
  };
  EXPECT_EQ(count(svg, "<polyline"), 1u);

  ASSERT_EQ(cli({"plot", a, b, "--out", (dir_ / "two.svg").string()}), 0);
  svg = slurp(dir_ / "two.svg");
  EXPECT_EQ(count(svg, "<polyline"), 2u);
  EXPECT_EQ(count(svg, "class=\"legend-entry\""), 2u);
}

TEST_F(CliTest, PlotRejectsForeignSchema) {
  const std::string bad = write("bad.csv", "a,b\n1,2\n");
  EXPECT_EQ(cli({"plot", bad, "--out", (dir_ / "x.svg").string()}), 2);
  EXPECT_FALSE(fs::exists(dir_ / "x.svg"));
}

TEST(SvgChart, DecadeTicks) {
  const std::vector<int> ticks = decade_ticks(1e-8, 1.0);
  ASSERT_EQ(ticks.size(), 9u);
  EXPECT_EQ(ticks.front(), -8);
  EXPECT_EQ(ticks.back(), 0);

  Series s{"demo", {}};
  for (int e = 0; e <= 8; ++e) s.points.emplace_back(e, std::pow(10.0, -e));
  const std::string svg = render_line_chart({s}, ChartOptions{"x", "y"});
  for (int e = -8; e <= 0; ++e) {
    EXPECT_NE(svg.find(">1e" + std::to_string(e) + "<"), std::string::npos) << e;
  }
  EXPECT_EQ(svg.find(">1e1<"), std::string::npos);
  EXPECT_EQ(svg.find(">1e-9<"), std::string::npos);
}

TEST(SvgChart, EscapesLabels) {
  const std::string svg = render_line_chart({Series{"a<b&c", {{0, 1}, {1, 0.1}}}}, ChartOptions{"x", "y"});
  EXPECT_NE(svg.find("a&lt;b&amp;c"), std::string::npos);
}
