#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "avgsfde/io.hpp"

using namespace avgsfde;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  fs::path out, err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("avg_sfde_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Run run(const std::string& args, const std::string& tag) {
  Run r{0, scratch() / (tag + ".out"), scratch() / (tag + ".err")};
  const std::string cmd = std::string(AVG_SFDE_BINARY) + " " + args + " >" + r.out.string() + " 2>" + r.err.string();
  const int status = std::system(cmd.c_str());
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

io::Document document(const fs::path& p) {
  std::ifstream in(p);
  return io::read_document(in);
}

io::Table table(const fs::path& p) {
  std::ifstream in(p);
  return io::read_table(in);
}

}  // namespace

TEST(Cli, ClassifyDegenerateExample) {
  const auto r = run("classify --a -1 --b -2", "classify");
  ASSERT_EQ(r.code, 0) << slurp(r.err);
  const auto d = document(r.out);
  EXPECT_EQ(d.command, "classify");
  EXPECT_EQ(d.at("regime").get("label"), "RecurrentOU");
  EXPECT_TRUE(d.at("regime").flag("degenerate_integer"));
  EXPECT_EQ(d.at("regime").number("integer_ratio"), 2.0);
  EXPECT_EQ(d.at("params").number("alpha"), 2.0);
  EXPECT_EQ(d.at("params").number("beta"), -3.0);
}

TEST(Cli, MarketParametrization) {
  const auto r = run("classify --alpha 1 --beta -2", "market");
  ASSERT_EQ(r.code, 0) << slurp(r.err);
  const auto d = document(r.out);
  EXPECT_EQ(d.at("params").number("a"), -1.0);
  EXPECT_EQ(d.at("params").number("b"), -1.0);
  EXPECT_EQ(d.at("regime").get("label"), "RecurrentOU");
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("classify --a 1 --alpha 2", "mixed").code, 2);
  EXPECT_EQ(run("classify --a 1", "half").code, 2);
  EXPECT_EQ(run("classify --a x --b 1", "nan").code, 2);
  EXPECT_EQ(run("nonsense", "unknown").code, 2);
  EXPECT_EQ(run("mean --a -1 --b 2 --sigma 0", "sigma").code, 2);
  EXPECT_EQ(run("mean --a -1 --b 2 --t 5:1:1", "grid").code, 2);
  EXPECT_EQ(run("simulate --a -1 --b 0.5 --t-max 1 --dt 0.5", "dt").code, 2);
}

TEST(Cli, UnsupportedRegimeExitsThree) {
  const auto r = run("acf --a 1 --b 1", "acf_growth");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(slurp(r.err).find("ExponentialGrowth"), std::string::npos);
}

TEST(Cli, MeanTableMatchesLibraryConventions) {
  const auto r = run("mean --a -1 --b 2 --t 1:10:lin3", "mean");
  ASSERT_EQ(r.code, 0) << slurp(r.err);
  const auto t = table(r.out);
  EXPECT_EQ(t.command, "mean");
  ASSERT_EQ(t.rows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_NEAR(t.number(i, "ratio"), t.number(i, "x") / t.number(i, "normalizer"), 1e-14);
  const std::string summary = slurp(r.err);
  EXPECT_NE(summary.find("[limit]"), std::string::npos);
}

TEST(Cli, OutFileSendsSummaryToStdout) {
  const fs::path csv = scratch() / "acf.csv";
  const auto r = run("acf --a -1 --b 0.5 --delta 50:500:log16 --out " + csv.string(), "acf");
  ASSERT_EQ(r.code, 0) << slurp(r.err);
  const auto t = table(csv);
  EXPECT_EQ(t.rows.size(), 16u);
  const auto d = document(r.out);
  EXPECT_NEAR(d.at("decay_fit").number("fitted_exponent"), -0.5, 0.02);
}

TEST(Cli, SimulateIsReproducible) {
  const fs::path c1 = scratch() / "s1.csv", c2 = scratch() / "s2.csv";
  const std::string args = "simulate --a -1 --b 0.5 --t-max 2 --dt 0.1 --n-paths 3 --seed 9 --out ";
  ASSERT_EQ(run(args + c1.string(), "s1").code, 0);
  ASSERT_EQ(run(args + c2.string(), "s2").code, 0);
  EXPECT_EQ(slurp(c1), slurp(c2));
  const auto t = table(c1);
  EXPECT_EQ(t.rows.size(), 3u * 21u);
  const auto ex = run("simulate --scheme exact --a -1 --b 0.5 --t-max 2 --dt 0.1 --n-paths 2", "exact");
  EXPECT_EQ(ex.code, 0) << slurp(ex.err);
  EXPECT_EQ(run("simulate --scheme bogus --a -1 --b 0.5", "bogus").code, 2);
}

TEST(Cli, SweepCoversGrid) {
  const auto r = run("sweep --a-range -1:1:0.5 --b-range -1:1:1", "sweep");
  ASSERT_EQ(r.code, 0) << slurp(r.err);
  const auto t = table(r.out);
  ASSERT_EQ(t.rows.size(), 15u);
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    EXPECT_EQ(t.number(i, "alpha"), -t.number(i, "b"));
}

TEST(Cli, ConfigSectionsAndFlagOverride) {
  const fs::path cfg = scratch() / "run.ini";
  std::ofstream(cfg) << "[classify]\na = -1\nb = 2\n";
  const auto r1 = run("--config " + cfg.string() + " classify", "cfg1");
  ASSERT_EQ(r1.code, 0) << slurp(r1.err);
  EXPECT_EQ(document(r1.out).at("regime").get("label"), "PolynomialGrowth");
  const auto r2 = run("--config " + cfg.string() + " classify --b 0.5", "cfg2");
  ASSERT_EQ(r2.code, 0) << slurp(r2.err);
  EXPECT_EQ(document(r2.out).at("regime").get("label"), "RecurrentOU");
}

TEST(Cli, VerifyExitCodes) {
  const auto ok = run("verify --suite specfun", "verify_ok");
  EXPECT_EQ(ok.code, 0);
  EXPECT_NE((slurp(ok.out) + slurp(ok.err)).find("PASS"), std::string::npos);
  // the autocov suite contains the finite-horizon limit check, which fails at t = 200
  const auto bad = run("verify --suite autocov", "verify_bad");
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE((slurp(bad.out) + slurp(bad.err)).find("FAIL"), std::string::npos);
  EXPECT_EQ(run("verify --suite nope", "verify_unknown").code, 2);
}
