#include "cli.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pricekit;
namespace fs = std::filesystem;

namespace {

struct RunOutput {
  int code = -1;
  std::string out;
  std::string err;
};

RunOutput run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  RunOutput r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("pricekit_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write_fixture(const std::string& name) {
    const std::string p = path(name + ".json");
    io::save_instance(p, fixture(name));
    return p;
  }

  fs::path dir_;
};

/// Value printed after `key` on its own line of the solve summary.
double printed(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind(key + " ", 0) == 0) return std::stod(line.substr(key.size() + 1));
  }
  ADD_FAILURE() << "no '" << key << "' line in:\n" << text;
  return std::nan("");
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_F(CliTest, GenerateRoundTripsAndIsDeterministic) {
  const std::string a = path("a.json"), b = path("b.json");
  EXPECT_EQ(run({"generate", "--n", "20", "--m", "4", "--seed", "7", "-o", a}).code, 0);
  EXPECT_EQ(run({"generate", "--n", "20", "--m", "4", "--seed", "7", "-o", b}).code, 0);
  const std::string text = io::read_file(a);
  EXPECT_EQ(text, io::read_file(b));
  GenConfig cfg;
  cfg.n = 20;
  cfg.m = 4;
  cfg.seed = 7;
  EXPECT_EQ(io::dump(io::instance_to_json(io::load_instance(a))), io::dump(io::instance_to_json(generate_instance(cfg))));
}

TEST_F(CliTest, GenerateDivisibilityIsUsageError) {
  const RunOutput r = run({"generate", "--n", "15", "-o", path("c.json")});
  EXPECT_EQ(r.code, 64);
  EXPECT_NE(r.err.find("multiple of the block size"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(path("c.json")));
}

TEST_F(CliTest, GenerateIoError) {
  EXPECT_EQ(run({"generate", "-o", path("no/such/dir/x.json")}).code, 2);
}

TEST_F(CliTest, ArgumentErrors) {
  EXPECT_EQ(run({}).code, 64);
  EXPECT_EQ(run({"frobnicate"}).code, 64);
  EXPECT_EQ(run({"generate", "--n", "twenty", "-o", path("x.json")}).code, 64);
  EXPECT_EQ(run({"generate"}).code, 64);  // -o is required
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({"generate", "--fixture", "nope", "-o", path("x.json")}).code, 64);
}

TEST_F(CliTest, SolvePinnedPrintsNominalMargin) {
  const std::string inst = write_fixture("pinned");
  const RunOutput r = run({"solve", inst, "--method", "qmm", "-o", path("r.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const PricingInstance p = fixture("pinned");
  const std::string expected = cli::significant((p.r_nom - p.kappa_nom).sum());
  EXPECT_NE(r.out.find("profit " + expected + "\n"), std::string::npos) << r.out;
}

TEST_F(CliTest, SolveDiagonalMatchesAnalytic) {
  const std::string inst = write_fixture("diag-10");
  const RunOutput ccp = run({"solve", inst, "--method", "ccp", "-o", path("c.json")});
  const RunOutput analytic = run({"solve", inst, "--method", "analytic", "-o", path("a.json")});
  ASSERT_EQ(ccp.code, 0) << ccp.err;
  ASSERT_EQ(analytic.code, 0) << analytic.err;
  const double pc = printed(ccp.out, "profit");
  const double pa = printed(analytic.out, "profit");
  EXPECT_LE(std::abs(pc - pa) / pa, 1e-3);
}

TEST_F(CliTest, SolveWritesResultAndCsv) {
  const std::string inst = write_fixture("pair-substitutes");
  const RunOutput r = run({"solve", inst, "--method", "pgd", "-o", path("r.json"), "--verify"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("verify: ok"), std::string::npos);
  const SolveResult res = io::result_from_json(io::parse_json(io::read_file(path("r.json")), "r"));
  EXPECT_EQ(res.method, "pgd");
  EXPECT_EQ(res.status, SolveStatus::Converged);
  EXPECT_EQ(static_cast<double>(res.iterations), printed(r.out, "iterations"));
  for (std::size_t k = 1; k < res.profit_trajectory.size(); ++k) {
    EXPECT_GE(res.profit_trajectory[k], res.profit_trajectory[k - 1]);
  }
  const auto csv = lines(io::read_file(path("r.csv")));
  ASSERT_EQ(csv.size(), 3u);
  EXPECT_EQ(csv[0], "index,pi,exp_pi,delta,exp_delta,profit");
  EXPECT_EQ(run({"verify", inst, path("r.json")}).code, 0);
}

TEST_F(CliTest, SolveCsvPathOverride) {
  const std::string inst = write_fixture("scalar-interior");
  ASSERT_EQ(run({"solve", inst, "-o", path("r.json"), "--csv", path("table.csv")}).code, 0);
  EXPECT_TRUE(fs::exists(path("table.csv")));
  EXPECT_FALSE(fs::exists(path("r.csv")));
}

TEST_F(CliTest, VerifyDetectsTampering) {
  const std::string inst = write_fixture("pair-substitutes");
  ASSERT_EQ(run({"solve", inst, "-o", path("r.json")}).code, 0);
  io::Json doc = io::parse_json(io::read_file(path("r.json")), "r");

  io::Json outside = doc;
  outside["pi_star"][0] = 0.5;  // box is +-log 1.2
  io::write_file(path("outside.json"), io::dump(outside));
  EXPECT_EQ(run({"verify", inst, path("outside.json")}).code, 1);

  io::Json wrong_profit = doc;
  wrong_profit["profit_trajectory"].back() = doc["final_profit"].get<double>() * 1.01;
  io::write_file(path("profit.json"), io::dump(wrong_profit));
  EXPECT_EQ(run({"verify", inst, path("profit.json")}).code, 1);

  io::Json wrong_delta = doc;
  wrong_delta["delta_star"][1] = doc["delta_star"][1].get<double>() + 1e-3;
  io::write_file(path("delta.json"), io::dump(wrong_delta));
  EXPECT_EQ(run({"verify", inst, path("delta.json")}).code, 1);

  io::Json short_pi = doc;
  short_pi["pi_star"].erase(1);
  io::write_file(path("short.json"), io::dump(short_pi));
  EXPECT_EQ(run({"verify", inst, path("short.json")}).code, 1);
}

TEST_F(CliTest, SolveExitCodes) {
  EXPECT_EQ(run({"solve", path("missing.json"), "-o", path("r.json")}).code, 2);
  io::write_file(path("bad.json"), "{\"version\": 1,");
  EXPECT_EQ(run({"solve", path("bad.json"), "-o", path("r.json")}).code, 2);

  const std::string gen = path("g.json");
  ASSERT_EQ(run({"generate", "--n", "20", "--m", "4", "--seed", "3", "-o", gen}).code, 0);
  const RunOutput capped = run({"solve", gen, "--method", "qmm", "--max-iters", "1", "-o", path("r.json")});
  EXPECT_EQ(capped.code, 3) << capped.out;
  EXPECT_NE(capped.out.find("status max_iterations"), std::string::npos);

  PricingInstance empty = fixture("pair-substitutes");
  DenseMatrix f(1, 2);
  f << 1.0, 1.0;
  empty.constraints.add_inequality_rows(linalg::from_dense(f), Vector::Constant(1, -1.0));
  io::save_instance(path("empty.json"), empty);
  EXPECT_EQ(run({"solve", path("empty.json"), "-o", path("r.json")}).code, 4);

  const std::string pair = write_fixture("pair-substitutes");
  EXPECT_EQ(run({"solve", pair, "--method", "newton", "-o", path("r.json")}).code, 64);
  EXPECT_EQ(run({"solve", pair, "--method", "analytic", "-o", path("r.json")}).code, 64);
  EXPECT_EQ(run({"solve", pair, "--tol", "0", "-o", path("r.json")}).code, 64);
  EXPECT_EQ(run({"solve", pair, "-o", path("no/such/dir/r.json")}).code, 2);
}

TEST(CliExitCodes, StatusMapping) {
  EXPECT_EQ(cli::exit_code(SolveStatus::Converged), 0);
  EXPECT_EQ(cli::exit_code(SolveStatus::MaxIterations), 3);
  EXPECT_EQ(cli::exit_code(SolveStatus::Infeasible), 4);
  EXPECT_EQ(cli::exit_code(SolveStatus::SubsolverFailure), 5);
  EXPECT_EQ(cli::exit_code(Error(ErrorCode::Io, "x")), 2);
  EXPECT_EQ(cli::exit_code(Error(ErrorCode::Parse, "x")), 2);
  EXPECT_EQ(cli::exit_code(Error(ErrorCode::UnknownName, "x")), 64);
}

TEST_F(CliTest, SolveFromInitFile) {
  const std::string inst = write_fixture("pair-substitutes");
  io::write_file(path("start.json"), R"({"pi": [0.15, -0.1]})");
  const RunOutput r = run({"solve", inst, "--method", "ccp", "--init", path("start.json"), "-o", path("r.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const SolveResult res = io::result_from_json(io::parse_json(io::read_file(path("r.json")), "r"));
  EXPECT_NEAR(res.profit_trajectory.front(), profit(fixture("pair-substitutes"), Vector{{0.15, -0.1}}), 1e-12);

  // A previous result document is also a valid start.
  EXPECT_EQ(run({"solve", inst, "--init", path("r.json"), "-o", path("r2.json")}).code, 0);
  io::write_file(path("short.json"), R"({"pi": [0.1]})");
  EXPECT_EQ(run({"solve", inst, "--init", path("short.json"), "-o", path("r3.json")}).code, 2);
}

TEST_F(CliTest, ComparePairSubstitutes) {
  const std::string inst = write_fixture("pair-substitutes");
  const RunOutput r = run({"compare", inst, "--trials", "20", "--seed", "4", "-o", path("rep.json")});
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  const io::Json rep = io::parse_json(io::read_file(path("rep.json")), "rep");
  ASSERT_EQ(rep["methods"].size(), 3u);
  for (const auto& m : rep["methods"]) {
    EXPECT_LE(m["max_relative_spread"].get<double>(), 1e-3);
    EXPECT_EQ(m["trial_profits"].size(), 20u);
  }
  EXPECT_TRUE(rep["all_within_tolerance"].get<bool>());
}

TEST_F(CliTest, CompareZeroTrialsStillReports) {
  const std::string inst = write_fixture("pair-substitutes");
  const RunOutput r = run({"compare", inst, "--methods", "qmm", "--trials", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string json = r.out.substr(r.out.find('{'));
  const io::Json rep = io::parse_json(json, "stdout");
  ASSERT_EQ(rep["methods"].size(), 1u);
  EXPECT_TRUE(rep["methods"][0]["trial_profits"].empty());
  EXPECT_EQ(rep["methods"][0]["max_relative_spread"].get<double>(), 0.0);
}

TEST_F(CliTest, CompareAnalyticPrecondition) {
  const std::string pair = write_fixture("pair-substitutes");
  const RunOutput bad = run({"compare", pair, "--methods", "qmm,analytic", "--trials", "2"});
  EXPECT_EQ(bad.code, 64);
  EXPECT_NE(bad.err.find("diagonal"), std::string::npos) << bad.err;
  const std::string diag = write_fixture("diag-10");
  EXPECT_EQ(run({"compare", diag, "--methods", "analytic,qmm", "--trials", "2", "--rel-tol", "1e-4"}).code, 0);
  EXPECT_EQ(run({"compare", pair, "--trials", "-1"}).code, 64);
}

TEST_F(CliTest, BenchmarkRowsAndDeterminism) {
  const RunOutput a = run({"benchmark", "--sizes", "20,40", "--seed", "11"});
  const RunOutput b = run({"benchmark", "--sizes", "20,40", "--seed", "11", "--jobs", "4"});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  const auto la = lines(a.out), lb = lines(b.out);
  ASSERT_EQ(la.size(), 7u);
  ASSERT_EQ(lb.size(), 7u);
  EXPECT_EQ(la[0], "n,method,wall_time_s,iterations,profit,status");
  for (std::size_t k = 1; k < la.size(); ++k) {
    std::vector<std::string> ca, cb;
    std::stringstream sa(la[k]), sb(lb[k]);
    for (std::string c; std::getline(sa, c, ',');) ca.push_back(c);
    for (std::string c; std::getline(sb, c, ',');) cb.push_back(c);
    ASSERT_EQ(ca.size(), 6u);
    EXPECT_EQ(ca[0], cb[0]);
    EXPECT_EQ(ca[1], cb[1]);
    EXPECT_EQ(ca[3], cb[3]);
    EXPECT_EQ(ca[4], cb[4]);  // profit column is bitwise reproducible
    EXPECT_EQ(ca[5], "converged");
    if (ca[1] == "qmm") EXPECT_LE(std::stoi(ca[3]), 10);
  }
}

TEST_F(CliTest, BenchmarkBadSizes) {
  EXPECT_EQ(run({"benchmark", "--sizes", "20,15"}).code, 64);
  EXPECT_EQ(run({"benchmark", "--sizes", "abc"}).code, 64);
  EXPECT_EQ(run({"benchmark", "--sizes", "20", "--methods", "simplex"}).code, 64);
  ASSERT_EQ(run({"benchmark", "--sizes", "20", "-o", path("b.csv")}).code, 0);
  EXPECT_EQ(lines(io::read_file(path("b.csv"))).size(), 4u);
}

TEST(CliThreads, EnvironmentCapsWorkers) {
  const char* saved = std::getenv("PRICEKIT_THREADS");
  const std::string keep = saved ? saved : "";
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  ::setenv("PRICEKIT_THREADS", "1", 1);
  EXPECT_EQ(worker_threads(), 1u);
  ::setenv("PRICEKIT_THREADS", "2", 1);
  EXPECT_EQ(worker_threads(), std::min(hw, 2u));
  ::setenv("PRICEKIT_THREADS", "0", 1);
  EXPECT_EQ(worker_threads(), hw);
  ::setenv("PRICEKIT_THREADS", "many", 1);
  EXPECT_EQ(worker_threads(), hw);
  if (saved) {
    ::setenv("PRICEKIT_THREADS", keep.c_str(), 1);
  } else {
    ::unsetenv("PRICEKIT_THREADS");
  }
}
