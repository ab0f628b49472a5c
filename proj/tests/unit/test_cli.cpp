#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../../tools/cli.hpp"
#include "helpers.hpp"

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "sarw");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = sarw::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json json_at(const std::string& path) { return nlohmann::json::parse(slurp(path)); }

bool exists(const std::string& path) { return std::filesystem::exists(path); }

// Generates a small block-structured synthetic instance in `dir`.
void synth_into(const std::string& dir, int n = 60, int blocks = 0) {
  const Result r = run_cli({"synth", "--out", dir, "--n", std::to_string(n), "--p", "2", "--density", "0.1",
                            "--blocks", std::to_string(blocks), "--seed", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
}

std::vector<std::string> synth_data(const std::string& dir) {
  return {"--data", dir + "/data.csv", "--dependent", "y", "--id", "id"};
}

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST(Cli, UsageExitCodes) {
  EXPECT_EQ(run_cli({}).code, 2);
  const Result help = run_cli({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("fit-admm"), std::string::npos);
  EXPECT_EQ(run_cli({"fit-ols", "--help"}).code, 0);
  EXPECT_EQ(run_cli({"no-such-command"}).code, 2);
  const Result bad = run_cli({"fit-ols", "--data", testing_util::boston_path(), "--dependent", "MEDV", "--bogus"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("error"), std::string::npos);
  EXPECT_EQ(run_cli({"fit-admm", "--data", "x.csv", "--dependent", "y", "--lambda1", "-1"}).code, 2);
}

TEST(Cli, PipelineErrorNamesModule) {
  const auto dir = testing_util::temp_dir("cli_err");
  const Result r = run_cli({"fit-ols", "--out", dir, "--data", testing_util::boston_path(), "--dependent", "NOPE"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: dataset: ", 0), 0u) << r.err;
  const Result s = run_cli(
      {"fit-sar", "--out", dir, "--data", testing_util::boston_path(), "--dependent", "MEDV", "--id", "tract"});
  EXPECT_EQ(s.code, 1);
  EXPECT_EQ(s.err.rfind("error: cli: ", 0), 0u) << s.err;
}

TEST(Cli, FitOlsOnBoston) {
  const auto dir = testing_util::temp_dir("cli_ols");
  const Result r = run_cli({"fit-ols", "--out", dir, "--data", testing_util::boston_path(), "--dependent", "MEDV",
                            "--id", "tract", "--intercept"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto b = json_at(dir + "/beta.json");
  EXPECT_EQ(b["beta"].size(), 14u);
  EXPECT_TRUE(b["beta"].contains("const"));
  EXPECT_GT(b["r_squared"].get<double>(), 0.7);
  EXPECT_TRUE(exists(dir + "/report.json"));
  EXPECT_TRUE(exists(dir + "/config.resolved"));
  EXPECT_TRUE(exists(dir + "/plotdata/predictions.csv"));
}

TEST(Cli, LogDependentIsRecorded) {
  const auto dir = testing_util::temp_dir("cli_log");
  ASSERT_EQ(run_cli({"fit-ols", "--out", dir, "--data", testing_util::boston_path(), "--dependent", "MEDV",
                     "--id", "tract", "--log-dependent"})
                .code,
            0);
  const auto rep = json_at(dir + "/report.json");
  EXPECT_NE(rep.dump().find("log(MEDV)"), std::string::npos);
}

TEST(Cli, FitAdmmAndConfigRoundTrip) {
  const auto root = testing_util::temp_dir("cli_cfg");
  synth_into(root + "/data");
  const auto first = root + "/a";
  const Result r = run_cli(cat({"fit-admm", "--out", first, "--lambda1", "0.05", "--adaptive-rho", "--seed", "9"},
                               synth_data(root + "/data")));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(exists(first + "/w.csv"));
  EXPECT_TRUE(exists(first + "/plotdata/residual_history.csv"));
  const auto b = json_at(first + "/beta.json");
  EXPECT_EQ(b["model"], "admm");

  // Re-running from the resolved config reproduces every output byte for byte.
  const auto second = root + "/b";
  const Result again = run_cli({"--config", first + "/config.resolved", "fit-admm", "--out", second});
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(slurp(first + "/w.csv"), slurp(second + "/w.csv"));
  EXPECT_EQ(slurp(first + "/beta.json"), slurp(second + "/beta.json"));
  const auto resolved = slurp(first + "/config.resolved");
  EXPECT_NE(resolved.find("fit-admm.lambda1=0.05"), std::string::npos) << resolved;
}

TEST(Cli, UnknownConfigKeyIsUsageError) {
  const auto dir = testing_util::temp_dir("cli_badcfg");
  const auto cfg = testing_util::write_file(dir, "c.cfg", "fit-ols.dependent=MEDV\nfit-ols.nonsense=3\n");
  const Result r = run_cli({"--config", cfg, "fit-ols", "--data", testing_util::boston_path(), "--out", dir});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, SweepReportsSupportF1) {
  const auto root = testing_util::temp_dir("cli_sweep");
  synth_into(root + "/data");
  const Result r = run_cli(cat({"sweep", "--out", root + "/s", "--lambdas", "0.5,0.05,0.005", "--adaptive-rho",
                                "--w-true", root + "/data/w_true.csv", "--threads", "2"},
                               synth_data(root + "/data")));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = json_at(root + "/s/report.json");
  EXPECT_EQ(rep["fits"].size(), 3u);
  EXPECT_TRUE(rep.contains("best_support_f1"));
  EXPECT_TRUE(exists(root + "/s/plotdata/sweep.csv"));
  EXPECT_EQ(run_cli(cat({"sweep", "--out", root + "/t"}, synth_data(root + "/data"))).code, 1);
}

TEST(Cli, ClusterSubmarketsSpillover) {
  const auto root = testing_util::temp_dir("cli_chain");
  synth_into(root + "/data", 90, 3);
  const auto data = synth_data(root + "/data");

  const Result cl = run_cli(cat({"cluster", "--out", root + "/c", "--w", root + "/data/w_true.csv", "--k", "3"}, data));
  ASSERT_EQ(cl.code, 0) << cl.err;
  EXPECT_TRUE(exists(root + "/c/clusters.csv"));
  EXPECT_TRUE(exists(root + "/c/plotdata/eigenvalues.csv"));
  EXPECT_EQ(json_at(root + "/c/report.json")["clustering"]["k"], 3);

  const Result sm = run_cli(cat({"submarkets", "--out", root + "/m", "--clusters", root + "/c/clusters.csv",
                                 "--per-cluster", "5"},
                                data));
  ASSERT_EQ(sm.code, 0) << sm.err;
  const auto srep = json_at(root + "/m/report.json");
  EXPECT_TRUE(srep.contains("submarkets"));
  EXPECT_TRUE(exists(root + "/m/plotdata/submarket_test_rows.csv"));

  const auto scen = testing_util::write_file(root, "scenario.csv", "id,column_name,new_value\ns4,x1,3.5\n");
  const Result sp = run_cli(cat({"spillover", "--out", root + "/p", "--w", root + "/data/w_true.csv", "--beta",
                                 root + "/data/beta_true.json", "--scenario", scen, "--clusters",
                                 root + "/c/clusters.csv"},
                                data));
  ASSERT_EQ(sp.code, 0) << sp.err;
  const auto prep = json_at(root + "/p/report.json");
  EXPECT_EQ(prep["perturbed_ids"], nlohmann::json::array({"s4"}));
  EXPECT_EQ(prep["max_abs_delta_id"], "s4");
  EXPECT_TRUE(exists(root + "/p/spillover.csv"));

  const auto bad = testing_util::write_file(root, "bad.csv", "id,column_name,new_value\nzz,x1,1\n");
  const Result e = run_cli(cat({"spillover", "--out", root + "/q", "--w", root + "/data/w_true.csv", "--beta",
                                root + "/data/beta_true.json", "--scenario", bad},
                               data));
  EXPECT_EQ(e.code, 1);
  EXPECT_EQ(e.err.rfind("error: io: ", 0), 0u) << e.err;
}

TEST(Cli, FitSarWithKnn) {
  const auto root = testing_util::temp_dir("cli_sar");
  std::ostringstream body;
  body << "id,y,a,cx,cy\n";
  std::mt19937_64 rng(3);
  for (int i = 0; i < 40; ++i) {
    body << "r" << i << ',' << testing_util::uniform(rng, 0, 5) << ',' << testing_util::uniform(rng, 0, 1) << ','
         << testing_util::uniform(rng, 0, 1) << ',' << testing_util::uniform(rng, 0, 1) << '\n';
  }
  const auto path = testing_util::write_file(root, "d.csv", body.str());
  const Result r = run_cli({"fit-sar", "--out", root + "/o", "--data", path, "--dependent", "y", "--id", "id",
                            "--coord-x", "cx", "--coord-y", "cy", "--knn", "4", "--intercept"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto b = json_at(root + "/o/beta.json");
  EXPECT_EQ(b["model"], "sar");
  EXPECT_LT(std::abs(b["rho"].get<double>()), 1.0);
  EXPECT_TRUE(exists(root + "/o/plotdata/sar_profile.csv"));
}

TEST(Cli, BenchSynthetic) {
  const auto dir = testing_util::temp_dir("cli_bench");
  const Result r = run_cli({"bench", "--out", dir, "--synthetic", "--n", "50", "--p", "2", "--lambda1", "0.1",
                            "--adaptive-rho"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(json_at(dir + "/report.json")["converged"].get<bool>());
}
