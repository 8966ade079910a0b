#include <filesystem>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "optcon/analysis.hpp"
#include "optcon/errors.hpp"
#include "optcon/harness.hpp"
#include "optcon/trace_io.hpp"

namespace optcon {
namespace {

ScenarioConfig scenario(const std::string& name) {
  return load_config(std::string(OPTCON_CONFIG_DIR) + "/" + name + ".json");
}

TEST(Harness, SuiteNames) {
  for (auto s : {Suite::kSimulate, Suite::kVerifyThm1, Suite::kVerifyThm2, Suite::kVerifyThm34,
                 Suite::kAudit}) {
    EXPECT_EQ(parse_suite(suite_name(s)), s);
  }
  EXPECT_THROW(parse_suite("verify-thm9"), ConfigError);
}

TEST(Harness, NecessityReportWording) {
  const auto report = run(scenario("two_node_necessity"), Suite::kVerifyThm1);
  EXPECT_TRUE(report.passed());
  EXPECT_EQ(report.exit_code(), ExitCode::kPass);
  const auto* c = report.find("exact-consensus-not-reached");
  ASSERT_NE(c, nullptr);
  EXPECT_NE(c->detail.find("exact optimal consensus NOT reached"), std::string::npos);
  EXPECT_NE(c->detail.find("consistent with necessity"), std::string::npos);
  EXPECT_NEAR(c->value, 1.0, 1e-4);
}

TEST(Harness, ClaimIdsAreUnique) {
  const auto report = run(scenario("two_node_gain_sweep"), Suite::kVerifyThm2);
  std::set<std::string> ids;
  for (const auto& c : report.claims) EXPECT_TRUE(ids.insert(c.id).second) << c.id;
  EXPECT_EQ(report.claims.size(), 9u);
}

TEST(Harness, SuitePreconditionsAreConfigErrors) {
  EXPECT_THROW(run(scenario("switching_balls3"), Suite::kVerifyThm1), ConfigError);
  auto cfg = scenario("two_node_necessity");
  EXPECT_THROW(run(cfg, Suite::kVerifyThm2), ConfigError);  // empty k_grid
}

TEST(Harness, ReportHashIsReproducible) {
  auto cfg = scenario("switching_balls3");
  cfg.tf = 10.0;
  cfg.analysis.seed_count = 3;
  const auto a = run(cfg, Suite::kVerifyThm34);
  const auto b = run(cfg, Suite::kVerifyThm34);
  EXPECT_EQ(a.content_hash(), b.content_hash());
  RunOptions other;
  other.seed = 99;
  EXPECT_NE(a.content_hash(), run(cfg, Suite::kVerifyThm34, other).content_hash());
}

TEST(Harness, NumericalFailureExitCode) {
  auto cfg = scenario("two_node_necessity");
  cfg.law = JK{1000.0};
  const auto report = run(cfg, Suite::kSimulate);
  EXPECT_TRUE(report.numerical_failure);
  EXPECT_EQ(report.exit_code(), ExitCode::kNumericalFailure);
}

TEST(Harness, TracesRoundTripToReportNumbers) {
  const auto dir = std::filesystem::temp_directory_path() / "optcon_harness_test";
  std::filesystem::remove_all(dir);
  RunOptions opts;
  opts.out_dir = dir;
  const auto cfg = scenario("two_node_necessity");
  const auto report = run(cfg, Suite::kVerifyThm1, opts);
  const auto csv = dir / "two_node_necessity_verify-thm1_seed7.csv";
  ASSERT_TRUE(std::filesystem::exists(csv));
  ASSERT_TRUE(std::filesystem::exists(dir / "two_node_necessity_verify-thm1_report.json"));
  const auto traj = read_trace_csv(csv);
  EXPECT_EQ(consensus_diameter(traj.terminal(), traj.m),
            report.find("exact-consensus-not-reached")->value);
  std::filesystem::remove_all(dir);
}

TEST(Harness, SweepTableMatchesClosedForm) {
  const auto rows = sweep_k(scenario("two_node_gain_sweep"), {0.0, 1.0, 10.0, 100.0});
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_FALSE(rows[0].simulated);
  EXPECT_TRUE(rows[0].oracle);
  EXPECT_NEAR(rows[0].oracle_diameter, 3.0, 1e-12);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double gain = rows[k].gain;
    EXPECT_NEAR(rows[k].terminal_diameter, 3.0 / (2 * gain + 1), 1e-4);
    EXPECT_GE(rows[k].bound_margin, 0.0);
  }
}

TEST(Harness, IdenticalObjectivesReachConsensusForAnyGain) {
  auto cfg = scenario("two_node_gain_sweep");
  cfg.objectives = {ConvexComponent::isotropic(Vector::Constant(1, 2.0)),
                    ConvexComponent::isotropic(Vector::Constant(1, 2.0))};
  for (const auto& row : sweep_k(cfg, {1.0, 10.0, 100.0})) {
    EXPECT_LE(row.terminal_diameter, 1e-6);
  }
}

TEST(Harness, GraphReportJson) {
  const auto json = check_graph_json(scenario("switching_balls3"), 1.0);
  EXPECT_NE(json.find("\"ujsc\": true"), std::string::npos) << json;
  EXPECT_NE(check_graph_json(scenario("switching_balls3"), 0.5).find("\"ujsc\": false"),
            std::string::npos);
}

}  // namespace
}  // namespace optcon
