#include <edgefed/cli.hpp>

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

using namespace edgefed;

namespace {

const std::filesystem::path scenarios = EDGEFED_SCENARIO_DIR;

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    root_ = std::filesystem::temp_directory_path() /
            ("edgefed_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(root_);
    std::filesystem::create_directories(root_);
  }
  void TearDown() override { std::filesystem::remove_all(root_); }

  std::filesystem::path write_scenario(const Scenario& sc, const std::string& file) {
    const auto path = root_ / file;
    std::ofstream(path) << dump_scenario(sc);
    return path;
  }

  ExperimentConfig config(std::filesystem::path scenario, std::string command, std::string out = "out") {
    ExperimentConfig cfg;
    cfg.scenario = std::move(scenario);
    cfg.command = std::move(command);
    cfg.out = root_ / out;
    return cfg;
  }

  static std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  std::size_t count_files(const std::filesystem::path& dir) const {
    std::size_t n = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) n += e.is_regular_file();
    return n;
  }

  int run(const ExperimentConfig& cfg) {
    out_.str({});
    err_.str({});
    return run_command(cfg, out_, err_);
  }

  std::filesystem::path root_;
  std::ostringstream out_, err_;
};

int shell(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(CliParse, Models) {
  EXPECT_EQ(parse_models("all").size(), 3u);
  EXPECT_EQ(parse_models("fixed,federation,fixed"),
            (std::vector{ProvisioningModel::fixed_contract, ProvisioningModel::federation}));
  EXPECT_THROW(parse_models("federation,"), config_error);
}

TEST(CliParse, Predictor) {
  bool given = true;
  EXPECT_EQ(parse_predictor("oracle", &given).kind, PredictorKind::oracle);
  EXPECT_FALSE(given);
  const auto s = parse_predictor("seasonal:12", &given);
  EXPECT_EQ(s.kind, PredictorKind::seasonal_naive);
  EXPECT_EQ(s.period, 12u);
  EXPECT_TRUE(given);
  EXPECT_EQ(parse_predictor("moving:3").window, 3u);
  for (const char* bad : {"moving", "moving:0", "seasonal:x", "oracle:2", "arima"})
    EXPECT_THROW(parse_predictor(bad), config_error) << bad;
}

TEST(CliParse, Groups) {
  EXPECT_EQ(parse_groups("1-3,7"), (std::vector{1, 2, 3, 7}));
  EXPECT_EQ(parse_groups("5"), (std::vector{5}));
  EXPECT_THROW(parse_groups("4-2"), config_error);
  EXPECT_THROW(parse_groups("a"), config_error);
}

TEST(CliParse, Solver) {
  EXPECT_NE(make_solver("bundled"), nullptr);
  EXPECT_THROW(make_solver("glpk"), config_error);
  EXPECT_THROW(make_solver("external:"), config_error);
}

TEST_F(Cli, ValidateExitCodes) {
  EXPECT_EQ(run(config(scenarios / "unit4.json", "validate")), exit_ok);
  EXPECT_NE(out_.str().find("valid"), std::string::npos);

  auto doc = scenario_to_json(load_scenario(scenarios / "unit4.json"));
  doc.erase("prices");
  std::ofstream(root_ / "noprices.json") << doc.dump();
  EXPECT_EQ(run(config(root_ / "noprices.json", "validate")), exit_config);
  EXPECT_NE(err_.str().find("prices"), std::string::npos) << err_.str();

  Scenario bad = load_scenario(scenarios / "unit4.json");
  bad.services[1].profile.pop_back();
  EXPECT_EQ(run(config(write_scenario(bad, "short.json"), "validate")), exit_validation);
  EXPECT_NE(out_.str().find("profile_length"), std::string::npos);
  EXPECT_EQ(run(config(root_ / "short.json", "compare")), exit_validation);
}

TEST_F(Cli, CompareIsByteIdenticalAcrossRuns) {
  auto a = config(scenarios / "unit4.json", "compare", "a");
  auto b = config(scenarios / "unit4.json", "compare", "b");
  a.groups = b.groups = {2, 5};
  ASSERT_EQ(run(a), exit_ok);
  const std::string first_stdout = out_.str();
  ASSERT_EQ(run(b), exit_ok);
  EXPECT_EQ(out_.str(), first_stdout);
  std::size_t compared = 0;
  for (const auto& e : std::filesystem::directory_iterator(root_ / "a")) {
    EXPECT_EQ(slurp(e.path()), slurp(root_ / "b" / e.path().filename())) << e.path().filename();
    ++compared;
  }
  // per group: 3 models x 2 series files, saving csv, summary json; plus the cost table
  EXPECT_EQ(compared, 2u * 8 + 1);
}

TEST_F(Cli, DifferentSeedsChangeJitteredDemand) {
  Scenario sc = load_scenario(scenarios / "unit4.json");
  sc.demand_jitter = 0.2;
  const auto path = write_scenario(sc, "jitter.json");
  auto a = config(path, "compare", "a");
  auto b = config(path, "compare", "b");
  b.seed = 2;
  ASSERT_EQ(run(a), exit_ok);
  ASSERT_EQ(run(b), exit_ok);
  EXPECT_NE(slurp(root_ / "a" / "unit4_cost_table.csv"), slurp(root_ / "b" / "unit4_cost_table.csv"));
}

TEST_F(Cli, AbortOnInfeasibleExitsThree) {
  Scenario sc = load_scenario(scenarios / "unit4.json");
  sc.services[0].latency_requirement = 1e-3;
  auto cfg = config(write_scenario(sc, "tight.json"), "compare");
  EXPECT_EQ(run(cfg), exit_ok);
  EXPECT_NE(out_.str().find("infeasible"), std::string::npos);
  cfg.abort_on_infeasible = true;
  EXPECT_EQ(run(cfg), exit_infeasible);
}

TEST_F(Cli, SingleEipScenarioSavesNothing) {
  Scenario sc = load_scenario(scenarios / "unit4.json");
  for (auto& e : sc.edge_nodes) e.owner_eip = "A";
  sc.contracts.fixed = {{"video", {"A"}}, {"game", {"A"}}};
  sc.contracts.multihoming = sc.contracts.fixed;
  const Experiment ex = prepare(config(write_scenario(sc, "one.json"), "compare"));
  const auto r = compare_models(ex.scenario, ex.demand, ex.options);
  EXPECT_NEAR(*r.savings_vs(ProvisioningModel::fixed_contract), 0.0, 1e-9);
  EXPECT_NEAR(*r.savings_vs(ProvisioningModel::multihoming), 0.0, 1e-9);
}

TEST_F(Cli, InlineRequirementsMatchTheEquivalentGroup) {
  Scenario sc = load_scenario(scenarios / "unit4.json");
  auto grouped = config(scenarios / "unit4.json", "compare", "grouped");
  grouped.groups = {3};
  ASSERT_EQ(run(grouped), exit_ok);
  sc = with_latency_group(sc, latency_group(sc, 3));
  ASSERT_EQ(run(config(write_scenario(sc, "g3.json"), "compare", "inline")), exit_ok);
  auto totals = [](const std::filesystem::path& csv) {
    std::ifstream in(csv);
    const auto t = read_csv(in);
    std::vector<std::string> out;
    for (const auto& row : t.rows) out.push_back(row[1] + "=" + row[2]);
    return out;
  };
  EXPECT_EQ(totals(root_ / "grouped" / "unit4_cost_table.csv"), totals(root_ / "inline" / "unit4_cost_table.csv"));
}

TEST_F(Cli, RunWritesRedirectTable) {
  auto cfg = config(scenarios / "unit4.json", "run");
  cfg.models = {ProvisioningModel::multihoming};
  ASSERT_EQ(run(cfg), exit_ok);
  std::ifstream in(root_ / "out" / "unit4_multihoming_redirect.csv");
  const auto t = read_csv(in);
  EXPECT_EQ(t.header, redirect_header());
  EXPECT_EQ(t.rows.size(), 24u * 4 * 2);
  EXPECT_EQ(count_files(root_ / "out"), 4u); // two series, summary, redirect
}

TEST_F(Cli, SweepWritesEveryGroupAndVerdicts) {
  auto cfg = config(scenarios / "unit4.json", "sweep");
  cfg.predictor = parse_predictor("seasonal");
  cfg.history_periods = 1;
  ASSERT_EQ(run(cfg), exit_ok);
  EXPECT_EQ(count_files(root_ / "out"), 7u * 8 + 2);
  EXPECT_NE(out_.str().find("federation cost non-decreasing: PASS"), std::string::npos) << out_.str();
  std::ifstream in(root_ / "out" / "unit4_sweep.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j.at("reports").size(), 7u);
}

TEST_F(Cli, UnknownGroupIsAConfigError) {
  auto cfg = config(scenarios / "unit4.json", "compare");
  cfg.groups = {9};
  EXPECT_EQ(run(cfg), exit_config);
  cfg.command = "explode";
  EXPECT_EQ(run(cfg), exit_config);
}

TEST_F(Cli, BinaryExitCodes) {
  const std::string exe = EDGEFED_CLI;
  const std::string unit4 = (scenarios / "unit4.json").string();
  EXPECT_EQ(shell(exe + " --help"), 0);
  EXPECT_EQ(shell(exe + " --command validate"), 1); // --scenario is required
  EXPECT_EQ(shell(exe + " --scenario " + unit4 + " --command bogus"), 1);
  EXPECT_EQ(shell(exe + " --scenario " + unit4 + " --command validate"), 0);
  EXPECT_EQ(shell(exe + " --scenario " + unit4 + " --command compare --groups 1 --out " + (root_ / "bin").string()), 0);
  EXPECT_TRUE(std::filesystem::exists(root_ / "bin" / "unit4_g1_summary.json"));
  EXPECT_EQ(shell("EDGEFED_PREDICTOR=nonsense " + exe + " --scenario " + unit4), 1);
}
