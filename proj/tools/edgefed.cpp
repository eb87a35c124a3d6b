#include <edgefed/cli.hpp>

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace edgefed;
  ExperimentConfig cfg;
  std::string models = "all", predictor = "oracle", groups, split = "equal";

  CLI::App app{"Edge federation provisioning simulator"};
  app.add_option("--scenario", cfg.scenario, "Scenario JSON file")->required()->envname("EDGEFED_SCENARIO");
  app.add_option("--command", cfg.command, "validate | run | compare | sweep")
      ->envname("EDGEFED_COMMAND")
      ->check(CLI::IsMember({"validate", "run", "compare", "sweep"}));
  app.add_option("--models", models, "Comma list of federation, multihoming, fixed_contract, or all")
      ->envname("EDGEFED_MODELS");
  app.add_option("--predictor", predictor, "oracle | seasonal[:P] | moving:W")->envname("EDGEFED_PREDICTOR");
  app.add_option("--groups", groups, "Latency groups, e.g. 1-7 or 2,5")->envname("EDGEFED_GROUPS");
  app.add_option("--seed", cfg.seed, "Demand seed")->envname("EDGEFED_SEED");
  app.add_option("--out", cfg.out, "Output directory")->envname("EDGEFED_OUT");
  app.add_option("--solver", cfg.solver, "bundled | external:PATH")->envname("EDGEFED_SOLVER");
  app.add_flag("--abort-on-infeasible", cfg.abort_on_infeasible, "Exit 3 on the first infeasible slot")
      ->envname("EDGEFED_ABORT_ON_INFEASIBLE");
  app.add_option("--audit-tolerance", cfg.audit_tolerance, "Constraint audit tolerance")
      ->envname("EDGEFED_AUDIT_TOLERANCE");
  app.add_option("--history-periods", cfg.history_periods, "Periods of demand history before slot 0")
      ->envname("EDGEFED_HISTORY_PERIODS");
  app.add_option("--split", split, "Multihoming split: equal | capacity")
      ->envname("EDGEFED_SPLIT")
      ->check(CLI::IsMember({"equal", "capacity"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    cfg.models = parse_models(models);
    bool period_given = false;
    cfg.predictor = parse_predictor(predictor, &period_given);
    cfg.seasonal_period_from_grid = !period_given;
    if (!groups.empty()) cfg.groups = parse_groups(groups);
    cfg.split = split == "capacity" ? SplitRule::capacity_proportional : SplitRule::equal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_config;
  }
  return run_command(cfg, std::cout, std::cerr);
}
