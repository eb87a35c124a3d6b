#pragma once

// Experiment orchestration behind the command-line tool: validate, run,
// compare and sweep, with deterministic seeding and atomic output files.

#include <edgefed/compare.hpp>
#include <edgefed/demand.hpp>
#include <edgefed/errors.hpp>
#include <edgefed/lp/mps.hpp>
#include <edgefed/lp/simplex.hpp>
#include <edgefed/reporting.hpp>
#include <edgefed/scenario_io.hpp>
#include <edgefed/scheduler.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace edgefed {

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_validation = 2, exit_infeasible = 3 };

struct ExperimentConfig {
  std::filesystem::path scenario;
  std::string command = "compare";
  std::vector<ProvisioningModel> models{ProvisioningModel::federation, ProvisioningModel::multihoming,
                                        ProvisioningModel::fixed_contract};
  PredictorConfig predictor;
  bool seasonal_period_from_grid = true; ///< seasonal period = scenario slot count unless given
  std::vector<int> groups;               ///< empty: requirements as written in the scenario
  std::uint64_t seed = 1;
  std::filesystem::path out = "out";
  std::string solver = "bundled";
  bool abort_on_infeasible = false;
  double audit_tolerance = 1e-7;
  std::size_t history_periods = 1;
  SplitRule split = SplitRule::equal;
};

inline std::vector<ProvisioningModel> parse_models(std::string_view list) {
  std::vector<ProvisioningModel> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const auto comma = list.find(',', pos);
    const auto item = list.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    if (item == "all") {
      for (auto m : {ProvisioningModel::federation, ProvisioningModel::multihoming, ProvisioningModel::fixed_contract})
        out.push_back(m);
    } else {
      out.push_back(parse_model(item));
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  std::vector<ProvisioningModel> unique;
  for (auto m : out)
    if (std::find(unique.begin(), unique.end(), m) == unique.end()) unique.push_back(m);
  return unique;
}

/// "oracle", "seasonal", "seasonal:P" or "moving:W".
inline PredictorConfig parse_predictor(std::string_view s, bool* period_given = nullptr) {
  PredictorConfig cfg;
  if (period_given) *period_given = false;
  const auto colon = s.find(':');
  const std::string_view kind = s.substr(0, colon);
  std::size_t arg = 0;
  if (colon != std::string_view::npos && (!detail::parse_int(s.substr(colon + 1), arg) || arg == 0))
    throw config_error("bad predictor argument in '" + std::string(s) + "'");
  if (kind == "oracle" && colon == std::string_view::npos) {
    cfg.kind = PredictorKind::oracle;
  } else if (kind == "seasonal") {
    cfg.kind = PredictorKind::seasonal_naive;
    if (colon != std::string_view::npos) {
      cfg.period = arg;
      if (period_given) *period_given = true;
    }
  } else if (kind == "moving" && colon != std::string_view::npos) {
    cfg.kind = PredictorKind::moving_average;
    cfg.window = arg;
  } else {
    throw config_error("unknown predictor '" + std::string(s) + "' (oracle | seasonal[:P] | moving:W)");
  }
  return cfg;
}

/// Comma list of group numbers and inclusive ranges, e.g. "1-7" or "1,3,5".
inline std::vector<int> parse_groups(std::string_view s) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const auto item = s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    const auto dash = item.find('-');
    int a = 0, b = 0;
    if (dash == std::string_view::npos) {
      if (!detail::parse_int(item, a)) throw config_error("bad group '" + std::string(item) + "'");
      b = a;
    } else if (!detail::parse_int(item.substr(0, dash), a) || !detail::parse_int(item.substr(dash + 1), b) || b < a) {
      throw config_error("bad group range '" + std::string(item) + "'");
    }
    for (int g = a; g <= b; ++g) out.push_back(g);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline std::unique_ptr<lp::Solver> make_solver(const std::string& spec) {
  if (spec == "bundled") return std::make_unique<lp::SimplexSolver>();
  if (spec.rfind("external:", 0) == 0 && spec.size() > 9) return std::make_unique<lp::ExternalSolver>(spec.substr(9));
  throw config_error("unknown solver '" + spec + "' (bundled | external:PATH)");
}

namespace detail {

inline std::string file_stem(const std::string& scenario, int group) {
  return group > 0 ? scenario + "_g" + std::to_string(group) : scenario;
}

inline void write_report_files(const SavingsReport& r, const std::filesystem::path& dir) {
  const std::string stem = file_stem(r.scenario, r.group);
  for (const auto& m : r.models) {
    const std::string prefix = stem + "_" + to_string(m.model) + "_";
    write_file_atomic(dir / (prefix + "average_cost.csv"), to_csv(emit_timeseries(r, Metric::average_cost, m.model)));
    write_file_atomic(dir / (prefix + "utilization.csv"), to_csv(emit_timeseries(r, Metric::utilization, m.model)));
  }
  if (r.find(ProvisioningModel::federation) &&
      (r.find(ProvisioningModel::fixed_contract) || r.find(ProvisioningModel::multihoming)))
    write_file_atomic(dir / (stem + "_federation_cost_saving.csv"),
                      to_csv(emit_timeseries(r, Metric::cost_saving, ProvisioningModel::federation)));
  write_file_atomic(dir / (stem + "_summary.json"), report_json(r).dump(2) + "\n");
}

inline void print_report(std::ostream& out, const SavingsReport& r) {
  out << "group " << r.group << ":";
  for (const auto& m : r.models)
    out << " " << to_string(m.model) << "=" << (m.feasible() ? format_number(m.total_cost) : "infeasible");
  for (auto b : {ProvisioningModel::fixed_contract, ProvisioningModel::multihoming})
    if (auto s = r.savings_vs(b)) out << " saving_vs_" << to_string(b) << "=" << format_number(*s);
  out << "\n";
  for (const auto& f : r.flags) out << "  flag " << f << "\n";
}

} // namespace detail

/// Resolved inputs shared by the run/compare/sweep commands.
struct Experiment {
  Scenario scenario;
  DemandSource demand;
  std::unique_ptr<lp::Solver> solver;
  CompareOptions options;
};

inline Experiment prepare(const ExperimentConfig& cfg) {
  Experiment ex;
  ex.scenario = load_scenario(cfg.scenario);
  const auto report = validate_scenario(ex.scenario);
  if (!report.clean()) {
    std::string msg = "scenario failed validation:";
    for (const auto& i : report.issues) msg += "\n  " + i.code + ": " + i.message;
    throw validation_error(msg);
  }
  ex.demand = make_demand_source(ex.scenario, cfg.seed, cfg.history_periods);
  ex.solver = make_solver(cfg.solver);
  ex.options.models = cfg.models;
  ex.options.seed = cfg.seed;
  ex.options.schedule.predictor = cfg.predictor;
  if (cfg.predictor.kind == PredictorKind::seasonal_naive && cfg.seasonal_period_from_grid)
    ex.options.schedule.predictor.period = ex.scenario.time_grid.slot_count;
  ex.options.schedule.abort_on_infeasible = cfg.abort_on_infeasible;
  ex.options.schedule.audit_tolerance = cfg.audit_tolerance;
  ex.options.schedule.split = cfg.split;
  ex.options.schedule.solver = ex.solver.get();
  return ex;
}

inline int cmd_validate(const ExperimentConfig& cfg, std::ostream& out) {
  const Scenario sc = load_scenario(cfg.scenario);
  const auto report = validate_scenario(sc);
  for (const auto& i : report.issues) out << i.code << ": " << i.message << "\n";
  out << sc.name << ": " << (report.clean() ? "valid" : std::to_string(report.issues.size()) + " issue(s)") << "\n";
  return report.clean() ? exit_ok : exit_validation;
}

/// One model over the horizon; also writes the per-slot redirect table.
inline int cmd_run(const ExperimentConfig& cfg, std::ostream& out) {
  Experiment ex = prepare(cfg);
  if (ex.options.models.size() != 1)
    ex.options.models = {ex.options.models.empty() ? ProvisioningModel::federation : ex.options.models.front()};
  const int group = cfg.groups.empty() ? 0 : cfg.groups.front();
  const Scenario sc = group ? with_latency_group(ex.scenario, latency_group(ex.scenario, group)) : ex.scenario;
  const SavingsReport r = compare_models(sc, ex.demand, ex.options, group);
  detail::write_report_files(r, cfg.out);
  const ModelSummary& m = r.models.front();
  CsvTable redirect;
  redirect.header = redirect_header();
  for (const auto& rec : m.timeline.slots) {
    if (!rec.optimal()) continue;
    auto t = emit_redirect_table(rec.allocation, sc, ex.demand.actual.slice(rec.slot));
    for (auto& row : t.rows) redirect.rows.push_back(std::move(row));
  }
  write_file_atomic(cfg.out / (detail::file_stem(sc.name, group) + "_" + to_string(m.model) + "_redirect.csv"),
                    to_csv(redirect));
  detail::print_report(out, r);
  return exit_ok;
}

inline int cmd_compare(const ExperimentConfig& cfg, std::ostream& out) {
  Experiment ex = prepare(cfg);
  std::vector<SavingsReport> reports;
  if (cfg.groups.empty()) {
    reports.push_back(compare_models(ex.scenario, ex.demand, ex.options, 0));
  } else {
    for (int g : cfg.groups)
      reports.push_back(compare_models(with_latency_group(ex.scenario, latency_group(ex.scenario, g)), ex.demand,
                                       ex.options, g));
  }
  for (const auto& r : reports) {
    detail::write_report_files(r, cfg.out);
    detail::print_report(out, r);
  }
  write_file_atomic(cfg.out / (ex.scenario.name + "_cost_table.csv"), to_csv(emit_cost_table(reports)));
  return exit_ok;
}

inline int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out) {
  Experiment ex = prepare(cfg);
  std::vector<int> groups = cfg.groups;
  if (groups.empty()) groups = {1, 2, 3, 4, 5, 6, 7};
  const SweepReport s = sweep_groups(ex.scenario, ex.demand, groups, ex.options);
  for (const auto& r : s.reports) {
    detail::write_report_files(r, cfg.out);
    detail::print_report(out, r);
  }
  write_file_atomic(cfg.out / (ex.scenario.name + "_cost_table.csv"), to_csv(emit_cost_table(s.reports)));
  write_file_atomic(cfg.out / (ex.scenario.name + "_sweep.json"), sweep_json(s).dump(2) + "\n");
  out << "federation cost non-decreasing: " << (s.federation_cost.non_decreasing() ? "PASS" : "FAIL") << "\n";
  out << "edge utilization non-decreasing: " << (s.edge_utilization.non_decreasing() ? "PASS" : "FAIL") << "\n";
  return exit_ok;
}

/// Dispatch on cfg.command and map failures to exit codes.
inline int run_command(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.command == "validate") return cmd_validate(cfg, out);
    if (cfg.command == "run") return cmd_run(cfg, out);
    if (cfg.command == "compare") return cmd_compare(cfg, out);
    if (cfg.command == "sweep") return cmd_sweep(cfg, out);
    err << "error: unknown command '" << cfg.command << "'\n";
    return exit_config;
  } catch (const validation_error& e) {
    err << "error: " << e.what() << "\n";
    return exit_validation;
  } catch (const infeasible_error& e) {
    err << "error: infeasible: " << e.what() << "\n";
    return exit_infeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_config;
  }
}

} // namespace edgefed
