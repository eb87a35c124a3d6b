#pragma once

// Runs the three provisioning models on identical demand and derives savings,
// satisfaction and utilization summaries; sweeps latency groups.

#include <edgefed/cost.hpp>
#include <edgefed/latency.hpp>
#include <edgefed/scheduler.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace edgefed {

struct ModelSummary {
  ProvisioningModel model = ProvisioningModel::federation;
  ScheduleTimeline timeline;
  double total_cost = 0.0;                 ///< realized, optimal slots only
  std::vector<double> slot_costs;          ///< realized per slot; NaN for a non-optimal slot
  std::map<std::string, double> eip_totals;
  std::map<std::string, std::vector<double>> eip_slot_costs;
  std::vector<double> satisfaction;        ///< per service
  Utilization utilization;                 ///< aggregated over optimal slots
  std::vector<Utilization> slot_utilization;
  std::map<std::string, std::vector<double>> average_cost; ///< "eip/service" -> per-slot v_{u,p}(t)

  bool feasible() const { return timeline.all_optimal(); }
};

/// (baseline - federation) / baseline, 0 when the baseline costs nothing.
inline double relative_saving(double baseline, double federation) {
  return baseline > 0.0 ? (baseline - federation) / baseline : 0.0;
}

struct SavingsReport {
  std::string scenario;
  int group = 0; ///< 0: requirements as configured in the scenario
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> requirements; ///< (service id, l_p) in service order
  std::vector<ModelSummary> models;
  std::vector<std::string> flags; ///< e.g. "infeasible:fixed_contract:slot 3 ..."

  const ModelSummary* find(ProvisioningModel m) const {
    for (const auto& s : models)
      if (s.model == m) return &s;
    return nullptr;
  }

  /// Federation saving against `baseline`; empty if either run is missing or
  /// had an infeasible slot.
  std::optional<double> savings_vs(ProvisioningModel baseline) const {
    const auto* f = find(ProvisioningModel::federation);
    const auto* b = find(baseline);
    if (!f || !b || !f->feasible() || !b->feasible()) return std::nullopt;
    return relative_saving(b->total_cost, f->total_cost);
  }

  std::vector<double> slot_savings_vs(ProvisioningModel baseline) const {
    const auto* f = find(ProvisioningModel::federation);
    const auto* b = find(baseline);
    std::vector<double> out;
    if (!f || !b) return out;
    for (std::size_t t = 0; t < f->slot_costs.size() && t < b->slot_costs.size(); ++t)
      out.push_back(std::isnan(f->slot_costs[t]) || std::isnan(b->slot_costs[t])
                        ? std::nan("")
                        : relative_saving(b->slot_costs[t], f->slot_costs[t]));
    return out;
  }

  std::map<std::string, double> eip_savings_vs(ProvisioningModel baseline) const {
    const auto* f = find(ProvisioningModel::federation);
    const auto* b = find(baseline);
    std::map<std::string, double> out;
    if (!f || !b || !f->feasible() || !b->feasible()) return out;
    for (const auto& [eip, cost] : b->eip_totals) {
      auto it = f->eip_totals.find(eip);
      out[eip] = relative_saving(cost, it == f->eip_totals.end() ? 0.0 : it->second);
    }
    return out;
  }
};

struct CompareOptions {
  ScheduleOptions schedule;
  std::vector<ProvisioningModel> models{ProvisioningModel::federation, ProvisioningModel::multihoming,
                                        ProvisioningModel::fixed_contract};
  std::uint64_t seed = 0; ///< recorded in the report; the demand source is built by the caller
};

inline ModelSummary summarize(ProvisioningModel model, ScheduleTimeline timeline, const Scenario& sc,
                              const DemandSet& actual) {
  ModelSummary s;
  s.model = model;
  const auto eips = eip_ids(sc);
  for (const auto& k : eips) s.eip_totals[k] = 0.0;
  for (const auto& rec : timeline.slots) {
    if (!rec.optimal()) {
      s.slot_costs.push_back(std::nan(""));
      s.slot_utilization.emplace_back();
      for (auto& [k, v] : s.eip_slot_costs) v.push_back(std::nan(""));
      for (const auto& k : eips)
        for (const auto& svc : sc.services) s.average_cost[k + "/" + svc.id].push_back(std::nan(""));
      continue;
    }
    const DemandSlice slice = actual.slice(rec.slot);
    for (const auto& k : eips)
      for (std::size_t p = 0; p < sc.services.size(); ++p)
        s.average_cost[k + "/" + sc.services[p].id].push_back(average_cost(rec.allocation, slice, sc, k, p));
    s.slot_costs.push_back(rec.realized.total);
    s.total_cost += rec.realized.total;
    for (const auto& [k, c] : rec.eip_costs) {
      s.eip_totals[k] += c.total;
      auto& series = s.eip_slot_costs[k];
      series.resize(s.slot_costs.size() - 1, 0.0);
      series.push_back(c.total);
    }
    s.slot_utilization.push_back(rec.utilization);
    accumulate(s.utilization, rec.utilization);
  }
  for (auto& [k, v] : s.eip_slot_costs) v.resize(s.slot_costs.size(), 0.0);
  const auto allocs = timeline.allocations();
  for (std::size_t p = 0; p < sc.services.size(); ++p)
    s.satisfaction.push_back(satisfaction_ratio(allocs, actual, sc, p, 1e-7));
  s.timeline = std::move(timeline);
  return s;
}

inline SavingsReport compare_models(const Scenario& sc, const DemandSource& source, const CompareOptions& opt = {},
                                    int group = 0) {
  SavingsReport r;
  r.scenario = sc.name;
  r.group = group;
  r.seed = opt.seed;
  for (const auto& svc : sc.services) r.requirements.emplace_back(svc.id, svc.latency_requirement);
  for (auto m : opt.models) {
    auto tl = run_model(m, sc, source, opt.schedule);
    for (const auto& rec : tl.slots)
      if (!rec.optimal()) r.flags.push_back(std::string("infeasible:") + to_string(m) + ":" + rec.diagnostic);
    r.models.push_back(summarize(m, std::move(tl), sc, source.actual));
  }
  return r;
}

/// Whether a series never drops by more than a relative tolerance.
struct Trend {
  std::vector<double> values;
  std::optional<std::size_t> first_drop; ///< index i with values[i] < values[i-1]

  bool non_decreasing() const { return !first_drop; }
};

inline Trend make_trend(std::vector<double> values, double rel_tol = 2e-7) {
  Trend t{std::move(values), std::nullopt};
  for (std::size_t i = 1; i < t.values.size() && !t.first_drop; ++i)
    if (t.values[i] < t.values[i - 1] - rel_tol * std::max(1.0, std::abs(t.values[i - 1]))) t.first_drop = i;
  return t;
}

struct SweepReport {
  std::vector<int> groups;
  std::vector<SavingsReport> reports;
  Trend federation_cost;
  Trend edge_utilization; ///< federation, aggregated edge_combined ratio
};

/// Compare the models once per latency group, on the same demand.
inline SweepReport sweep_groups(const Scenario& sc, const DemandSource& source, std::span<const int> groups,
                                const CompareOptions& opt = {}) {
  SweepReport out;
  std::vector<double> cost, util;
  for (int g : groups) {
    const Scenario scg = with_latency_group(sc, latency_group(sc, g));
    out.groups.push_back(g);
    out.reports.push_back(compare_models(scg, source, opt, g));
    if (const auto* f = out.reports.back().find(ProvisioningModel::federation)) {
      cost.push_back(f->total_cost);
      util.push_back(f->utilization.edge_combined);
    }
  }
  out.federation_cost = make_trend(std::move(cost));
  out.edge_utilization = make_trend(std::move(util));
  return out;
}

} // namespace edgefed
