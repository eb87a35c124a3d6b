#pragma once

// Per-slot predict / optimize / account loop for the federation model and the
// two baseline provisioning models (fixed contract, multihoming).

#include <edgefed/cost.hpp>
#include <edgefed/demand.hpp>
#include <edgefed/errors.hpp>
#include <edgefed/latency.hpp>
#include <edgefed/lp/assembly.hpp>
#include <edgefed/lp/simplex.hpp>
#include <edgefed/model.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace edgefed {

enum class ProvisioningModel { federation, multihoming, fixed_contract };

inline const char* to_string(ProvisioningModel m) {
  switch (m) {
  case ProvisioningModel::federation: return "federation";
  case ProvisioningModel::multihoming: return "multihoming";
  case ProvisioningModel::fixed_contract: return "fixed_contract";
  }
  return "?";
}

inline ProvisioningModel parse_model(std::string_view s) {
  if (s == "federation") return ProvisioningModel::federation;
  if (s == "multihoming") return ProvisioningModel::multihoming;
  if (s == "fixed_contract" || s == "fixed") return ProvisioningModel::fixed_contract;
  throw config_error("unknown model '" + std::string(s) + "'");
}

enum class SplitRule { equal, capacity_proportional };

inline const char* to_string(SplitRule r) { return r == SplitRule::equal ? "equal" : "capacity_proportional"; }

/// Which EIPs may host each service, and how multihomed demand is divided.
struct ContractPolicy {
  std::map<std::string, std::vector<std::string>> eips; ///< service id -> EIP ids
  SplitRule split = SplitRule::equal;

  /// Fixed contracts: every service must name exactly one known EIP.
  static ContractPolicy fixed(const Scenario& sc) {
    ContractPolicy p{sc.contracts.fixed, SplitRule::equal};
    p.check(sc, "fixed contract", true);
    return p;
  }

  /// Multihoming contracts: every service must name at least one known EIP.
  static ContractPolicy multihoming(const Scenario& sc, SplitRule split = SplitRule::equal) {
    ContractPolicy p{sc.contracts.multihoming, split};
    p.check(sc, "multihoming", false);
    return p;
  }

  void check(const Scenario& sc, const std::string& kind, bool exactly_one) const {
    for (const auto& svc : sc.services) {
      auto it = eips.find(svc.id);
      if (it == eips.end() || it->second.empty())
        throw config_error(kind + ": service '" + svc.id + "' has no contracted EIP");
      if (exactly_one && it->second.size() != 1)
        throw config_error(kind + ": service '" + svc.id + "' must name exactly one EIP");
      for (const auto& e : it->second)
        if (!has_eip(sc, e)) throw config_error(kind + ": service '" + svc.id + "' names unknown EIP '" + e + "'");
    }
  }

  /// Share of service p's demand assigned to `eip` (0 when not contracted).
  double share(const Scenario& sc, std::size_t p, const std::string& eip) const {
    const auto& list = eips.at(sc.services.at(p).id);
    if (std::find(list.begin(), list.end(), eip) == list.end()) return 0.0;
    if (split == SplitRule::equal) return 1.0 / static_cast<double>(list.size());
    auto storage_of = [&](const std::string& k) {
      double s = 0.0;
      for (const auto& e : sc.edge_nodes)
        if (e.owner_eip == k) s += e.storage_capacity;
      return s;
    };
    double total = 0.0;
    for (const auto& k : list) total += storage_of(k);
    return total > 0.0 ? storage_of(eip) / total : 1.0 / static_cast<double>(list.size());
  }
};

/// EIP credited with service p's cloud cost under the federation: its fixed
/// contract partner when one is configured.
inline std::vector<std::string> home_eips(const Scenario& sc) {
  std::vector<std::string> out;
  for (const auto& s : sc.services) {
    auto it = sc.contracts.fixed.find(s.id);
    out.push_back(it != sc.contracts.fixed.end() && it->second.size() == 1 ? it->second.front() : std::string());
  }
  return out;
}

struct ScheduleOptions {
  PredictorConfig predictor;           ///< oracle by default
  bool abort_on_infeasible = false;    ///< throw infeasible_error instead of recording the slot
  bool resolve_on_violation = false;   ///< re-plan on actual demand when the audit fails
  double audit_tolerance = 1e-7;
  SplitRule split = SplitRule::equal;  ///< multihoming demand split
  const lp::Solver* solver = nullptr;  ///< bundled simplex when null
};

struct SlotRecord {
  std::size_t slot = 0;
  lp::LpStatus status = lp::LpStatus::infeasible;
  std::string diagnostic;
  Allocation allocation;           ///< meaningful only when status is optimal
  CostBreakdown planned;           ///< allocation priced on the predicted demand
  CostBreakdown realized;          ///< allocation priced on the actual demand
  std::map<std::string, CostBreakdown> eip_costs; ///< realized, by EIP
  Utilization utilization;         ///< realized
  lp::AuditReport audit;           ///< against the actual demand
  double predicted_demand = 0.0;   ///< predicted storage demand, all services
  double actual_demand = 0.0;
  bool prediction_fell_back = false;
  bool resolved = false;           ///< re-planned after an audit failure
  std::size_t iterations = 0;

  bool optimal() const noexcept { return status == lp::LpStatus::optimal; }
};

struct ScheduleTimeline {
  ProvisioningModel model = ProvisioningModel::federation;
  std::vector<SlotRecord> slots;

  bool all_optimal() const {
    return std::all_of(slots.begin(), slots.end(), [](const auto& s) { return s.optimal(); });
  }
  std::size_t infeasible_slots() const {
    return static_cast<std::size_t>(std::count_if(slots.begin(), slots.end(), [](const auto& s) { return !s.optimal(); }));
  }

  /// Realized cost over the optimal slots.
  CostBreakdown realized_total() const {
    CostBreakdown c;
    for (const auto& s : slots)
      if (s.optimal()) c += s.realized;
    c.finalize();
    return c;
  }
  CostBreakdown planned_total() const {
    CostBreakdown c;
    for (const auto& s : slots)
      if (s.optimal()) c += s.planned;
    c.finalize();
    return c;
  }

  std::vector<Allocation> allocations() const {
    std::vector<Allocation> out;
    for (const auto& s : slots)
      if (s.optimal()) out.push_back(s.allocation);
    return out;
  }
};

namespace detail {

/// One independently optimized piece of a slot plan: its allocation covers
/// `weight[p]` of each service's demand and its cloud cost is credited to
/// `cloud_owner[p]`.
struct PlanPart {
  Allocation allocation;
  std::vector<double> weight;
  std::vector<std::string> cloud_owner;
};

struct SlotPlan {
  lp::LpStatus status = lp::LpStatus::optimal;
  std::string diagnostic;
  Allocation allocation;
  std::vector<PlanPart> parts;
  std::size_t iterations = 0;
};

inline DemandSlice weighted(const DemandSlice& d, const std::vector<double>& w) {
  DemandSlice out = d;
  for (std::size_t u = 0; u < d.rows(); ++u)
    for (std::size_t p = 0; p < d.cols(); ++p) {
      const auto& x = d(u, p);
      out(u, p) = {x.s * w[p], x.s_post * w[p], x.c * w[p]};
    }
  return out;
}

inline Array2<unsigned char> edge_mask(const Scenario& sc, const std::vector<std::vector<std::string>>& allowed_eips) {
  Array2<unsigned char> mask(sc.services.size(), sc.edge_nodes.size());
  for (std::size_t p = 0; p < sc.services.size(); ++p)
    for (std::size_t e = 0; e < sc.edge_nodes.size(); ++e) {
      const auto& list = allowed_eips[p];
      mask(p, e) = std::find(list.begin(), list.end(), sc.edge_nodes[e].owner_eip) != list.end();
    }
  return mask;
}

inline SlotPlan solve_one(const Scenario& sc, const DemandSlice& demand, std::size_t slot,
                          const lp::AssemblyOptions& opt, const lp::Solver& solver, const std::string& who) {
  const auto model = lp::assemble_slot_lp(sc, demand, slot, opt);
  const auto sol = solver.solve(model.program);
  SlotPlan plan;
  plan.status = sol.status;
  plan.iterations = sol.iterations;
  if (sol.status == lp::LpStatus::optimal) {
    plan.allocation = lp::decode_allocation(model.index, sol.values, slot);
  } else {
    plan.diagnostic = who + "slot " + std::to_string(slot) + " " + lp::to_string(sol.status);
    if (sol.certificate_row) plan.diagnostic += ": " + model.describe_row(*sol.certificate_row, sc);
  }
  return plan;
}

inline SlotPlan plan_federation(const Scenario& sc, const DemandSlice& demand, std::size_t slot,
                                const lp::Solver& solver) {
  SlotPlan plan = solve_one(sc, demand, slot, {}, solver, "");
  if (plan.status == lp::LpStatus::optimal)
    plan.parts.push_back({plan.allocation, std::vector<double>(sc.services.size(), 1.0), home_eips(sc)});
  return plan;
}

inline SlotPlan plan_fixed(const Scenario& sc, const ContractPolicy& policy, const DemandSlice& demand,
                           std::size_t slot, const lp::Solver& solver) {
  std::vector<std::vector<std::string>> allowed;
  std::vector<std::string> owner;
  for (const auto& s : sc.services) {
    allowed.push_back(policy.eips.at(s.id));
    owner.push_back(policy.eips.at(s.id).front());
  }
  lp::AssemblyOptions opt;
  opt.edge_allowed = edge_mask(sc, allowed);
  SlotPlan plan = solve_one(sc, demand, slot, opt, solver, "");
  if (plan.status == lp::LpStatus::optimal)
    plan.parts.push_back({plan.allocation, std::vector<double>(sc.services.size(), 1.0), owner});
  return plan;
}

/// Each EIP optimizes its own share of the demand over its own edge nodes and
/// a slice of the cloud proportional to its share of the load. Latency rows
/// use the full demand of the area so that the share-weighted combination of
/// the per-EIP placements meets every requirement.
inline SlotPlan plan_multihoming(const Scenario& sc, const ContractPolicy& policy, const DemandSlice& demand,
                                 std::size_t slot, const lp::Solver& solver) {
  const std::size_t U = sc.areas.size(), P = sc.services.size();
  SlotPlan plan;
  plan.allocation = Allocation::zeros(sc, slot);

  double total_s = 0.0, total_c = 0.0;
  for (std::size_t u = 0; u < U; ++u)
    for (std::size_t p = 0; p < P; ++p) {
      total_s += demand(u, p).s;
      total_c += demand(u, p).c;
    }
  const auto eips = eip_ids(sc);
  std::vector<std::vector<double>> weights;
  std::vector<std::string> active;
  for (const auto& k : eips) {
    std::vector<double> w(P);
    bool any = false;
    for (std::size_t p = 0; p < P; ++p) any = (w[p] = policy.share(sc, p, k)) > 0.0 || any;
    if (!any) continue;
    weights.push_back(std::move(w));
    active.push_back(k);
  }

  for (std::size_t i = 0; i < active.size(); ++i) {
    const auto& k = active[i];
    const auto& w = weights[i];
    const DemandSlice share = weighted(demand, w);
    DemandSlice lat(U, P);
    for (std::size_t u = 0; u < U; ++u)
      for (std::size_t p = 0; p < P; ++p) lat(u, p) = w[p] > 0.0 ? demand(u, p) : DemandTriple{};

    double s = 0.0, c = 0.0;
    for (std::size_t u = 0; u < U; ++u)
      for (std::size_t p = 0; p < P; ++p) {
        s += share(u, p).s;
        c += share(u, p).c;
      }
    const double frac_s = total_s > 0.0 ? s / total_s : 1.0 / static_cast<double>(active.size());
    const double frac_c = total_c > 0.0 ? c / total_c : 1.0 / static_cast<double>(active.size());

    lp::AssemblyOptions opt;
    std::vector<std::vector<std::string>> allowed(P);
    for (std::size_t p = 0; p < P; ++p)
      if (w[p] > 0.0) allowed[p] = {k};
    opt.edge_allowed = edge_mask(sc, allowed);
    opt.latency_demand = lat;
    for (const auto& cn : sc.cloud_nodes) {
      opt.cloud_storage_capacity.push_back(cn.storage_capacity * frac_s);
      opt.cloud_compute_capacity.push_back(cn.compute_capacity * frac_c);
    }
    SlotPlan sub = solve_one(sc, share, slot, opt, solver, "EIP " + k + ": ");
    plan.iterations += sub.iterations;
    if (sub.status != lp::LpStatus::optimal) {
      plan.status = sub.status;
      plan.diagnostic = sub.diagnostic;
      return plan;
    }
    auto add = [&](Array3<double>& into, const Array3<double>& from) {
      for (std::size_t u = 0; u < U; ++u)
        for (std::size_t p = 0; p < P; ++p)
          for (std::size_t n = 0; n < from.extent2(); ++n) into(u, p, n) += w[p] * from(u, p, n);
    };
    add(plan.allocation.alpha, sub.allocation.alpha);
    add(plan.allocation.beta, sub.allocation.beta);
    add(plan.allocation.theta_s, sub.allocation.theta_s);
    add(plan.allocation.theta_c, sub.allocation.theta_c);
    plan.parts.push_back({std::move(sub.allocation), w, std::vector<std::string>(P, k)});
  }
  return plan;
}

inline void evaluate(SlotRecord& rec, const SlotPlan& plan, const Scenario& sc, const DemandSlice& predicted,
                     const DemandSlice& actual) {
  rec.allocation = plan.allocation;
  rec.planned = slot_cost(plan.allocation, predicted, sc);
  rec.realized = slot_cost(plan.allocation, actual, sc);
  rec.eip_costs.clear();
  for (const auto& k : eip_ids(sc)) rec.eip_costs[k];
  for (const auto& part : plan.parts)
    for (const auto& [k, c] : eip_costs(part.allocation, weighted(actual, part.weight), sc, part.cloud_owner))
      rec.eip_costs[k] += c;
  for (auto it = rec.eip_costs.begin(); it != rec.eip_costs.end();)
    it = it->first == "cloud" && it->second.total == 0.0 ? rec.eip_costs.erase(it) : std::next(it);
  rec.utilization = utilization(plan.allocation, actual, sc);
  rec.audit = lp::audit_allocation(plan.allocation, actual, sc);
}

inline double storage_sum(const DemandSlice& d) {
  double s = 0.0;
  for (const auto& x : d.data()) s += x.s;
  return s;
}

} // namespace detail

/// Runs `model` slot by slot: predict the slot's demand from everything
/// observed before it, solve the slot program on the prediction, then price
/// and audit the chosen allocation on the actual demand.
inline ScheduleTimeline run_model(ProvisioningModel model, const Scenario& sc, const DemandSource& source,
                                  const ScheduleOptions& opt = {}) {
  if (source.actual.areas() != sc.areas.size() || source.actual.services() != sc.services.size())
    throw input_error("demand source does not match the scenario");
  const lp::SimplexSolver bundled;
  const lp::Solver& solver = opt.solver ? *opt.solver : static_cast<const lp::Solver&>(bundled);

  std::optional<ContractPolicy> policy;
  if (model == ProvisioningModel::fixed_contract) policy = ContractPolicy::fixed(sc);
  if (model == ProvisioningModel::multihoming) policy = ContractPolicy::multihoming(sc, opt.split);

  auto plan_for = [&](const DemandSlice& d, std::size_t t) {
    switch (model) {
    case ProvisioningModel::federation: return detail::plan_federation(sc, d, t, solver);
    case ProvisioningModel::fixed_contract: return detail::plan_fixed(sc, *policy, d, t, solver);
    case ProvisioningModel::multihoming: return detail::plan_multihoming(sc, *policy, d, t, solver);
    }
    throw config_error("unknown model");
  };

  std::vector<DemandSlice> observed;
  if (opt.predictor.kind != PredictorKind::oracle)
    for (std::size_t t = 0; t < source.history.slots(); ++t) observed.push_back(source.history.slice(t));

  ScheduleTimeline tl;
  tl.model = model;
  for (std::size_t t = 0; t < source.actual.slots(); ++t) {
    const DemandSlice actual = source.actual.slice(t);
    SlotRecord rec;
    rec.slot = t;
    DemandSlice predicted = actual;
    if (opt.predictor.kind != PredictorKind::oracle) {
      if (observed.empty()) {
        rec.prediction_fell_back = true; // nothing observed yet: plan on the actual slot
      } else {
        auto f = predict_demand(observed, 1, opt.predictor);
        predicted = std::move(f.slices.front());
        rec.prediction_fell_back = f.fell_back;
      }
      observed.push_back(actual);
    }
    rec.predicted_demand = detail::storage_sum(predicted);
    rec.actual_demand = detail::storage_sum(actual);

    detail::SlotPlan plan = plan_for(predicted, t);
    if (plan.status == lp::LpStatus::optimal) {
      detail::evaluate(rec, plan, sc, predicted, actual);
      if (opt.resolve_on_violation && !rec.audit.passes(opt.audit_tolerance)) {
        detail::SlotPlan again = plan_for(actual, t);
        if (again.status == lp::LpStatus::optimal) {
          plan = std::move(again);
          detail::evaluate(rec, plan, sc, actual, actual);
          rec.resolved = true;
        }
      }
    }
    rec.status = plan.status;
    rec.diagnostic = plan.diagnostic;
    rec.iterations = plan.iterations;
    if (!rec.optimal() && opt.abort_on_infeasible)
      throw infeasible_error(std::string(to_string(model)) + ": " + rec.diagnostic);
    tl.slots.push_back(std::move(rec));
  }
  return tl;
}

inline ScheduleTimeline run_see(const Scenario& sc, const DemandSource& source, const PredictorConfig& predictor,
                                ScheduleOptions opt = {}) {
  opt.predictor = predictor;
  return run_model(ProvisioningModel::federation, sc, source, opt);
}

inline ScheduleTimeline run_fixed_contract(const Scenario& sc, const DemandSource& source,
                                           const ScheduleOptions& opt = {}) {
  return run_model(ProvisioningModel::fixed_contract, sc, source, opt);
}

inline ScheduleTimeline run_multihoming(const Scenario& sc, const DemandSource& source,
                                        const ScheduleOptions& opt = {}) {
  return run_model(ProvisioningModel::multihoming, sc, source, opt);
}

} // namespace edgefed
