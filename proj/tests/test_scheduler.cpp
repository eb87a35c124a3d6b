#include "support.hpp"

#include <edgefed/lp/assembly.hpp>
#include <edgefed/lp/simplex.hpp>
#include <edgefed/scenario_io.hpp>
#include <edgefed/scheduler.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace edgefed;
using namespace edgefed::testkit;

namespace {

Scenario unit4() { return load_scenario(EDGEFED_SCENARIO_DIR "/unit4.json"); }

// Two EIPs with mirror-image nodes: each owns one node at the same spot with
// the same prices and capacity.
Scenario twin_eips() {
  Scenario sc = planar_base(3, 4, {"x", "y"});
  for (std::size_t t = 0; t < 4; ++t) {
    sc.services[0].profile[t] = 0.5 + 0.1 * static_cast<double>(t);
    sc.services[1].profile[t] = 1.0 - 0.1 * static_cast<double>(t);
  }
  sc.services[0].latency_requirement = 40;
  sc.services[1].latency_requirement = 30;
  sc.edge_nodes.push_back(edge("a1", "A", {1, 1}, 1.0, 2.0, 1.0, 1.2, 0.2));
  sc.edge_nodes.push_back(edge("b1", "B", {1, 1}, 1.0, 2.0, 1.0, 1.2, 0.2));
  sc.cloud_nodes.push_back(cloud("c", {30, 30}, 50, 50));
  sc.prices = {0.1, 0.3, 0.05};
  sc.contracts.fixed = {{"x", {"A"}}, {"y", {"B"}}};
  sc.contracts.multihoming = {{"x", {"A", "B"}}, {"y", {"A", "B"}}};
  return sc;
}

double slot_optimum(const Scenario& sc, const DemandSet& d, std::size_t t) {
  const auto model = lp::assemble_slot_lp(sc, d, t);
  const auto sol = lp::SimplexSolver().solve(model.program);
  EXPECT_EQ(sol.status, lp::LpStatus::optimal);
  return sol.objective_value;
}

} // namespace

TEST(Scheduler, OracleRunRealizesPlannedCostEverySlot) {
  const Scenario sc = with_latency_group(unit4(), latency_group(unit4(), 4));
  const DemandSource src = make_demand_source(sc, 3);
  const auto tl = run_see(sc, src, {});
  ASSERT_EQ(tl.slots.size(), 24u);
  ASSERT_TRUE(tl.all_optimal());
  for (const auto& rec : tl.slots) {
    const double independent = slot_optimum(sc, src.actual, rec.slot);
    EXPECT_NEAR(rec.realized.total, independent, 1e-9 * std::max(1.0, independent)) << rec.slot;
    EXPECT_DOUBLE_EQ(rec.planned.total, rec.realized.total);
    EXPECT_EQ(rec.predicted_demand, rec.actual_demand);
    EXPECT_LE(rec.audit.worst(), 1e-7);
  }
}

TEST(Scheduler, SeasonalNaiveOnPeriodicDemandMatchesOracle) {
  const Scenario sc = unit4();
  const DemandSource src = make_demand_source(sc, 11, 2);
  PredictorConfig seasonal{PredictorKind::seasonal_naive, sc.time_grid.slot_count, 3};
  const auto a = run_see(sc, src, {});
  const auto b = run_see(sc, src, seasonal);
  ASSERT_EQ(a.slots.size(), b.slots.size());
  for (std::size_t t = 0; t < a.slots.size(); ++t) {
    EXPECT_FALSE(b.slots[t].prediction_fell_back);
    EXPECT_EQ(a.slots[t].allocation, b.slots[t].allocation) << t;
    EXPECT_EQ(a.slots[t].realized.total, b.slots[t].realized.total);
  }
}

TEST(Scheduler, MovingAveragePlansDifferFromRealizedAndCanBeRepaired) {
  const Scenario sc = unit4();
  const DemandSource src = make_demand_source(sc, 5);
  ScheduleOptions opt;
  opt.resolve_on_violation = true;
  const auto tl = run_see(sc, src, {PredictorKind::moving_average, 24, 4}, opt);
  bool differs = false, repaired = false;
  for (const auto& rec : tl.slots) {
    ASSERT_TRUE(rec.optimal());
    differs = differs || rec.planned.total != rec.realized.total;
    repaired = repaired || rec.resolved;
    EXPECT_TRUE(rec.audit.passes(1e-7)) << rec.slot;
  }
  EXPECT_TRUE(differs);
  EXPECT_TRUE(repaired);
}

TEST(Scheduler, EmptyHistoryFallsBackOnFirstSlot) {
  const Scenario sc = unit4();
  const DemandSource src = make_demand_source(sc, 5, 0);
  const auto tl = run_see(sc, src, {PredictorKind::moving_average, 24, 2});
  EXPECT_TRUE(tl.slots[0].prediction_fell_back);
  EXPECT_TRUE(tl.slots[1].prediction_fell_back); // one observation, window 2
  EXPECT_FALSE(tl.slots[2].prediction_fell_back);
}

TEST(Scheduler, EipCostsPartitionRealizedCost) {
  const Scenario sc = unit4();
  const DemandSource src = make_demand_source(sc, 2);
  for (auto m : {ProvisioningModel::federation, ProvisioningModel::multihoming, ProvisioningModel::fixed_contract}) {
    const auto tl = run_model(m, sc, src);
    for (const auto& rec : tl.slots) {
      double sum = 0.0;
      for (const auto& [eip, c] : rec.eip_costs) sum += c.total;
      EXPECT_NEAR(sum, rec.realized.total, 1e-9 * rec.realized.total) << to_string(m) << " slot " << rec.slot;
    }
  }
}

TEST(Scheduler, FixedContractKeepsServicesOnTheirEip) {
  const Scenario sc = unit4();
  const auto tl = run_fixed_contract(sc, make_demand_source(sc, 1));
  const std::size_t video = 0, game = 1;
  for (const auto& rec : tl.slots)
    for (std::size_t u = 0; u < sc.areas.size(); ++u)
      for (std::size_t e = 0; e < sc.edge_nodes.size(); ++e) {
        const bool on_a = sc.edge_nodes[e].owner_eip == "A";
        EXPECT_EQ(rec.allocation.alpha(u, on_a ? game : video, e), 0.0);
      }
}

TEST(Scheduler, FixedContractArityIsChecked) {
  Scenario sc = unit4();
  sc.contracts.fixed["video"] = {"A", "B"};
  EXPECT_THROW(run_fixed_contract(sc, make_demand_source(sc, 1)), config_error);
  sc.contracts.fixed["video"] = {"Z"};
  EXPECT_THROW(run_fixed_contract(sc, make_demand_source(sc, 1)), config_error);
  sc.contracts.fixed.erase("video");
  EXPECT_THROW(run_fixed_contract(sc, make_demand_source(sc, 1)), config_error);
  sc.contracts.multihoming.clear();
  EXPECT_THROW(run_multihoming(sc, make_demand_source(sc, 1)), config_error);
}

TEST(Scheduler, MultihomingAggregateConservesAndMeetsLatency) {
  const Scenario sc = unit4();
  const DemandSource src = make_demand_source(sc, 9);
  for (auto split : {SplitRule::equal, SplitRule::capacity_proportional}) {
    ScheduleOptions opt;
    opt.split = split;
    const auto tl = run_multihoming(sc, src, opt);
    ASSERT_TRUE(tl.all_optimal());
    for (const auto& rec : tl.slots) {
      EXPECT_LE(conservation_error(rec.allocation), 1e-9);
      EXPECT_LE(rec.audit.worst(), 1e-7);
    }
  }
}

TEST(Scheduler, CapacityProportionalSharesSumToOne) {
  Scenario sc = unit4();
  sc.edge_nodes[0].storage_capacity = 50; // A now holds 70 of 110
  const auto policy = ContractPolicy::multihoming(sc, SplitRule::capacity_proportional);
  EXPECT_NEAR(policy.share(sc, 0, "A"), 70.0 / 110.0, 1e-15);
  EXPECT_NEAR(policy.share(sc, 0, "A") + policy.share(sc, 0, "B"), 1.0, 1e-15);
  const auto equal = ContractPolicy::multihoming(sc);
  EXPECT_EQ(equal.share(sc, 1, "B"), 0.5);
}

TEST(Scheduler, MirrorImageEipsMakeMultihomingEqualFederation) {
  const Scenario sc = twin_eips();
  const DemandSource src = make_demand_source(sc, 0);
  const auto fed = run_see(sc, src, {});
  const auto multi = run_multihoming(sc, src);
  ASSERT_TRUE(fed.all_optimal());
  ASSERT_TRUE(multi.all_optimal());
  const double f = fed.realized_total().total, m = multi.realized_total().total;
  EXPECT_NEAR(m, f, 1e-7 * f);
}

TEST(Scheduler, SingleEipMakesAllModelsCoincide) {
  Scenario sc = unit4();
  for (auto& e : sc.edge_nodes) e.owner_eip = "A";
  sc.contracts.fixed = {{"video", {"A"}}, {"game", {"A"}}};
  sc.contracts.multihoming = sc.contracts.fixed;
  const DemandSource src = make_demand_source(sc, 0);
  const double f = run_see(sc, src, {}).realized_total().total;
  EXPECT_NEAR(run_fixed_contract(sc, src).realized_total().total, f, 1e-9 * f);
  EXPECT_NEAR(run_multihoming(sc, src).realized_total().total, f, 1e-9 * f);
}

TEST(Scheduler, FederationNeverCostsMoreThanEitherBaseline) {
  std::mt19937_64 rng(17);
  int compared = 0;
  for (int trial = 0; trial < 40; ++trial) {
    Instance inst = random_instance(rng, 2, 2, 4, 1);
    Scenario& sc = inst.scenario;
    sc.time_grid.slot_count = 1;
    sc.contracts.fixed = {{"s0", {"A"}}, {"s1", {"B"}}};
    sc.contracts.multihoming = {{"s0", {"A", "B"}}, {"s1", {"B"}}};
    const DemandSource src{DemandSet(2, 2, 0), single_slot(inst.demand)};
    const auto fed = run_see(sc, src, {});
    if (!fed.all_optimal()) continue;
    const double f = fed.realized_total().total;
    for (auto m : {ProvisioningModel::fixed_contract, ProvisioningModel::multihoming}) {
      const auto tl = run_model(m, sc, src);
      if (!tl.all_optimal()) continue;
      ++compared;
      EXPECT_LE(f, tl.realized_total().total + 2e-7 * std::max(1.0, f)) << trial << " " << to_string(m);
    }
  }
  EXPECT_GE(compared, 20);
}

TEST(Scheduler, InfeasibleSlotIsRecordedOrAborts) {
  Scenario sc = unit4();
  sc.services[1].latency_requirement = 1e-3; // unreachable even fully on the nearest edge
  const DemandSource src = make_demand_source(sc, 0);
  const auto tl = run_see(sc, src, {});
  ASSERT_EQ(tl.infeasible_slots(), 24u);
  EXPECT_NE(tl.slots[0].diagnostic.find("infeasible"), std::string::npos);
  EXPECT_NE(tl.slots[0].diagnostic.find("game"), std::string::npos) << tl.slots[0].diagnostic;
  EXPECT_EQ(tl.realized_total().total, 0.0);
  ScheduleOptions abort;
  abort.abort_on_infeasible = true;
  EXPECT_THROW(run_see(sc, src, {}, abort), infeasible_error);
}

TEST(Scheduler, MismatchedDemandSourceIsRejected) {
  const Scenario sc = unit4();
  const DemandSource src{DemandSet(1, 1, 0), DemandSet(1, 1, 24)};
  EXPECT_THROW(run_see(sc, src, {}), input_error);
}

TEST(Scheduler, ParseModelNames) {
  EXPECT_EQ(parse_model("federation"), ProvisioningModel::federation);
  EXPECT_EQ(parse_model("fixed"), ProvisioningModel::fixed_contract);
  EXPECT_EQ(parse_model("multihoming"), ProvisioningModel::multihoming);
  EXPECT_THROW(parse_model("mesh"), config_error);
}
