#include <edgefed/scenario_io.hpp>
#include <edgefed/synth.hpp>

#include <gtest/gtest.h>

#include <fstream>

using namespace edgefed;

namespace {

const std::filesystem::path dir = EDGEFED_SCENARIO_DIR;

nlohmann::json unit4_doc() {
  std::ifstream in(dir / "unit4.json");
  return nlohmann::json::parse(in);
}

std::string error_of(const nlohmann::json& doc) {
  try {
    scenario_from_json(doc, dir);
  } catch (const config_error& e) {
    return e.what();
  }
  return {};
}

} // namespace

TEST(ScenarioIo, ShippedScenariosRoundTripLosslessly) {
  for (const char* name : {"unit4.json", "toronto30.json", "toronto50.json"}) {
    const Scenario sc = load_scenario(dir / name);
    EXPECT_TRUE(validate_scenario(sc).clean()) << name;
    EXPECT_EQ(parse_scenario(dump_scenario(sc)), sc) << name;
  }
}

TEST(ScenarioIo, TraceProfileMatchesNormalizedTrace) {
  const Scenario sc = load_scenario(dir / "unit4.json");
  std::ifstream in(dir / "traces" / "unit_video.csv");
  const auto trace = ingest_trace(in);
  const auto expected = normalize_profile(trace, sc.time_grid, parse_timestamp("2024-03-04T00:00:00Z"));
  EXPECT_EQ(sc.services[0].profile, expected);
  double peak = 0.0;
  for (double q : expected) peak = std::max(peak, q);
  EXPECT_EQ(peak, 1.0);
}

TEST(ScenarioIo, MissingKeysNameTheirPath) {
  auto doc = unit4_doc();
  doc.erase("prices");
  EXPECT_NE(error_of(doc).find("'prices'"), std::string::npos) << error_of(doc);

  doc = unit4_doc();
  doc["prices"].erase("cloud_comm_per_unit");
  EXPECT_NE(error_of(doc).find("'prices.cloud_comm_per_unit'"), std::string::npos) << error_of(doc);

  doc = unit4_doc();
  doc["edge_nodes"][2]["location"] = "here";
  EXPECT_NE(error_of(doc).find("edge_nodes[2].location"), std::string::npos) << error_of(doc);

  doc = unit4_doc();
  doc["services"][1].erase("profile");
  EXPECT_NE(error_of(doc).find("services[1].profile"), std::string::npos) << error_of(doc);
}

TEST(ScenarioIo, BadValuesAreConfigErrors) {
  auto doc = unit4_doc();
  doc["time_grid"]["slot_count"] = 2.5;
  EXPECT_THROW(scenario_from_json(doc, dir), config_error);
  doc = unit4_doc();
  doc["coordinates"] = "polar";
  EXPECT_THROW(scenario_from_json(doc, dir), config_error);
  doc = unit4_doc();
  doc["services"][0]["trace"]["path"] = "traces/missing.csv";
  EXPECT_THROW(scenario_from_json(doc, dir), config_error);
}

TEST(ScenarioIo, InvalidJsonIsAParseError) {
  EXPECT_THROW(parse_scenario("{\"name\": "), parse_error);
  EXPECT_THROW(load_scenario(dir / "does_not_exist.json"), config_error);
}

TEST(ScenarioIo, ShortInlineProfileFailsValidation) {
  auto doc = unit4_doc();
  auto& profile = doc["services"][1]["profile"];
  profile.erase(profile.size() - 1);
  const Scenario sc = scenario_from_json(doc, dir);
  const auto report = validate_scenario(sc);
  EXPECT_TRUE(report.has("profile_length"));
}

TEST(ScenarioIo, OptionalFieldsDefault) {
  auto doc = unit4_doc();
  doc.erase("demand_jitter_relative");
  doc.erase("satisfaction_bounds");
  doc.erase("latency_groups");
  doc.erase("description");
  const Scenario sc = scenario_from_json(doc, dir);
  EXPECT_EQ(sc.demand_jitter, 0.0);
  EXPECT_EQ(sc.satisfaction_bounds, SatisfactionBounds{});
  EXPECT_TRUE(sc.latency_groups.empty());
  EXPECT_TRUE(sc.description.empty());
}

TEST(Synth, LargerInstanceExtendsSmallerOne) {
  const Scenario small = synth_toronto({.nodes = 30});
  const Scenario large = synth_toronto({.nodes = 50});
  EXPECT_EQ(small.areas, large.areas);
  EXPECT_EQ(small.services, large.services);
  EXPECT_EQ(small.cloud_nodes, large.cloud_nodes);
  ASSERT_EQ(small.edge_nodes.size(), 30u);
  ASSERT_EQ(large.edge_nodes.size(), 50u);
  for (const auto& e : small.edge_nodes) {
    auto it = std::find_if(large.edge_nodes.begin(), large.edge_nodes.end(), [&](const auto& n) { return n.id == e.id; });
    ASSERT_NE(it, large.edge_nodes.end()) << e.id;
    EXPECT_EQ(*it, e);
  }
}

TEST(Synth, DeterministicAndValid) {
  const Scenario a = synth_toronto({.nodes = 30});
  EXPECT_EQ(a, synth_toronto({.nodes = 30}));
  EXPECT_NE(a, synth_toronto({.nodes = 30, .seed = 5}));
  EXPECT_TRUE(validate_scenario(a).clean());
  EXPECT_EQ(a.coordinates, CoordinateMode::geodetic);
  std::map<std::string, int> per_eip;
  for (const auto& e : a.edge_nodes) ++per_eip[e.owner_eip];
  EXPECT_EQ(per_eip, (std::map<std::string, int>{{"Bell", 10}, {"Rogers", 10}, {"Telus", 10}}));
  EXPECT_THROW(synth_toronto({.nodes = 2}), input_error);
}

TEST(Synth, ShippedFilesMatchGenerator) {
  EXPECT_EQ(load_scenario(dir / "toronto30.json"), synth_toronto({.nodes = 30}));
  EXPECT_EQ(load_scenario(dir / "toronto50.json"), synth_toronto({.nodes = 50}));
}

TEST(Synth, ServiceNamesResolveTheBuiltInGroups) {
  const Scenario sc = synth_toronto();
  const auto g6 = latency_group(sc, 6);
  EXPECT_EQ(g6.requirements.at("facebook"), 52);
  EXPECT_EQ(g6.requirements.at("valve"), 26);
  EXPECT_EQ(g6.requirements.at("netflix"), 39);
  EXPECT_THROW(latency_group(sc, 8), config_error);
}
