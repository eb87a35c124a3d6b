#pragma once

// JSON scenario files. Quantities carry their unit in the key name; service
// profiles are either inline arrays or a trace CSV referenced by a path
// relative to the scenario file.

#include <edgefed/demand.hpp>
#include <edgefed/errors.hpp>
#include <edgefed/model.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace edgefed {

namespace detail {

using json = nlohmann::json;

/// Cursor into a JSON document that remembers its path for error messages.
class Node {
public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return j_; }

  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

  Node at(const char* key) const {
    if (!j_.is_object()) throw config_error(path_ + ": expected an object");
    auto it = j_.find(key);
    if (it == j_.end()) throw config_error("missing key '" + join(key) + "'");
    return {*it, join(key)};
  }

  Node at(std::size_t i) const { return {j_.at(i), path_ + "[" + std::to_string(i) + "]"}; }

  std::size_t size() const {
    if (!j_.is_array()) throw config_error(path_ + ": expected an array");
    return j_.size();
  }

  double number() const {
    if (!j_.is_number()) throw config_error(path_ + ": expected a number");
    return j_.get<double>();
  }

  double number(const char* key, double fallback) const { return has(key) ? at(key).number() : fallback; }

  std::string string() const {
    if (!j_.is_string()) throw config_error(path_ + ": expected a string");
    return j_.get<std::string>();
  }

  std::vector<std::string> strings() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).string());
    return out;
  }

  std::vector<double> numbers() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).number());
    return out;
  }

  Location location() const {
    const auto v = numbers();
    if (v.size() != 2) throw config_error(path_ + ": expected [x, y]");
    return {v[0], v[1]};
  }

private:
  std::string join(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
};

inline std::map<std::string, std::vector<std::string>> read_contract_map(const Node& n) {
  std::map<std::string, std::vector<std::string>> out;
  if (!n.raw().is_object()) throw config_error(n.path() + ": expected an object");
  for (auto it = n.raw().begin(); it != n.raw().end(); ++it)
    out[it.key()] = Node(it.value(), n.path() + "." + it.key()).strings();
  return out;
}

inline std::vector<double> read_trace_profile(const Node& n, const TimeGrid& grid, const std::filesystem::path& base,
                                              const std::string& service_id) {
  const std::filesystem::path path = base / n.at("path").string();
  std::ifstream in(path);
  if (!in) throw config_error(n.path() + ": cannot open trace '" + path.string() + "'");
  const std::string column = n.has("service") ? n.at("service").string() : std::string();
  TrafficProfile profile;
  try {
    profile = ingest_trace(in, column);
  } catch (const parse_error& e) {
    throw parse_error(path.string() + ": " + e.what());
  }
  if (profile.observations.empty()) throw validation_error(path.string() + ": trace for '" + service_id + "' is empty");
  std::optional<Timestamp> origin;
  if (n.has("origin")) origin = parse_timestamp(n.at("origin").string());
  return normalize_profile(profile, grid, origin);
}

inline const char* mode_name(CoordinateMode m) { return m == CoordinateMode::planar ? "planar" : "geodetic"; }

} // namespace detail

/// Build a scenario from a parsed document. `base` resolves trace paths.
inline Scenario scenario_from_json(const nlohmann::json& doc, const std::filesystem::path& base = {}) {
  const detail::Node root(doc, "");
  Scenario sc;
  sc.name = root.has("name") ? root.at("name").string() : "scenario";
  if (root.has("description")) sc.description = root.at("description").string();

  const auto grid = root.at("time_grid");
  const double slots = grid.at("slot_count").number();
  if (slots < 1 || slots != std::floor(slots)) throw config_error("time_grid.slot_count must be a positive integer");
  sc.time_grid = {static_cast<std::size_t>(slots), grid.at("slot_length_hours").number()};

  const std::string mode = root.at("coordinates").string();
  if (mode == "planar") sc.coordinates = CoordinateMode::planar;
  else if (mode == "geodetic") sc.coordinates = CoordinateMode::geodetic;
  else throw config_error("coordinates: expected 'planar' or 'geodetic'");
  sc.distance_scale = root.at("distance_scale_latency_per_distance_unit").number();
  sc.total_population = root.at("total_population").number();
  sc.demand_jitter = root.number("demand_jitter_relative", 0.0);

  const auto areas = root.at("areas");
  for (std::size_t i = 0; i < areas.size(); ++i) {
    const auto a = areas.at(i);
    sc.areas.push_back({a.at("id").string(), a.at("location").location(), a.at("population").number()});
  }

  const auto services = root.at("services");
  for (std::size_t i = 0; i < services.size(); ++i) {
    const auto s = services.at(i);
    Service svc;
    svc.id = s.at("id").string();
    svc.name = s.has("name") ? s.at("name").string() : svc.id;
    svc.k_s = s.at("k_s").number();
    svc.k_c = s.at("k_c").number();
    svc.r_p = s.at("r_p_compute_per_unit").number();
    svc.latency_requirement = s.at("latency_requirement_units").number();
    if (s.has("profile")) svc.profile = s.at("profile").numbers();
    else if (s.has("trace")) svc.profile = detail::read_trace_profile(s.at("trace"), sc.time_grid, base, svc.id);
    else throw config_error("missing key '" + s.path() + ".profile' (or '" + s.path() + ".trace')");
    sc.services.push_back(std::move(svc));
  }

  const auto edges = root.at("edge_nodes");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto e = edges.at(i);
    sc.edge_nodes.push_back({e.at("id").string(), e.at("eip").string(), e.at("location").location(),
                             e.at("storage_capacity_units_per_slot").number(),
                             e.at("compute_capacity_units_per_slot").number(),
                             e.at("price_storage_per_unit").number(), e.at("price_compute_per_unit").number(),
                             e.at("price_comm_per_unit").number()});
  }

  const auto clouds = root.at("cloud_nodes");
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    const auto c = clouds.at(i);
    sc.cloud_nodes.push_back({c.at("id").string(), c.at("location").location(),
                              c.at("storage_capacity_units_per_slot").number(),
                              c.at("compute_capacity_units_per_slot").number()});
  }

  const auto prices = root.at("prices");
  sc.prices = {prices.at("cloud_storage_per_unit").number(), prices.at("cloud_compute_per_unit").number(),
               prices.at("cloud_comm_per_unit").number()};

  const auto contracts = root.at("contracts");
  if (contracts.has("fixed")) sc.contracts.fixed = detail::read_contract_map(contracts.at("fixed"));
  if (contracts.has("multihoming")) sc.contracts.multihoming = detail::read_contract_map(contracts.at("multihoming"));

  if (root.has("satisfaction_bounds")) {
    const auto b = root.at("satisfaction_bounds");
    sc.satisfaction_bounds = {b.at("lower").number(), b.at("upper").number()};
  }
  if (root.has("latency_groups")) {
    const auto groups = root.at("latency_groups");
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const auto g = groups.at(i);
      const double number = g.at("group").number();
      LatencyGroup lg{static_cast<int>(number), {}};
      const auto req = g.at("requirements_units");
      if (!req.raw().is_object()) throw config_error(req.path() + ": expected an object");
      for (auto it = req.raw().begin(); it != req.raw().end(); ++it)
        lg.requirements[it.key()] = detail::Node(it.value(), req.path() + "." + it.key()).number();
      sc.latency_groups.push_back(std::move(lg));
    }
  }
  return sc;
}

inline nlohmann::json scenario_to_json(const Scenario& sc) {
  using nlohmann::json;
  auto loc = [](const Location& l) { return json::array({l.x, l.y}); };
  json doc;
  doc["name"] = sc.name;
  if (!sc.description.empty()) doc["description"] = sc.description;
  doc["time_grid"] = {{"slot_count", sc.time_grid.slot_count}, {"slot_length_hours", sc.time_grid.slot_length_hours}};
  doc["coordinates"] = detail::mode_name(sc.coordinates);
  doc["distance_scale_latency_per_distance_unit"] = sc.distance_scale;
  doc["total_population"] = sc.total_population;
  doc["demand_jitter_relative"] = sc.demand_jitter;
  doc["areas"] = json::array();
  for (const auto& a : sc.areas)
    doc["areas"].push_back({{"id", a.id}, {"location", loc(a.location)}, {"population", a.population}});
  doc["services"] = json::array();
  for (const auto& s : sc.services)
    doc["services"].push_back({{"id", s.id},
                               {"name", s.name},
                               {"k_s", s.k_s},
                               {"k_c", s.k_c},
                               {"r_p_compute_per_unit", s.r_p},
                               {"latency_requirement_units", s.latency_requirement},
                               {"profile", s.profile}});
  doc["edge_nodes"] = json::array();
  for (const auto& e : sc.edge_nodes)
    doc["edge_nodes"].push_back({{"id", e.id},
                                 {"eip", e.owner_eip},
                                 {"location", loc(e.location)},
                                 {"storage_capacity_units_per_slot", e.storage_capacity},
                                 {"compute_capacity_units_per_slot", e.compute_capacity},
                                 {"price_storage_per_unit", e.price_storage},
                                 {"price_compute_per_unit", e.price_compute},
                                 {"price_comm_per_unit", e.price_comm}});
  doc["cloud_nodes"] = json::array();
  for (const auto& c : sc.cloud_nodes)
    doc["cloud_nodes"].push_back({{"id", c.id},
                                  {"location", loc(c.location)},
                                  {"storage_capacity_units_per_slot", c.storage_capacity},
                                  {"compute_capacity_units_per_slot", c.compute_capacity}});
  doc["prices"] = {{"cloud_storage_per_unit", sc.prices.cloud_storage},
                   {"cloud_compute_per_unit", sc.prices.cloud_compute},
                   {"cloud_comm_per_unit", sc.prices.cloud_comm}};
  doc["contracts"] = {{"fixed", sc.contracts.fixed}, {"multihoming", sc.contracts.multihoming}};
  doc["satisfaction_bounds"] = {{"lower", sc.satisfaction_bounds.lower}, {"upper", sc.satisfaction_bounds.upper}};
  if (!sc.latency_groups.empty()) {
    doc["latency_groups"] = json::array();
    for (const auto& g : sc.latency_groups)
      doc["latency_groups"].push_back({{"group", g.number}, {"requirements_units", g.requirements}});
  }
  return doc;
}

inline Scenario parse_scenario(std::string_view text, const std::filesystem::path& base = {}) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw parse_error(std::string("scenario is not valid JSON: ") + e.what());
  }
  return scenario_from_json(doc, base);
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot read scenario '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.parent_path());
}

inline std::string dump_scenario(const Scenario& sc) { return scenario_to_json(sc).dump(2) + "\n"; }

} // namespace edgefed
