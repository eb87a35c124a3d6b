#pragma once

// Domain model shared by every module: topology, services, prices, time grid
// and the four allocation tensors.

#include <edgefed/array.hpp>
#include <edgefed/errors.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace edgefed {

struct TimeGrid {
  std::size_t slot_count = 1;
  double slot_length_hours = 1.0;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

enum class CoordinateMode { planar, geodetic };

/// Planar mode: (x, y) in distance units. Geodetic mode: x = latitude, y =
/// longitude, both in degrees; distances come out in kilometres.
struct Location {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Location&, const Location&) = default;
};

struct UserArea {
  std::string id;
  Location location;
  double population = 0.0;

  friend bool operator==(const UserArea&, const UserArea&) = default;
};

struct Service {
  std::string id;
  std::string name;
  double k_s = 1.0;                ///< post-processing size coefficient
  double k_c = 1.0;                ///< compute units per storage unit
  double r_p = 1.0;                ///< per-unit computation requirement
  double latency_requirement = 1.0; ///< l_p, abstract latency units
  std::vector<double> profile;     ///< normalized demand q_p(t), one value per slot

  friend bool operator==(const Service&, const Service&) = default;
};

struct EdgeNode {
  std::string id;
  std::string owner_eip;
  Location location;
  double storage_capacity = 0.0;
  double compute_capacity = 0.0;
  double price_storage = 0.0;
  double price_compute = 0.0;
  double price_comm = 0.0;

  friend bool operator==(const EdgeNode&, const EdgeNode&) = default;
};

struct CloudNode {
  std::string id;
  Location location;
  double storage_capacity = 0.0;
  double compute_capacity = 0.0;

  friend bool operator==(const CloudNode&, const CloudNode&) = default;
};

/// Cloud unit prices are uniform across cloud nodes.
struct PriceBook {
  double cloud_storage = 0.0;
  double cloud_compute = 0.0;
  double cloud_comm = 0.0;

  friend bool operator==(const PriceBook&, const PriceBook&) = default;
};

/// Service-to-EIP contracts used only by the baseline models.
struct ContractTable {
  std::map<std::string, std::vector<std::string>> fixed;       ///< service id -> exactly one EIP
  std::map<std::string, std::vector<std::string>> multihoming; ///< service id -> one or more EIPs

  friend bool operator==(const ContractTable&, const ContractTable&) = default;
};

/// Bounds on the satisfaction ratio (alias: l_p^sat / r_p^sat).
struct SatisfactionBounds {
  double lower = 0.99;
  double upper = 1.0;

  friend bool operator==(const SatisfactionBounds&, const SatisfactionBounds&) = default;
};

/// One row of a latency-requirement sweep: service id -> l_p.
struct LatencyGroup {
  int number = 0; ///< 0 for a custom group
  std::map<std::string, double> requirements;

  friend bool operator==(const LatencyGroup&, const LatencyGroup&) = default;
};

struct Scenario {
  std::string name = "scenario";
  std::string description;
  TimeGrid time_grid;
  CoordinateMode coordinates = CoordinateMode::planar;
  double distance_scale = 1.0; ///< latency units per distance unit
  double total_population = 0.0;
  double demand_jitter = 0.0;  ///< relative spatial jitter of demand apportionment (0 = proportional)
  std::vector<UserArea> areas;
  std::vector<Service> services;
  std::vector<EdgeNode> edge_nodes;
  std::vector<CloudNode> cloud_nodes;
  PriceBook prices;
  ContractTable contracts;
  SatisfactionBounds satisfaction_bounds;
  std::vector<LatencyGroup> latency_groups; ///< empty: the built-in three-service table applies

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// ---------------------------------------------------------------------------
// Geometry

namespace detail {

inline constexpr double earth_radius_km = 6371.0088;

inline void check_location(const Location& loc, CoordinateMode mode) {
  if (!std::isfinite(loc.x) || !std::isfinite(loc.y))
    throw input_error("non-finite coordinate");
  if (mode == CoordinateMode::geodetic) {
    if (loc.x < -90.0 || loc.x > 90.0)
      throw input_error("latitude out of range: " + std::to_string(loc.x));
    if (loc.y < -180.0 || loc.y > 180.0)
      throw input_error("longitude out of range: " + std::to_string(loc.y));
  }
}

inline double haversine_km(const Location& a, const Location& b) {
  constexpr double deg = std::numbers::pi / 180.0;
  const double dlat = (b.x - a.x) * deg;
  const double dlon = (b.y - a.y) * deg;
  const double s = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(a.x * deg) * std::cos(b.x * deg) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * earth_radius_km * std::asin(std::min(1.0, std::sqrt(s)));
}

} // namespace detail

/// Delivery distance h between a node and a user area, in latency units.
inline double distance(const Location& node, const Location& area, CoordinateMode mode, double distance_scale) {
  detail::check_location(node, mode);
  detail::check_location(area, mode);
  if (!(distance_scale > 0.0) || !std::isfinite(distance_scale))
    throw input_error("distance_scale must be positive");
  const double raw = mode == CoordinateMode::planar ? std::hypot(node.x - area.x, node.y - area.y)
                                                    : detail::haversine_km(node, area);
  return raw * distance_scale;
}

/// Precomputed h_u^e and h_u^a.
struct DistanceTable {
  Array2<double> edge;  ///< [area][edge node]
  Array2<double> cloud; ///< [area][cloud node]
};

inline DistanceTable make_distance_table(const Scenario& sc) {
  DistanceTable t{Array2<double>(sc.areas.size(), sc.edge_nodes.size()),
                  Array2<double>(sc.areas.size(), sc.cloud_nodes.size())};
  for (std::size_t u = 0; u < sc.areas.size(); ++u) {
    for (std::size_t e = 0; e < sc.edge_nodes.size(); ++e)
      t.edge(u, e) = distance(sc.edge_nodes[e].location, sc.areas[u].location, sc.coordinates, sc.distance_scale);
    for (std::size_t a = 0; a < sc.cloud_nodes.size(); ++a)
      t.cloud(u, a) = distance(sc.cloud_nodes[a].location, sc.areas[u].location, sc.coordinates, sc.distance_scale);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Lookup helpers

template <typename Seq>
std::optional<std::size_t> find_index(const Seq& items, const std::string& id) {
  for (std::size_t i = 0; i < items.size(); ++i)
    if (items[i].id == id) return i;
  return std::nullopt;
}

template <typename Seq>
std::size_t index_of(const Seq& items, const std::string& id, const char* what) {
  if (auto i = find_index(items, id)) return *i;
  throw input_error(std::string("unknown ") + what + " id '" + id + "'");
}

/// EIP ids in order of first appearance among edge nodes.
inline std::vector<std::string> eip_ids(const Scenario& sc) {
  std::vector<std::string> out;
  for (const auto& e : sc.edge_nodes)
    if (std::find(out.begin(), out.end(), e.owner_eip) == out.end()) out.push_back(e.owner_eip);
  return out;
}

inline bool has_eip(const Scenario& sc, const std::string& eip) {
  return std::any_of(sc.edge_nodes.begin(), sc.edge_nodes.end(),
                     [&](const EdgeNode& e) { return e.owner_eip == eip; });
}

// ---------------------------------------------------------------------------
// Allocation

/// Fractions of one slot's demand placed on each node.
struct Allocation {
  std::size_t slot = 0;
  Array3<double> alpha;   ///< [area][service][edge]  storage on edge
  Array3<double> beta;    ///< [area][service][edge]  compute on edge
  Array3<double> theta_s; ///< [area][service][cloud] storage on cloud
  Array3<double> theta_c; ///< [area][service][cloud] compute on cloud

  Allocation() = default;
  Allocation(std::size_t slot_index, std::size_t areas, std::size_t services, std::size_t edges, std::size_t clouds)
      : slot(slot_index), alpha(areas, services, edges), beta(areas, services, edges),
        theta_s(areas, services, clouds), theta_c(areas, services, clouds) {}

  static Allocation zeros(const Scenario& sc, std::size_t slot_index) {
    return Allocation(slot_index, sc.areas.size(), sc.services.size(), sc.edge_nodes.size(), sc.cloud_nodes.size());
  }

  /// Everything on cloud node `cloud`.
  static Allocation all_cloud(const Scenario& sc, std::size_t slot_index, std::size_t cloud = 0) {
    Allocation a = zeros(sc, slot_index);
    for (std::size_t u = 0; u < sc.areas.size(); ++u)
      for (std::size_t p = 0; p < sc.services.size(); ++p) {
        a.theta_s(u, p, cloud) = 1.0;
        a.theta_c(u, p, cloud) = 1.0;
      }
    return a;
  }

  std::size_t areas() const noexcept { return alpha.extent0(); }
  std::size_t services() const noexcept { return alpha.extent1(); }
  std::size_t edges() const noexcept { return alpha.extent2(); }
  std::size_t clouds() const noexcept { return theta_s.extent2(); }

  double storage_sum(std::size_t u, std::size_t p) const {
    double s = 0.0;
    for (std::size_t e = 0; e < edges(); ++e) s += alpha(u, p, e);
    for (std::size_t a = 0; a < clouds(); ++a) s += theta_s(u, p, a);
    return s;
  }
  double compute_sum(std::size_t u, std::size_t p) const {
    double s = 0.0;
    for (std::size_t e = 0; e < edges(); ++e) s += beta(u, p, e);
    for (std::size_t a = 0; a < clouds(); ++a) s += theta_c(u, p, a);
    return s;
  }

  friend bool operator==(const Allocation&, const Allocation&) = default;
};

/// Largest deviation of the storage and compute fraction sums from 1.
inline double conservation_error(const Allocation& a) {
  double worst = 0.0;
  for (std::size_t u = 0; u < a.areas(); ++u)
    for (std::size_t p = 0; p < a.services(); ++p)
      worst = std::max({worst, std::abs(a.storage_sum(u, p) - 1.0), std::abs(a.compute_sum(u, p) - 1.0)});
  return worst;
}

/// Fractions are all inside [0,1] and both sums equal 1 within `tol`.
inline bool is_conserving(const Allocation& a, double tol = 1e-9) {
  auto in_unit = [tol](const auto& arr) {
    return std::all_of(arr.data().begin(), arr.data().end(),
                       [tol](double v) { return v >= -tol && v <= 1.0 + tol; });
  };
  return in_unit(a.alpha) && in_unit(a.beta) && in_unit(a.theta_s) && in_unit(a.theta_c) &&
         conservation_error(a) <= tol;
}

// ---------------------------------------------------------------------------
// Latency requirement groups

namespace detail {
inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}
} // namespace detail

/// The seven-group requirement table for the social / gaming / video services,
/// keyed by lower-case service name. Group g is at index g-1.
inline const std::map<std::string, std::vector<double>>& default_latency_table() {
  static const std::map<std::string, std::vector<double>> table{
      {"facebook", {72, 68, 64, 60, 56, 52, 48}},
      {"valve", {36, 34, 32, 30, 28, 26, 24}},
      {"netflix", {54, 51, 48, 45, 42, 39, 36}},
  };
  return table;
}

/// Resolve requirement group `number` (1-based) for a scenario: the
/// scenario's own table when present, otherwise the built-in table matched by
/// service name.
inline LatencyGroup latency_group(const Scenario& sc, int number) {
  for (const auto& g : sc.latency_groups)
    if (g.number == number) return g;
  if (!sc.latency_groups.empty())
    throw config_error("latency group " + std::to_string(number) + " not defined in scenario");
  const auto& table = default_latency_table();
  LatencyGroup g{number, {}};
  for (const auto& s : sc.services) {
    auto it = table.find(detail::lower(s.name));
    if (it == table.end())
      throw config_error("no built-in latency requirements for service '" + s.name + "'");
    if (number < 1 || number > static_cast<int>(it->second.size()))
      throw config_error("latency group " + std::to_string(number) + " out of range 1..7");
    g.requirements[s.id] = it->second[static_cast<std::size_t>(number - 1)];
  }
  return g;
}

/// Copy of `sc` with every l_p named by `group` replaced.
inline Scenario with_latency_group(const Scenario& sc, const LatencyGroup& group) {
  Scenario out = sc;
  for (const auto& [id, lp] : group.requirements) {
    const std::size_t p = index_of(out.services, id, "service");
    out.services[p].latency_requirement = lp;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validation

struct ValidationIssue {
  std::string code; ///< stable machine-readable tag, e.g. "profile_length"
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool clean() const noexcept { return issues.empty(); }
  bool has(const std::string& code) const {
    return std::any_of(issues.begin(), issues.end(), [&](const auto& i) { return i.code == code; });
  }
};

inline ValidationReport validate_scenario(const Scenario& sc) {
  ValidationReport r;
  auto add = [&r](std::string code, std::string msg) { r.issues.push_back({std::move(code), std::move(msg)}); };
  auto num = [](double v) { return std::to_string(v); };

  if (sc.time_grid.slot_count < 1) add("time_grid", "slot_count must be >= 1");
  if (!(sc.time_grid.slot_length_hours > 0.0)) add("time_grid", "slot_length_hours must be positive");
  if (!(sc.distance_scale > 0.0) || !std::isfinite(sc.distance_scale)) add("distance_scale", "distance_scale must be positive");
  if (sc.demand_jitter < 0.0 || sc.demand_jitter >= 1.0) add("demand_jitter", "demand_jitter must lie in [0,1)");

  auto check_ids = [&](const auto& items, const char* what) {
    std::set<std::string> seen;
    for (const auto& it : items) {
      if (it.id.empty()) add("dangling_id", std::string("empty ") + what + " id");
      else if (!seen.insert(it.id).second) add("duplicate_id", std::string("duplicate ") + what + " id '" + it.id + "'");
    }
  };
  check_ids(sc.areas, "area");
  check_ids(sc.services, "service");
  check_ids(sc.edge_nodes, "edge node");
  check_ids(sc.cloud_nodes, "cloud node");

  auto check_loc = [&](const Location& l, const std::string& who) {
    try {
      detail::check_location(l, sc.coordinates);
    } catch (const input_error& e) {
      add("coordinates", who + ": " + e.what());
    }
  };

  if (sc.areas.empty()) add("areas", "scenario has no user areas");
  double pop = 0.0;
  for (const auto& a : sc.areas) {
    check_loc(a.location, "area '" + a.id + "'");
    if (!(a.population >= 0.0)) add("negative_population", "area '" + a.id + "' population " + num(a.population));
    pop += a.population;
  }
  if (!(sc.total_population > 0.0)) add("total_population", "total population must be positive");
  else if (std::abs(pop - sc.total_population) > 1e-9 * std::max(1.0, sc.total_population))
    add("population_sum", "area populations sum to " + num(pop) + " but total_population is " + num(sc.total_population));

  if (sc.services.empty()) add("services", "scenario has no services");
  for (const auto& s : sc.services) {
    const std::string who = "service '" + s.id + "'";
    if (!(s.k_s > 0.0)) add("coefficient", who + " k_s must be positive");
    if (!(s.k_c > 0.0)) add("coefficient", who + " k_c must be positive");
    if (!(s.r_p > 0.0)) add("coefficient", who + " r_p must be positive");
    if (!(s.latency_requirement > 0.0)) add("coefficient", who + " latency requirement must be positive");
    if (s.profile.size() != sc.time_grid.slot_count)
      add("profile_length", who + " profile length " + std::to_string(s.profile.size()) + " does not match " +
                                std::to_string(sc.time_grid.slot_count) + " slots");
    for (double q : s.profile)
      if (!(q >= 0.0 && q <= 1.0)) {
        add("profile_range", who + " profile value " + num(q) + " outside [0,1]");
        break;
      }
  }

  for (const auto& e : sc.edge_nodes) {
    const std::string who = "edge node '" + e.id + "'";
    check_loc(e.location, who);
    if (e.owner_eip.empty()) add("dangling_id", who + " has no owner EIP");
    if (!(e.storage_capacity >= 0.0) || !(e.compute_capacity >= 0.0)) add("negative_capacity", who);
    if (!(e.price_storage >= 0.0) || !(e.price_compute >= 0.0) || !(e.price_comm >= 0.0)) add("negative_price", who);
  }
  for (const auto& c : sc.cloud_nodes) {
    const std::string who = "cloud node '" + c.id + "'";
    check_loc(c.location, who);
    if (!(c.storage_capacity >= 0.0) || !(c.compute_capacity >= 0.0)) add("negative_capacity", who);
  }
  if (!(sc.prices.cloud_storage >= 0.0) || !(sc.prices.cloud_compute >= 0.0) || !(sc.prices.cloud_comm >= 0.0))
    add("negative_price", "cloud prices");

  const auto& b = sc.satisfaction_bounds;
  if (!(b.lower <= b.upper) || b.lower < 0.0 || b.upper > 1.0)
    add("satisfaction_bounds", "need 0 <= l_1 <= l_2 <= 1");

  auto check_contracts = [&](const auto& table, const char* kind, bool exactly_one) {
    for (const auto& [svc, eips] : table) {
      if (!find_index(sc.services, svc)) add("dangling_id", std::string(kind) + " contract names unknown service '" + svc + "'");
      if (exactly_one && eips.size() != 1)
        add("contract_arity", std::string(kind) + " contract for '" + svc + "' must name exactly one EIP");
      if (!exactly_one && eips.empty())
        add("contract_arity", std::string(kind) + " contract for '" + svc + "' names no EIP");
      for (const auto& eip : eips)
        if (!has_eip(sc, eip)) add("dangling_id", std::string(kind) + " contract names unknown EIP '" + eip + "'");
    }
  };
  check_contracts(sc.contracts.fixed, "fixed", true);
  check_contracts(sc.contracts.multihoming, "multihoming", false);

  for (const auto& g : sc.latency_groups)
    for (const auto& [svc, lp] : g.requirements) {
      if (!find_index(sc.services, svc))
        add("dangling_id", "latency group " + std::to_string(g.number) + " names unknown service '" + svc + "'");
      if (!(lp > 0.0)) add("coefficient", "latency group " + std::to_string(g.number) + " requirement must be positive");
    }

  // Peak all-cloud load must fit in the aggregate cloud capacity.
  bool profiles_ok = !r.has("profile_length") && !r.has("profile_range");
  if (profiles_ok && sc.total_population > 0.0 && !sc.services.empty()) {
    double peak_s = 0.0, peak_c = 0.0;
    for (std::size_t t = 0; t < sc.time_grid.slot_count; ++t) {
      double s = 0.0, c = 0.0;
      for (const auto& svc : sc.services) {
        s += sc.total_population * svc.profile[t];
        c += sc.total_population * svc.profile[t] * svc.k_c;
      }
      peak_s = std::max(peak_s, s);
      peak_c = std::max(peak_c, c);
    }
    double cap_s = 0.0, cap_c = 0.0;
    for (const auto& c : sc.cloud_nodes) {
      cap_s += c.storage_capacity;
      cap_c += c.compute_capacity;
    }
    if (cap_s < peak_s)
      add("cloud_capacity_below_peak", "cloud storage capacity " + num(cap_s) + " below peak demand " + num(peak_s));
    if (cap_c < peak_c)
      add("cloud_capacity_below_peak", "cloud compute capacity " + num(cap_c) + " below peak demand " + num(peak_c));
  }
  return r;
}

} // namespace edgefed
