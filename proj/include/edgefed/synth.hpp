#pragma once

// Synthetic Toronto-like scenario: three EIPs with base-station-style edge
// nodes scattered over the city, three remote cloud regions, and three
// services with distinct diurnal profiles. The larger node counts are strict
// supersets of the smaller ones under the same seed.

#include <edgefed/model.hpp>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace edgefed {

struct SynthOptions {
  std::size_t nodes = 30;        ///< edge nodes in total, split evenly over the three EIPs
  std::uint64_t seed = 2019;
  std::size_t areas = 24;
  double total_population = 2800.0;
  double distance_scale = 2.0e-3; ///< latency units per km per demand unit
  double node_storage_min = 200.0, node_storage_max = 450.0;
  double node_compute_min = 150.0, node_compute_max = 300.0;
  double price_factor_min = 0.4, price_factor_max = 2.5;
  double edge_price_storage = 1.0, edge_price_compute = 1.2, edge_price_comm = 0.2;
  double cloud_price_storage = 0.1, cloud_price_compute = 0.3, cloud_price_comm = 0.05;
  double cloud_storage = 20000.0, cloud_compute = 20000.0;
};

namespace detail {

/// Uniform draw in [lo, hi) from raw engine bits, stable across platforms.
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Diurnal curve peaking at hour `peak`, scaled so its maximum is 1.
inline std::vector<double> diurnal(std::size_t slots, double peak, double floor) {
  std::vector<double> q(slots);
  for (std::size_t t = 0; t < slots; ++t) {
    const double phase = 2.0 * std::numbers::pi * (static_cast<double>(t) - peak) / static_cast<double>(slots);
    q[t] = floor + (1.0 - floor) * 0.5 * (1.0 + std::cos(phase));
  }
  return q;
}

} // namespace detail

inline Scenario synth_toronto(const SynthOptions& opt = {}) {
  if (opt.nodes < 3) throw input_error("synthetic scenario needs at least three edge nodes");
  constexpr double lat0 = 43.70, lon0 = -79.40;
  Scenario sc;
  sc.name = "toronto" + std::to_string(opt.nodes);
  sc.description = "synthetic Toronto-like topology (" + std::to_string(opt.nodes) +
                   " edge nodes, seed " + std::to_string(opt.seed) + "); not measured data";
  sc.time_grid = {24, 1.0};
  sc.coordinates = CoordinateMode::geodetic;
  sc.distance_scale = opt.distance_scale;

  // Areas and nodes draw from separate streams so the node count does not
  // shift the area layout.
  std::mt19937_64 area_rng(opt.seed);
  const std::size_t cols = 6, rows = (opt.areas + cols - 1) / cols;
  std::vector<double> weight(opt.areas);
  double wsum = 0.0;
  for (std::size_t i = 0; i < opt.areas; ++i) {
    const double r = static_cast<double>(i / cols), c = static_cast<double>(i % cols);
    const double lat = lat0 + (r - 0.5 * (static_cast<double>(rows) - 1.0)) * 0.05 + detail::uniform(area_rng, -0.01, 0.01);
    const double lon = lon0 + (c - 0.5 * (static_cast<double>(cols) - 1.0)) * 0.07 + detail::uniform(area_rng, -0.015, 0.015);
    weight[i] = detail::uniform(area_rng, 0.5, 1.5);
    wsum += weight[i];
    sc.areas.push_back({"area" + std::to_string(i + 1), {lat, lon}, 0.0});
  }
  double assigned = 0.0;
  for (std::size_t i = 0; i < opt.areas; ++i) {
    const double pop = i + 1 == opt.areas ? opt.total_population - assigned
                                          : std::round(opt.total_population * weight[i] / wsum);
    sc.areas[i].population = pop;
    assigned += pop;
  }
  sc.total_population = opt.total_population;

  struct Spec {
    const char* id;
    const char* name;
    double k_s, k_c, peak, floor;
  };
  for (const Spec& s : {Spec{"facebook", "Facebook", 0.2, 0.8, 20.0, 0.30},
                        Spec{"valve", "Valve", 1.0, 1.5, 22.0, 0.20},
                        Spec{"netflix", "Netflix", 0.8, 0.5, 21.0, 0.25}}) {
    Service svc;
    svc.id = s.id;
    svc.name = s.name;
    svc.k_s = s.k_s;
    svc.k_c = s.k_c;
    svc.r_p = 1.0;
    svc.profile = detail::diurnal(24, s.peak, s.floor);
    svc.latency_requirement = default_latency_table().at(detail::lower(s.name)).front();
    sc.services.push_back(std::move(svc));
  }

  const char* eips[] = {"Telus", "Rogers", "Bell"};
  const std::size_t max_per_eip = 64;
  const std::size_t per_eip[] = {(opt.nodes + 2) / 3, (opt.nodes + 1) / 3, opt.nodes / 3};
  for (std::size_t k = 0; k < 3; ++k) {
    if (per_eip[k] > max_per_eip) throw input_error("too many synthetic edge nodes");
    std::mt19937_64 rng(opt.seed * 1000003u + k + 1);
    for (std::size_t i = 0; i < per_eip[k]; ++i) {
      EdgeNode e;
      e.id = std::string(eips[k]) + "-" + std::to_string(i + 1);
      e.owner_eip = eips[k];
      e.location = {lat0 + detail::uniform(rng, -0.09, 0.09), lon0 + detail::uniform(rng, -0.2, 0.2)};
      e.storage_capacity = std::round(detail::uniform(rng, opt.node_storage_min, opt.node_storage_max));
      e.compute_capacity = std::round(detail::uniform(rng, opt.node_compute_min, opt.node_compute_max));
      const double f = detail::uniform(rng, opt.price_factor_min, opt.price_factor_max);
      e.price_storage = opt.edge_price_storage * f;
      e.price_compute = opt.edge_price_compute * f;
      e.price_comm = opt.edge_price_comm * f;
      sc.edge_nodes.push_back(std::move(e));
    }
  }

  sc.cloud_nodes = {{"montreal", {45.50, -73.57}, opt.cloud_storage, opt.cloud_compute},
                    {"council-bluffs", {41.26, -95.86}, opt.cloud_storage, opt.cloud_compute},
                    {"moncks-corner", {33.20, -80.01}, opt.cloud_storage, opt.cloud_compute}};
  sc.prices = {opt.cloud_price_storage, opt.cloud_price_compute, opt.cloud_price_comm};

  sc.contracts.fixed = {{"facebook", {"Telus"}}, {"valve", {"Rogers"}}, {"netflix", {"Bell"}}};
  sc.contracts.multihoming = {
      {"facebook", {"Telus", "Bell"}}, {"valve", {"Telus", "Rogers"}}, {"netflix", {"Rogers", "Bell"}}};
  return sc;
}

} // namespace edgefed
