#pragma once

// Scenario builders and brute-force oracles shared by the test programs.

#include <edgefed/demand.hpp>
#include <edgefed/model.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace edgefed::testkit {

/// Planar scenario with `areas` areas on a line, one flat-profile service per
/// entry of `service_names`, and nothing else. Callers add nodes.
inline Scenario planar_base(std::size_t areas, std::size_t slots = 1,
                            std::vector<std::string> service_names = {"svc"}) {
  Scenario sc;
  sc.name = "test";
  sc.time_grid = {slots, 1.0};
  sc.coordinates = CoordinateMode::planar;
  sc.distance_scale = 1.0;
  for (std::size_t u = 0; u < areas; ++u)
    sc.areas.push_back({"u" + std::to_string(u), {static_cast<double>(u), 0.0}, 1.0});
  sc.total_population = static_cast<double>(areas);
  for (const auto& n : service_names) {
    Service s;
    s.id = n;
    s.name = n;
    s.k_s = 0.5;
    s.k_c = 1.0;
    s.r_p = 1.0;
    s.latency_requirement = 1e6;
    s.profile.assign(slots, 1.0);
    sc.services.push_back(s);
  }
  return sc;
}

inline EdgeNode edge(std::string id, std::string eip, Location loc, double cap_s, double cap_c, double price_s,
                     double price_c, double price_m) {
  return {std::move(id), std::move(eip), loc, cap_s, cap_c, price_s, price_c, price_m};
}

inline CloudNode cloud(std::string id, Location loc, double cap_s, double cap_c) {
  return {std::move(id), loc, cap_s, cap_c};
}

/// A randomized small provisioning instance together with an explicit slice.
struct Instance {
  Scenario scenario;
  DemandSlice demand;
};

/// Random planar instance. Latency requirements fall between the latency of
/// serving everything from the nearest edge node and serving it from the
/// cloud, so the latency rows are usually active.
inline Instance random_instance(std::mt19937_64& rng, std::size_t areas, std::size_t services, std::size_t edges,
                                std::size_t clouds) {
  std::uniform_real_distribution<double> U01(0.0, 1.0);
  auto uni = [&](double a, double b) { return a + (b - a) * U01(rng); };
  std::vector<std::string> names;
  for (std::size_t p = 0; p < services; ++p) names.push_back("s" + std::to_string(p));
  Scenario sc = planar_base(areas, 1, names);
  sc.distance_scale = uni(0.05, 0.3);
  for (auto& a : sc.areas) a.location = {uni(0, 10), uni(0, 10)};
  for (auto& s : sc.services) {
    s.k_s = uni(0.2, 1.0);
    s.k_c = uni(0.5, 2.0);
    s.r_p = uni(0.5, 2.0);
  }
  DemandSlice d(areas, services);
  double total_s = 0.0, total_c = 0.0;
  for (std::size_t u = 0; u < areas; ++u)
    for (std::size_t p = 0; p < services; ++p) {
      d(u, p) = make_triple(uni(1.0, 10.0), sc.services[p]);
      total_s += d(u, p).s;
      total_c += d(u, p).c;
    }
  for (std::size_t e = 0; e < edges; ++e)
    sc.edge_nodes.push_back(edge("e" + std::to_string(e), e % 2 ? "B" : "A", {uni(0, 10), uni(0, 10)},
                                 uni(0.3, 1.2) * total_s, uni(0.3, 1.2) * total_c, uni(0.5, 3.0), uni(0.2, 2.0),
                                 uni(0.0, 0.5)));
  for (std::size_t a = 0; a < clouds; ++a)
    sc.cloud_nodes.push_back(cloud("c" + std::to_string(a), {uni(40, 60), uni(40, 60)}, uni(0.8, 3.0) * total_s,
                                   uni(0.8, 3.0) * total_c));
  sc.prices = {uni(0.1, 1.0), uni(0.05, 0.5), uni(0.0, 0.4)};

  for (std::size_t u = 0; u < areas; ++u)
    for (std::size_t p = 0; p < services; ++p) {
      const DemandTriple& t = d(u, p);
      double near = std::numeric_limits<double>::infinity(), far = 0.0;
      double best_edge_cap = 0.0;
      for (const auto& e : sc.edge_nodes) {
        near = std::min(near, distance(e.location, sc.areas[u].location, sc.coordinates, sc.distance_scale));
        best_edge_cap = std::max(best_edge_cap, e.compute_capacity);
      }
      for (const auto& c : sc.cloud_nodes)
        far = std::max(far, distance(c.location, sc.areas[u].location, sc.coordinates, sc.distance_scale));
      const double l_lo = (t.s + t.s_post) * near + t.c * sc.services[p].r_p / best_edge_cap;
      const double l_hi = (t.s + t.s_post) * far + t.c * sc.services[p].r_p / sc.cloud_nodes[0].compute_capacity;
      const double lp = l_lo + uni(0.3, 1.1) * (l_hi - l_lo);
      auto& req = sc.services[p].latency_requirement;
      req = u == 0 ? lp : std::max(req, lp);
    }
  return {std::move(sc), std::move(d)};
}

/// Exhaustive search over allocations whose fractions are multiples of
/// 1/`steps`. Costs, latencies and capacities are evaluated directly from the
/// scenario. Returns nullopt when no grid allocation is feasible.
inline std::optional<double> grid_oracle(const Scenario& sc, const DemandSlice& demand, int steps = 20) {
  struct NodeData {
    Location loc;
    double cap_s, cap_c, v_s, v_c, v_m;
  };
  std::vector<NodeData> nodes;
  for (const auto& e : sc.edge_nodes)
    nodes.push_back({e.location, e.storage_capacity, e.compute_capacity, e.price_storage, e.price_compute, e.price_comm});
  for (const auto& c : sc.cloud_nodes)
    nodes.push_back({c.location, c.storage_capacity, c.compute_capacity, sc.prices.cloud_storage,
                     sc.prices.cloud_compute, sc.prices.cloud_comm});
  const std::size_t N = nodes.size();

  // All ways of writing `steps` as an ordered sum of N nonnegative parts.
  std::vector<std::vector<int>> splits;
  std::vector<int> cur(N, 0);
  auto compose = [&](auto&& self, std::size_t i, int left) -> void {
    if (i + 1 == N) {
      cur[i] = left;
      splits.push_back(cur);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      cur[i] = k;
      self(self, i + 1, left - k);
    }
  };
  compose(compose, 0, steps);

  struct Candidate {
    double cost;
    std::vector<double> use; // storage use per node, then compute use per node
  };
  std::vector<std::vector<Candidate>> per_pair;
  for (std::size_t u = 0; u < sc.areas.size(); ++u)
    for (std::size_t p = 0; p < sc.services.size(); ++p) {
      const DemandTriple& d = demand(u, p);
      const Service& svc = sc.services[p];
      std::vector<double> h(N);
      for (std::size_t n = 0; n < N; ++n)
        h[n] = distance(nodes[n].loc, sc.areas[u].location, sc.coordinates, sc.distance_scale);
      std::vector<Candidate> cands;
      for (const auto& ss : splits) {
        double lat_s = 0.0, cost_s = 0.0;
        for (std::size_t n = 0; n < N; ++n) {
          const double f = ss[n] / double(steps);
          lat_s += (d.s + d.s_post) * h[n] * f;
          cost_s += f * (d.s * nodes[n].v_s + (d.s + d.s_post) * nodes[n].v_m);
        }
        if (lat_s > svc.latency_requirement * (1 + 1e-12)) continue;
        for (const auto& cs : splits) {
          double lat = lat_s, cost = cost_s;
          bool ok = true;
          for (std::size_t n = 0; n < N && ok; ++n) {
            const double f = cs[n] / double(steps);
            if (f == 0.0) continue;
            if (!(nodes[n].cap_c > 0.0)) ok = false;
            else {
              lat += d.c * f * svc.r_p / nodes[n].cap_c;
              cost += f * d.c * nodes[n].v_c;
            }
          }
          if (!ok || lat > svc.latency_requirement * (1 + 1e-12)) continue;
          Candidate c{cost, std::vector<double>(2 * N)};
          for (std::size_t n = 0; n < N; ++n) {
            c.use[n] = d.s * ss[n] / double(steps);
            c.use[N + n] = d.c * cs[n] / double(steps);
          }
          cands.push_back(std::move(c));
        }
      }
      if (cands.empty()) return std::nullopt;
      std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) { return a.cost < b.cost; });
      per_pair.push_back(std::move(cands));
    }

  std::vector<double> cap(2 * N);
  for (std::size_t n = 0; n < N; ++n) {
    cap[n] = nodes[n].cap_s;
    cap[N + n] = nodes[n].cap_c;
  }
  std::vector<double> rest_min(per_pair.size() + 1, 0.0);
  for (std::size_t k = per_pair.size(); k-- > 0;) rest_min[k] = rest_min[k + 1] + per_pair[k].front().cost;

  double best = std::numeric_limits<double>::infinity();
  std::vector<double> used(2 * N, 0.0);
  auto search = [&](auto&& self, std::size_t k, double cost) -> void {
    if (k == per_pair.size()) {
      best = std::min(best, cost);
      return;
    }
    for (const auto& c : per_pair[k]) {
      if (cost + c.cost + rest_min[k + 1] >= best) break;
      bool fits = true;
      for (std::size_t r = 0; r < 2 * N && fits; ++r)
        fits = used[r] + c.use[r] <= cap[r] * (1 + 1e-12) + 1e-12;
      if (!fits) continue;
      for (std::size_t r = 0; r < 2 * N; ++r) used[r] += c.use[r];
      self(self, k + 1, cost + c.cost);
      for (std::size_t r = 0; r < 2 * N; ++r) used[r] -= c.use[r];
    }
  };
  search(search, 0, 0.0);
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

/// DemandSet holding a single slice at slot 0.
inline DemandSet single_slot(const DemandSlice& slice) {
  DemandSet d(slice.rows(), slice.cols(), 1);
  d.set_slice(0, slice);
  return d;
}

} // namespace edgefed::testkit
