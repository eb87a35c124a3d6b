#pragma once

// Operating cost of an allocation, per-EIP average cost, and utilization.

#include <edgefed/demand.hpp>
#include <edgefed/errors.hpp>
#include <edgefed/model.hpp>

#include <map>
#include <span>
#include <string>

namespace edgefed {

struct CostBreakdown {
  double cloud_storage = 0.0;
  double cloud_compute = 0.0;
  double cloud_comm = 0.0;
  double edge_storage = 0.0;
  double edge_compute = 0.0;
  double edge_comm = 0.0;
  double total = 0.0;

  double cloud() const noexcept { return cloud_storage + cloud_compute + cloud_comm; }
  double edge() const noexcept { return edge_storage + edge_compute + edge_comm; }

  CostBreakdown& operator+=(const CostBreakdown& o) {
    cloud_storage += o.cloud_storage;
    cloud_compute += o.cloud_compute;
    cloud_comm += o.cloud_comm;
    edge_storage += o.edge_storage;
    edge_compute += o.edge_compute;
    edge_comm += o.edge_comm;
    finalize();
    return *this;
  }

  void finalize() noexcept {
    total = cloud_storage + cloud_compute + cloud_comm + edge_storage + edge_compute + edge_comm;
  }
};

/// Cost of one (area, service) demand under `alloc`. Edge terms are only
/// accumulated for nodes whose index passes `edge_filter`.
template <typename EdgeFilter>
void accumulate_cost(CostBreakdown& out, const Allocation& alloc, const DemandTriple& d, const Scenario& sc,
                     std::size_t u, std::size_t p, bool with_cloud, EdgeFilter&& edge_filter) {
  if (with_cloud) {
    for (std::size_t a = 0; a < sc.cloud_nodes.size(); ++a) {
      const double ts = alloc.theta_s(u, p, a);
      out.cloud_storage += d.s * ts * sc.prices.cloud_storage;
      out.cloud_compute += d.c * alloc.theta_c(u, p, a) * sc.prices.cloud_compute;
      out.cloud_comm += (d.s + d.s_post) * ts * sc.prices.cloud_comm;
    }
  }
  for (std::size_t e = 0; e < sc.edge_nodes.size(); ++e) {
    if (!edge_filter(e)) continue;
    const EdgeNode& n = sc.edge_nodes[e];
    const double al = alloc.alpha(u, p, e);
    out.edge_storage += d.s * al * n.price_storage;
    out.edge_compute += d.c * alloc.beta(u, p, e) * n.price_compute;
    out.edge_comm += (d.s + d.s_post) * al * n.price_comm;
  }
}

/// V for one slot.
inline CostBreakdown slot_cost(const Allocation& alloc, const DemandSlice& demand, const Scenario& sc) {
  CostBreakdown c;
  for (std::size_t u = 0; u < sc.areas.size(); ++u)
    for (std::size_t p = 0; p < sc.services.size(); ++p)
      accumulate_cost(c, alloc, demand(u, p), sc, u, p, true, [](std::size_t) { return true; });
  c.finalize();
  return c;
}

/// V over a sequence of per-slot allocations (each evaluated at its own slot).
inline CostBreakdown cost_breakdown(std::span<const Allocation> allocations, const DemandSet& demand,
                                    const Scenario& sc) {
  CostBreakdown total;
  for (const Allocation& a : allocations) total += slot_cost(a, demand.slice(a.slot), sc);
  total.finalize();
  return total;
}

/// Cost split by EIP: edge terms go to the node owner; cloud terms of service p
/// go to `cloud_owner[p]` (empty string: an unattributed "cloud" bucket).
inline std::map<std::string, CostBreakdown> eip_costs(const Allocation& alloc, const DemandSlice& demand,
                                                      const Scenario& sc,
                                                      const std::vector<std::string>& cloud_owner) {
  std::map<std::string, CostBreakdown> out;
  for (const auto& eip : eip_ids(sc)) out[eip];
  for (std::size_t u = 0; u < sc.areas.size(); ++u)
    for (std::size_t p = 0; p < sc.services.size(); ++p) {
      const DemandTriple& d = demand(u, p);
      for (std::size_t e = 0; e < sc.edge_nodes.size(); ++e) {
        CostBreakdown& c = out[sc.edge_nodes[e].owner_eip];
        accumulate_cost(c, alloc, d, sc, u, p, false, [e](std::size_t k) { return k == e; });
      }
      const std::string owner = p < cloud_owner.size() && !cloud_owner[p].empty() ? cloud_owner[p] : "cloud";
      accumulate_cost(out[owner], alloc, d, sc, u, p, true, [](std::size_t) { return false; });
    }
  for (auto& [_, c] : out) c.finalize();
  return out;
}

/// v_{u,p}(t) for one EIP: storage cost S*alpha*V_S^e plus compute cost
/// C*beta*V_C^e over the EIP's edge nodes and all areas, divided by the number
/// of user areas.
inline double average_cost(const Allocation& alloc, const DemandSlice& demand, const Scenario& sc,
                           const std::string& eip, std::size_t p) {
  if (!has_eip(sc, eip)) throw input_error("unknown EIP '" + eip + "'");
  if (sc.areas.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t u = 0; u < sc.areas.size(); ++u) {
    const DemandTriple& d = demand(u, p);
    for (std::size_t e = 0; e < sc.edge_nodes.size(); ++e) {
      const EdgeNode& n = sc.edge_nodes[e];
      if (n.owner_eip != eip) continue;
      sum += d.s * alloc.alpha(u, p, e) * n.price_storage + d.c * alloc.beta(u, p, e) * n.price_compute;
    }
  }
  return sum / static_cast<double>(sc.areas.size());
}

inline double average_cost(const Allocation& alloc, const DemandSet& demand, const Scenario& sc,
                           const std::string& eip, std::size_t p, std::size_t slot) {
  if (slot != alloc.slot) throw input_error("allocation and slot disagree");
  return average_cost(alloc, demand.slice(slot), sc, eip, p);
}

struct Utilization {
  double edge_storage = 0.0;
  double edge_compute = 0.0;
  double cloud_storage = 0.0;
  double cloud_compute = 0.0;
  double edge_combined = 0.0;  ///< mean of the edge storage and compute ratios
  double cloud_combined = 0.0; ///< mean of the cloud storage and compute ratios
  double storage_on_edge = 0.0; ///< S_E(t)
  double compute_on_edge = 0.0; ///< C_E(t)
  // Used amounts and capacities, kept so ratios can be aggregated over slots.
  double edge_storage_used = 0.0, edge_storage_capacity = 0.0;
  double edge_compute_used = 0.0, edge_compute_capacity = 0.0;
  double cloud_storage_used = 0.0, cloud_storage_capacity = 0.0;
  double cloud_compute_used = 0.0, cloud_compute_capacity = 0.0;
  bool zero_capacity_class = false; ///< some class had no capacity; its ratio is reported as 0
};

namespace detail {
inline double ratio(double used, double cap, bool& flag) {
  if (!(cap > 0.0)) {
    flag = true;
    return 0.0;
  }
  return used / cap;
}
} // namespace detail

/// Fill the four ratios from the used/capacity fields.
inline void finish_utilization(Utilization& r) {
  r.zero_capacity_class = false;
  r.edge_storage = detail::ratio(r.edge_storage_used, r.edge_storage_capacity, r.zero_capacity_class);
  r.edge_compute = detail::ratio(r.edge_compute_used, r.edge_compute_capacity, r.zero_capacity_class);
  r.cloud_storage = detail::ratio(r.cloud_storage_used, r.cloud_storage_capacity, r.zero_capacity_class);
  r.cloud_compute = detail::ratio(r.cloud_compute_used, r.cloud_compute_capacity, r.zero_capacity_class);
  r.edge_combined = 0.5 * (r.edge_storage + r.edge_compute);
  r.cloud_combined = 0.5 * (r.cloud_storage + r.cloud_compute);
}

inline Utilization utilization(const Allocation& alloc, const DemandSlice& demand, const Scenario& sc) {
  Utilization r;
  for (const auto& e : sc.edge_nodes) {
    r.edge_storage_capacity += e.storage_capacity;
    r.edge_compute_capacity += e.compute_capacity;
  }
  for (const auto& c : sc.cloud_nodes) {
    r.cloud_storage_capacity += c.storage_capacity;
    r.cloud_compute_capacity += c.compute_capacity;
  }
  for (std::size_t u = 0; u < sc.areas.size(); ++u)
    for (std::size_t p = 0; p < sc.services.size(); ++p) {
      const DemandTriple& d = demand(u, p);
      double cloud_s = 0.0, cloud_c = 0.0;
      for (std::size_t e = 0; e < sc.edge_nodes.size(); ++e) {
        r.edge_storage_used += d.s * alloc.alpha(u, p, e);
        r.edge_compute_used += d.c * alloc.beta(u, p, e);
      }
      for (std::size_t a = 0; a < sc.cloud_nodes.size(); ++a) {
        cloud_s += alloc.theta_s(u, p, a);
        cloud_c += alloc.theta_c(u, p, a);
        r.cloud_storage_used += d.s * alloc.theta_s(u, p, a);
        r.cloud_compute_used += d.c * alloc.theta_c(u, p, a);
      }
      r.storage_on_edge += d.s * (1.0 - cloud_s);
      r.compute_on_edge += d.c * (1.0 - cloud_c);
    }
  finish_utilization(r);
  return r;
}

inline Utilization& accumulate(Utilization& into, const Utilization& u) {
  into.edge_storage_used += u.edge_storage_used;
  into.edge_storage_capacity += u.edge_storage_capacity;
  into.edge_compute_used += u.edge_compute_used;
  into.edge_compute_capacity += u.edge_compute_capacity;
  into.cloud_storage_used += u.cloud_storage_used;
  into.cloud_storage_capacity += u.cloud_storage_capacity;
  into.cloud_compute_used += u.cloud_compute_used;
  into.cloud_compute_capacity += u.cloud_compute_capacity;
  into.storage_on_edge += u.storage_on_edge;
  into.compute_on_edge += u.compute_on_edge;
  finish_utilization(into);
  return into;
}

} // namespace edgefed
