#pragma once

// Closed-form latency model, per-demand satisfaction indicator and the
// demand-weighted satisfaction ratio.

#include <edgefed/demand.hpp>
#include <edgefed/errors.hpp>
#include <edgefed/model.hpp>

#include <span>
#include <string>

namespace edgefed {

struct LatencyBreakdown {
  double cloud_compute = 0.0;
  double edge_compute = 0.0;
  double cloud_up = 0.0;
  double cloud_down = 0.0;
  double edge_up = 0.0;
  double edge_down = 0.0;
  double total = 0.0;

  double cloud() const noexcept { return cloud_up + cloud_down + cloud_compute; }
  double edge() const noexcept { return edge_up + edge_down + edge_compute; }
};

/// Fractions at or below this are treated as "no assignment" when checking
/// for a zero-capacity compute node.
inline constexpr double assignment_epsilon = 1e-12;

/// l_{u,p}(t) and its six components. The storage-side latency of each tier
/// is its upload plus download delivery latency.
inline LatencyBreakdown latency_breakdown(const Allocation& alloc, const DemandSlice& demand, const Scenario& sc,
                                          const DistanceTable& dist, std::size_t u, std::size_t p) {
  const DemandTriple& d = demand(u, p);
  const double rp = sc.services.at(p).r_p;
  LatencyBreakdown b;
  for (std::size_t a = 0; a < sc.cloud_nodes.size(); ++a) {
    const double th_c = alloc.theta_c(u, p, a);
    if (th_c > assignment_epsilon) {
      const double cap = sc.cloud_nodes[a].compute_capacity;
      if (!(cap > 0.0))
        throw singularity_error("cloud node '" + sc.cloud_nodes[a].id + "' has zero compute capacity");
      b.cloud_compute += d.c * th_c * rp / cap;
    }
    const double th_s = alloc.theta_s(u, p, a);
    b.cloud_up += d.s * th_s * dist.cloud(u, a);
    b.cloud_down += d.s_post * th_s * dist.cloud(u, a);
  }
  for (std::size_t e = 0; e < sc.edge_nodes.size(); ++e) {
    const double be = alloc.beta(u, p, e);
    if (be > assignment_epsilon) {
      const double cap = sc.edge_nodes[e].compute_capacity;
      if (!(cap > 0.0))
        throw singularity_error("edge node '" + sc.edge_nodes[e].id + "' has zero compute capacity");
      b.edge_compute += d.c * be * rp / cap;
    }
    const double al = alloc.alpha(u, p, e);
    b.edge_up += d.s * al * dist.edge(u, e);
    b.edge_down += d.s_post * al * dist.edge(u, e);
  }
  b.total = (b.cloud_up + b.cloud_down + b.cloud_compute) + (b.edge_up + b.edge_down + b.edge_compute);
  return b;
}

inline LatencyBreakdown latency_breakdown(const Allocation& alloc, const DemandSet& demand, const Scenario& sc,
                                          std::size_t u, std::size_t p) {
  return latency_breakdown(alloc, demand.slice(alloc.slot), sc, make_distance_table(sc), u, p);
}

/// m_{u,p}(t): 1 iff total latency <= l_p (+ `slack`). The boundary is
/// inclusive. A nonzero slack absorbs solver round-off on tight rows.
inline int satisfaction_indicator(const LatencyBreakdown& b, const Service& svc, double slack = 0.0) {
  return b.total <= svc.latency_requirement + slack ? 1 : 0;
}

/// Relative slack used when judging LP outputs, matching the solver's
/// feasibility tolerance on a row normalized by max(1, l_p).
inline double latency_slack(const Service& svc, double tolerance = 1e-7) {
  return tolerance * std::max(1.0, svc.latency_requirement);
}

/// Demand-weighted share of (area, slot) demands of service p meeting l_p,
/// over a timeline of per-slot allocations. Zero total demand counts as
/// fully satisfied.
inline double satisfaction_ratio(std::span<const Allocation> timeline, const DemandSet& demand, const Scenario& sc,
                                 std::size_t p, double tolerance = 0.0) {
  const DistanceTable dist = make_distance_table(sc);
  const Service& svc = sc.services.at(p);
  const double slack = tolerance > 0.0 ? latency_slack(svc, tolerance) : 0.0;
  double met = 0.0, total = 0.0;
  for (const Allocation& alloc : timeline) {
    const DemandSlice slice = demand.slice(alloc.slot);
    for (std::size_t u = 0; u < sc.areas.size(); ++u) {
      const double s = slice(u, p).s;
      total += s;
      if (s == 0.0) continue;
      met += s * satisfaction_indicator(latency_breakdown(alloc, slice, sc, dist, u, p), svc, slack);
    }
  }
  return total > 0.0 ? met / total : 1.0;
}

} // namespace edgefed
