#pragma once

// Provisioning LP assembly in the flattened (shrunk) column layout, a naive
// four-index reference assembly, allocation decoding and the semantic audit.

#include <edgefed/cost.hpp>
#include <edgefed/demand.hpp>
#include <edgefed/errors.hpp>
#include <edgefed/latency.hpp>
#include <edgefed/lp/linear_program.hpp>
#include <edgefed/model.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace edgefed::lp {

enum class VarKind { alpha, beta, theta_s, theta_c };

inline const char* to_string(VarKind k) {
  switch (k) {
  case VarKind::alpha: return "alpha";
  case VarKind::beta: return "beta";
  case VarKind::theta_s: return "theta_s";
  case VarKind::theta_c: return "theta_c";
  }
  return "?";
}

struct VariableKey {
  VarKind kind = VarKind::alpha;
  std::size_t area = 0;
  std::size_t service = 0;
  std::size_t node = 0; ///< edge index for alpha/beta, cloud index for theta
  std::size_t slot = 0;

  friend bool operator==(const VariableKey&, const VariableKey&) = default;
};

/// Bijection between (kind, area, service, node, slot) and column numbers.
/// Slots are stacked as consecutive blocks; within a block the four kinds are
/// stacked alpha, beta, theta_s, theta_c, each as a [service][area][node]
/// matrix flattened row-major.
class VariableIndex {
public:
  VariableIndex() = default;
  VariableIndex(std::size_t areas, std::size_t services, std::size_t edges, std::size_t clouds,
                std::size_t first_slot = 0, std::size_t slots = 1)
      : areas_(areas), services_(services), edges_(edges), clouds_(clouds), first_slot_(first_slot), slots_(slots) {}

  std::size_t areas() const noexcept { return areas_; }
  std::size_t services() const noexcept { return services_; }
  std::size_t edges() const noexcept { return edges_; }
  std::size_t clouds() const noexcept { return clouds_; }
  std::size_t first_slot() const noexcept { return first_slot_; }
  std::size_t slots() const noexcept { return slots_; }

  std::size_t nodes(VarKind k) const noexcept {
    return k == VarKind::alpha || k == VarKind::beta ? edges_ : clouds_;
  }
  std::size_t per_slot() const noexcept { return areas_ * services_ * (2 * edges_ + 2 * clouds_); }
  std::size_t size() const noexcept { return per_slot() * slots_; }

  std::size_t column(const VariableKey& k) const {
    if (k.area >= areas_ || k.service >= services_ || k.node >= nodes(k.kind) || k.slot < first_slot_ ||
        k.slot >= first_slot_ + slots_)
      throw input_error("variable key out of range");
    return (k.slot - first_slot_) * per_slot() + kind_offset(k.kind) +
           (k.service * areas_ + k.area) * nodes(k.kind) + k.node;
  }

  std::size_t column(VarKind kind, std::size_t u, std::size_t p, std::size_t node, std::size_t slot) const {
    return column(VariableKey{kind, u, p, node, slot});
  }

  VariableKey key(std::size_t col) const {
    if (col >= size()) throw input_error("column " + std::to_string(col) + " out of range");
    VariableKey k;
    k.slot = first_slot_ + col / per_slot();
    std::size_t r = col % per_slot();
    for (VarKind kind : {VarKind::theta_c, VarKind::theta_s, VarKind::beta, VarKind::alpha})
      if (r >= kind_offset(kind)) {
        k.kind = kind;
        r -= kind_offset(kind);
        break;
      }
    const std::size_t n = nodes(k.kind);
    k.node = r % n;
    r /= n;
    k.area = r % areas_;
    k.service = r / areas_;
    return k;
  }

private:
  std::size_t kind_offset(VarKind k) const noexcept {
    const std::size_t upe = areas_ * services_ * edges_, upa = areas_ * services_ * clouds_;
    switch (k) {
    case VarKind::alpha: return 0;
    case VarKind::beta: return upe;
    case VarKind::theta_s: return 2 * upe;
    case VarKind::theta_c: return 2 * upe + upa;
    }
    return 0;
  }

  std::size_t areas_ = 0, services_ = 0, edges_ = 0, clouds_ = 0, first_slot_ = 0, slots_ = 0;
};

enum class RowFamily {
  cloud_storage,
  cloud_compute,
  edge_storage,
  edge_compute,
  storage_conservation,
  compute_conservation,
  latency,
};

inline const char* to_string(RowFamily f) {
  switch (f) {
  case RowFamily::cloud_storage: return "cloud storage capacity";
  case RowFamily::cloud_compute: return "cloud compute capacity";
  case RowFamily::edge_storage: return "edge storage capacity";
  case RowFamily::edge_compute: return "edge compute capacity";
  case RowFamily::storage_conservation: return "storage conservation";
  case RowFamily::compute_conservation: return "compute conservation";
  case RowFamily::latency: return "latency";
  }
  return "?";
}

/// What a row stands for. `node` is set for capacity rows, `area` and
/// `service` for conservation and latency rows.
struct RowInfo {
  RowFamily family = RowFamily::latency;
  std::size_t slot = 0;
  std::size_t node = 0;
  std::size_t area = 0;
  std::size_t service = 0;
};

struct AssemblyOptions {
  /// [service][edge] nonzero where the edge node may serve the service.
  /// Empty means every node may serve every service. Disallowed columns are
  /// kept in the layout with an upper bound of 0.
  Array2<unsigned char> edge_allowed;
  /// Demand used for the latency rows instead of the slot demand.
  std::optional<DemandSlice> latency_demand;
  /// Per cloud node capacities replacing the scenario's; empty keeps them.
  std::vector<double> cloud_storage_capacity;
  std::vector<double> cloud_compute_capacity;
};

struct ProvisioningLp {
  LinearProgram program;
  VariableIndex index;
  std::vector<RowInfo> row_info;

  std::string describe_row(std::size_t i, const Scenario& sc) const {
    if (i >= row_info.size()) return "row " + std::to_string(i);
    const RowInfo& r = row_info[i];
    std::string s = std::string(to_string(r.family)) + " (slot " + std::to_string(r.slot);
    switch (r.family) {
    case RowFamily::cloud_storage:
    case RowFamily::cloud_compute: s += ", cloud node " + sc.cloud_nodes.at(r.node).id; break;
    case RowFamily::edge_storage:
    case RowFamily::edge_compute: s += ", edge node " + sc.edge_nodes.at(r.node).id; break;
    default: s += ", area " + sc.areas.at(r.area).id + ", service " + sc.services.at(r.service).id; break;
    }
    return s + ")";
  }
};

namespace detail {

inline void check_slice(const DemandSlice& d, const Scenario& sc) {
  if (d.rows() != sc.areas.size() || d.cols() != sc.services.size())
    throw input_error("demand slice does not match scenario dimensions");
}

inline void append_slot(ProvisioningLp& out, const Scenario& sc, const DistanceTable& dist, const DemandSlice& demand,
                        std::size_t slot, const AssemblyOptions& opt) {
  check_slice(demand, sc);
  const std::size_t U = sc.areas.size(), P = sc.services.size(), E = sc.edge_nodes.size(), A = sc.cloud_nodes.size();
  const DemandSlice& lat = opt.latency_demand ? *opt.latency_demand : demand;
  check_slice(lat, sc);
  if (!opt.edge_allowed.data().empty() && (opt.edge_allowed.rows() != P || opt.edge_allowed.cols() != E))
    throw input_error("edge_allowed mask has wrong shape");
  if ((!opt.cloud_storage_capacity.empty() && opt.cloud_storage_capacity.size() != A) ||
      (!opt.cloud_compute_capacity.empty() && opt.cloud_compute_capacity.size() != A))
    throw input_error("cloud capacity override has wrong length");

  const VariableIndex& ix = out.index;
  LinearProgram& lp = out.program;
  auto allowed = [&](std::size_t p, std::size_t e) {
    return opt.edge_allowed.data().empty() || opt.edge_allowed(p, e) != 0;
  };
  auto col = [&](VarKind k, std::size_t u, std::size_t p, std::size_t n) { return ix.column(k, u, p, n, slot); };

  // Columns in index order.
  const std::size_t base = lp.num_columns();
  if (slot < ix.first_slot() || base != (slot - ix.first_slot()) * ix.per_slot())
    throw input_error("slots must be appended in order");
  lp.objective.resize(base + ix.per_slot(), 0.0);
  lp.upper.resize(base + ix.per_slot(), 1.0);
  for (std::size_t u = 0; u < U; ++u)
    for (std::size_t p = 0; p < P; ++p) {
      const DemandTriple& d = demand(u, p);
      for (std::size_t e = 0; e < E; ++e) {
        const EdgeNode& n = sc.edge_nodes[e];
        const std::size_t ca = col(VarKind::alpha, u, p, e), cb = col(VarKind::beta, u, p, e);
        lp.objective[ca] = d.s * n.price_storage + (d.s + d.s_post) * n.price_comm;
        lp.objective[cb] = d.c * n.price_compute;
        if (!allowed(p, e)) lp.upper[ca] = lp.upper[cb] = 0.0;
        if (!(n.compute_capacity > 0.0)) lp.upper[cb] = 0.0;
      }
      for (std::size_t a = 0; a < A; ++a) {
        lp.objective[col(VarKind::theta_s, u, p, a)] =
            d.s * sc.prices.cloud_storage + (d.s + d.s_post) * sc.prices.cloud_comm;
        lp.objective[col(VarKind::theta_c, u, p, a)] = d.c * sc.prices.cloud_compute;
        if (!(sc.cloud_nodes[a].compute_capacity > 0.0)) lp.upper[col(VarKind::theta_c, u, p, a)] = 0.0;
      }
    }

  auto push = [&](Row r, RowInfo info) {
    info.slot = slot;
    lp.rows.push_back(std::move(r));
    out.row_info.push_back(info);
  };
  auto add_nz = [](Row& r, std::size_t c, double v) {
    if (v != 0.0) r.add(c, v);
  };

  for (std::size_t a = 0; a < A; ++a) {
    Row r;
    r.rhs = opt.cloud_storage_capacity.empty() ? sc.cloud_nodes[a].storage_capacity : opt.cloud_storage_capacity[a];
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t u = 0; u < U; ++u) add_nz(r, col(VarKind::theta_s, u, p, a), demand(u, p).s);
    push(std::move(r), {RowFamily::cloud_storage, 0, a, 0, 0});
  }
  for (std::size_t a = 0; a < A; ++a) {
    Row r;
    r.rhs = opt.cloud_compute_capacity.empty() ? sc.cloud_nodes[a].compute_capacity : opt.cloud_compute_capacity[a];
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t u = 0; u < U; ++u) add_nz(r, col(VarKind::theta_c, u, p, a), demand(u, p).c);
    push(std::move(r), {RowFamily::cloud_compute, 0, a, 0, 0});
  }
  for (std::size_t e = 0; e < E; ++e) {
    Row r;
    r.rhs = sc.edge_nodes[e].storage_capacity;
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t u = 0; u < U; ++u) add_nz(r, col(VarKind::alpha, u, p, e), demand(u, p).s);
    push(std::move(r), {RowFamily::edge_storage, 0, e, 0, 0});
  }
  for (std::size_t e = 0; e < E; ++e) {
    Row r;
    r.rhs = sc.edge_nodes[e].compute_capacity;
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t u = 0; u < U; ++u) add_nz(r, col(VarKind::beta, u, p, e), demand(u, p).c);
    push(std::move(r), {RowFamily::edge_compute, 0, e, 0, 0});
  }
  for (VarKind pair_edge : {VarKind::alpha, VarKind::beta}) {
    const VarKind pair_cloud = pair_edge == VarKind::alpha ? VarKind::theta_s : VarKind::theta_c;
    const RowFamily fam =
        pair_edge == VarKind::alpha ? RowFamily::storage_conservation : RowFamily::compute_conservation;
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t u = 0; u < U; ++u) {
        Row r;
        r.sense = RowSense::equal;
        r.rhs = 1.0;
        for (std::size_t e = 0; e < E; ++e) r.add(col(pair_edge, u, p, e), 1.0);
        for (std::size_t a = 0; a < A; ++a) r.add(col(pair_cloud, u, p, a), 1.0);
        push(std::move(r), {fam, 0, 0, u, p});
      }
  }
  for (std::size_t p = 0; p < P; ++p) {
    const double rp = sc.services[p].r_p;
    for (std::size_t u = 0; u < U; ++u) {
      const DemandTriple& d = lat(u, p);
      Row r;
      r.rhs = sc.services[p].latency_requirement;
      for (std::size_t e = 0; e < E; ++e) {
        add_nz(r, col(VarKind::alpha, u, p, e), (d.s + d.s_post) * dist.edge(u, e));
        const double cap = sc.edge_nodes[e].compute_capacity;
        if (cap > 0.0) add_nz(r, col(VarKind::beta, u, p, e), d.c * rp / cap);
      }
      for (std::size_t a = 0; a < A; ++a) {
        add_nz(r, col(VarKind::theta_s, u, p, a), (d.s + d.s_post) * dist.cloud(u, a));
        const double cap = sc.cloud_nodes[a].compute_capacity;
        if (cap > 0.0) add_nz(r, col(VarKind::theta_c, u, p, a), d.c * rp / cap);
      }
      push(std::move(r), {RowFamily::latency, 0, 0, u, p});
    }
  }
}

} // namespace detail

/// Per-slot provisioning LP. Row order: cloud storage caps, cloud compute
/// caps, edge storage caps, edge compute caps, storage conservation, compute
/// conservation, latency. Compute columns of nodes without compute capacity
/// are bounded to 0.
inline ProvisioningLp assemble_slot_lp(const Scenario& sc, const DemandSlice& demand, std::size_t slot,
                                       const AssemblyOptions& opt = {}) {
  ProvisioningLp out;
  out.index = VariableIndex(sc.areas.size(), sc.services.size(), sc.edge_nodes.size(), sc.cloud_nodes.size(), slot, 1);
  detail::append_slot(out, sc, make_distance_table(sc), demand, slot, opt);
  return out;
}

inline ProvisioningLp assemble_slot_lp(const Scenario& sc, const DemandSet& demand, std::size_t slot,
                                       const AssemblyOptions& opt = {}) {
  if (slot >= demand.slots()) throw input_error("slot " + std::to_string(slot) + " outside the demand horizon");
  return assemble_slot_lp(sc, demand.slice(slot), slot, opt);
}

/// All slots of `demand` in one block-diagonal program.
inline ProvisioningLp assemble_horizon_lp(const Scenario& sc, const DemandSet& demand,
                                          const AssemblyOptions& opt = {}) {
  ProvisioningLp out;
  out.index = VariableIndex(sc.areas.size(), sc.services.size(), sc.edge_nodes.size(), sc.cloud_nodes.size(), 0,
                            demand.slots());
  const DistanceTable dist = make_distance_table(sc);
  for (std::size_t t = 0; t < demand.slots(); ++t) detail::append_slot(out, sc, dist, demand.slice(t), t, opt);
  return out;
}

inline constexpr std::size_t naive_column_limit = 4096;

/// The same per-slot program built by enumerating the four-index variable
/// tensors directly: one storage and one compute variable per (area, service,
/// node) over the combined node list (edge nodes first, then clouds), with
/// conservation and latency rows emitted before the capacity rows. Meant as a
/// reference for small instances only.
inline LinearProgram assemble_naive_lp(const Scenario& sc, const DemandSlice& demand) {
  detail::check_slice(demand, sc);
  const std::size_t U = sc.areas.size(), P = sc.services.size();
  const std::size_t E = sc.edge_nodes.size(), N = E + sc.cloud_nodes.size();
  if (2 * U * P * N > naive_column_limit)
    throw input_error("instance too large for the naive formulation (" + std::to_string(2 * U * P * N) +
                      " columns, limit " + std::to_string(naive_column_limit) + ")");

  struct NodeView {
    Location loc;
    double storage_cap, compute_cap, v_s, v_c, v_m;
  };
  std::vector<NodeView> nodes;
  for (const auto& e : sc.edge_nodes)
    nodes.push_back({e.location, e.storage_capacity, e.compute_capacity, e.price_storage, e.price_compute, e.price_comm});
  for (const auto& c : sc.cloud_nodes)
    nodes.push_back({c.location, c.storage_capacity, c.compute_capacity, sc.prices.cloud_storage,
                     sc.prices.cloud_compute, sc.prices.cloud_comm});

  // (resource 0 = storage / 1 = compute, u, p, n) -> column
  std::map<std::tuple<int, std::size_t, std::size_t, std::size_t>, std::size_t> var;
  LinearProgram lp;
  for (std::size_t u = 0; u < U; ++u)
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t n = 0; n < N; ++n) {
        const DemandTriple& d = demand(u, p);
        const NodeView& nv = nodes[n];
        var[{0, u, p, n}] = lp.add_column(d.s * nv.v_s + (d.s + d.s_post) * nv.v_m);
        var[{1, u, p, n}] = lp.add_column(d.c * nv.v_c, nv.compute_cap > 0.0 ? 1.0 : 0.0);
      }

  for (std::size_t u = 0; u < U; ++u)
    for (std::size_t p = 0; p < P; ++p) {
      const DemandTriple& d = demand(u, p);
      const Service& svc = sc.services[p];
      for (int res = 0; res < 2; ++res) {
        Row r;
        r.sense = RowSense::equal;
        r.rhs = 1.0;
        for (std::size_t n = 0; n < N; ++n) r.add(var.at({res, u, p, n}), 1.0);
        lp.add_row(std::move(r));
      }
      Row lat;
      lat.rhs = svc.latency_requirement;
      for (std::size_t n = 0; n < N; ++n) {
        const double h = distance(nodes[n].loc, sc.areas[u].location, sc.coordinates, sc.distance_scale);
        lat.add(var.at({0, u, p, n}), d.s * h + d.s_post * h);
        if (nodes[n].compute_cap > 0.0) lat.add(var.at({1, u, p, n}), d.c * svc.r_p / nodes[n].compute_cap);
      }
      lp.add_row(std::move(lat));
    }
  for (std::size_t n = 0; n < N; ++n)
    for (int res = 0; res < 2; ++res) {
      Row r;
      r.rhs = res == 0 ? nodes[n].storage_cap : nodes[n].compute_cap;
      for (std::size_t u = 0; u < U; ++u)
        for (std::size_t p = 0; p < P; ++p)
          r.add(var.at({res, u, p, n}), res == 0 ? demand(u, p).s : demand(u, p).c);
      lp.add_row(std::move(r));
    }
  return lp;
}

/// Allocation for `slot` read out of a solution vector.
inline Allocation decode_allocation(const VariableIndex& ix, const std::vector<double>& x, std::size_t slot) {
  if (x.size() != ix.size()) throw input_error("solution length does not match the variable index");
  Allocation a(slot, ix.areas(), ix.services(), ix.edges(), ix.clouds());
  for (std::size_t u = 0; u < ix.areas(); ++u)
    for (std::size_t p = 0; p < ix.services(); ++p) {
      for (std::size_t e = 0; e < ix.edges(); ++e) {
        a.alpha(u, p, e) = x[ix.column(VarKind::alpha, u, p, e, slot)];
        a.beta(u, p, e) = x[ix.column(VarKind::beta, u, p, e, slot)];
      }
      for (std::size_t c = 0; c < ix.clouds(); ++c) {
        a.theta_s(u, p, c) = x[ix.column(VarKind::theta_s, u, p, c, slot)];
        a.theta_c(u, p, c) = x[ix.column(VarKind::theta_c, u, p, c, slot)];
      }
    }
  return a;
}

/// Writes `a` into the columns of its slot.
inline void encode_allocation(const VariableIndex& ix, const Allocation& a, std::vector<double>& x) {
  if (x.size() != ix.size()) x.resize(ix.size(), 0.0);
  for (std::size_t u = 0; u < ix.areas(); ++u)
    for (std::size_t p = 0; p < ix.services(); ++p) {
      for (std::size_t e = 0; e < ix.edges(); ++e) {
        x[ix.column(VarKind::alpha, u, p, e, a.slot)] = a.alpha(u, p, e);
        x[ix.column(VarKind::beta, u, p, e, a.slot)] = a.beta(u, p, e);
      }
      for (std::size_t c = 0; c < ix.clouds(); ++c) {
        x[ix.column(VarKind::theta_s, u, p, c, a.slot)] = a.theta_s(u, p, c);
        x[ix.column(VarKind::theta_c, u, p, c, a.slot)] = a.theta_c(u, p, c);
      }
    }
}

inline std::vector<double> encode_allocation(const VariableIndex& ix, const Allocation& a) {
  std::vector<double> x(ix.size(), 0.0);
  encode_allocation(ix, a, x);
  return x;
}

/// Largest violation per constraint family. Bounds and conservation are
/// absolute; capacities are relative to max(1, capacity); latency is relative
/// to max(1, l_p).
struct AuditReport {
  double bounds = 0.0;
  double cloud_capacity = 0.0;
  double edge_capacity = 0.0;
  double conservation = 0.0;
  double latency = 0.0;

  double worst() const { return std::max({bounds, cloud_capacity, edge_capacity, conservation, latency}); }
  bool passes(double tol = 1e-7) const { return worst() <= tol; }
};

/// Checks an allocation against the model constraints evaluated on `demand`.
inline AuditReport audit_allocation(const Allocation& alloc, const DemandSlice& demand, const Scenario& sc) {
  detail::check_slice(demand, sc);
  AuditReport r;
  for (const auto* arr : {&alloc.alpha, &alloc.beta, &alloc.theta_s, &alloc.theta_c})
    for (double v : arr->data()) r.bounds = std::max({r.bounds, -v, v - 1.0});
  r.conservation = conservation_error(alloc);

  const std::size_t U = sc.areas.size(), P = sc.services.size();
  auto rel = [](double used, double cap) { return (used - cap) / std::max(1.0, cap); };
  for (std::size_t a = 0; a < sc.cloud_nodes.size(); ++a) {
    double s = 0.0, c = 0.0;
    for (std::size_t u = 0; u < U; ++u)
      for (std::size_t p = 0; p < P; ++p) {
        s += demand(u, p).s * alloc.theta_s(u, p, a);
        c += demand(u, p).c * alloc.theta_c(u, p, a);
      }
    r.cloud_capacity = std::max({r.cloud_capacity, rel(s, sc.cloud_nodes[a].storage_capacity),
                                 rel(c, sc.cloud_nodes[a].compute_capacity)});
  }
  for (std::size_t e = 0; e < sc.edge_nodes.size(); ++e) {
    double s = 0.0, c = 0.0;
    for (std::size_t u = 0; u < U; ++u)
      for (std::size_t p = 0; p < P; ++p) {
        s += demand(u, p).s * alloc.alpha(u, p, e);
        c += demand(u, p).c * alloc.beta(u, p, e);
      }
    r.edge_capacity = std::max({r.edge_capacity, rel(s, sc.edge_nodes[e].storage_capacity),
                                rel(c, sc.edge_nodes[e].compute_capacity)});
  }
  const DistanceTable dist = make_distance_table(sc);
  for (std::size_t u = 0; u < U; ++u)
    for (std::size_t p = 0; p < P; ++p) {
      const double lp = sc.services[p].latency_requirement;
      try {
        const double total = latency_breakdown(alloc, demand, sc, dist, u, p).total;
        r.latency = std::max(r.latency, rel(total, lp));
      } catch (const singularity_error&) {
        r.latency = infinity;
      }
    }
  return r;
}

/// Audit of an optimal solution of `model` for its first slot.
inline AuditReport audit_solution(const ProvisioningLp& model, const LpSolution& sol, const Scenario& sc,
                                  const DemandSlice& demand) {
  if (sol.status != LpStatus::optimal) throw input_error("audit requires an optimal solution");
  return audit_allocation(decode_allocation(model.index, sol.values, model.index.first_slot()), demand, sc);
}

inline AuditReport audit_solution(const ProvisioningLp& model, const LpSolution& sol, const Scenario& sc,
                                  const DemandSet& demand, std::size_t slot) {
  if (sol.status != LpStatus::optimal) throw input_error("audit requires an optimal solution");
  return audit_allocation(decode_allocation(model.index, sol.values, slot), demand.slice(slot), sc);
}

} // namespace edgefed::lp
