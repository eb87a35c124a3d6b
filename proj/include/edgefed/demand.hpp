#pragma once

// Demand generation, trace ingestion and the traffic-analyzer predictor.

#include <edgefed/array.hpp>
#include <edgefed/errors.hpp>
#include <edgefed/model.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace edgefed {

/// K_{u,p}(t): content size before and after processing, and compute demand.
struct DemandTriple {
  double s = 0.0;
  double s_post = 0.0;
  double c = 0.0;

  friend bool operator==(const DemandTriple&, const DemandTriple&) = default;
};

/// Demand of every (area, service) pair in one slot.
using DemandSlice = Array2<DemandTriple>;

/// Demand over [area x service x slot]. Stored slot-major so that a slot can be
/// sliced without gathering.
class DemandSet {
public:
  DemandSet() = default;
  DemandSet(std::size_t areas, std::size_t services, std::size_t slots)
      : areas_(areas), services_(services), slots_(slots), data_(slots, areas, services) {}

  std::size_t areas() const noexcept { return areas_; }
  std::size_t services() const noexcept { return services_; }
  std::size_t slots() const noexcept { return slots_; }

  DemandTriple& at(std::size_t u, std::size_t p, std::size_t t) { return data_(t, u, p); }
  const DemandTriple& at(std::size_t u, std::size_t p, std::size_t t) const { return data_(t, u, p); }

  DemandSlice slice(std::size_t t) const {
    DemandSlice out(areas_, services_);
    for (std::size_t u = 0; u < areas_; ++u)
      for (std::size_t p = 0; p < services_; ++p) out(u, p) = data_(t, u, p);
    return out;
  }

  void set_slice(std::size_t t, const DemandSlice& s) {
    for (std::size_t u = 0; u < areas_; ++u)
      for (std::size_t p = 0; p < services_; ++p) data_(t, u, p) = s(u, p);
  }

  /// Sum of s over areas for (p, t).
  double storage_total(std::size_t p, std::size_t t) const {
    double sum = 0.0;
    for (std::size_t u = 0; u < areas_; ++u) sum += data_(t, u, p).s;
    return sum;
  }

  friend bool operator==(const DemandSet&, const DemandSet&) = default;

private:
  std::size_t areas_ = 0;
  std::size_t services_ = 0;
  std::size_t slots_ = 0;
  Array3<DemandTriple> data_;
};

inline DemandTriple make_triple(double s, const Service& svc) { return {s, s * svc.k_s, s * svc.k_c}; }

inline DemandSlice scale_slice(const DemandSlice& in, double factor) {
  DemandSlice out = in;
  for (auto& d : out.data()) d = {d.s * factor, d.s_post * factor, d.c * factor};
  return out;
}

namespace detail {

// Uniform jitter in [-sqrt(3), sqrt(3)] (unit variance) from the raw 64-bit
// engine output; avoids implementation-defined std:: distributions so that a
// seed means the same thing on every platform.
inline double unit_jitter(std::mt19937_64& rng) {
  const double u01 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return (2.0 * u01 - 1.0) * std::sqrt(3.0);
}

inline void fill_period(DemandSet& out, std::size_t slot_offset, const Scenario& sc, std::mt19937_64* rng) {
  const std::size_t n_areas = sc.areas.size();
  std::vector<double> weight(n_areas);
  double pop = 0.0;
  for (const auto& a : sc.areas) pop += a.population;
  for (std::size_t t = 0; t < sc.time_grid.slot_count; ++t)
    for (std::size_t p = 0; p < sc.services.size(); ++p) {
      const Service& svc = sc.services[p];
      const double total = sc.total_population * svc.profile.at(t);
      double wsum = 0.0;
      for (std::size_t u = 0; u < n_areas; ++u) {
        double w = sc.areas[u].population / pop;
        if (rng && sc.demand_jitter > 0.0) w *= std::max(0.0, 1.0 + sc.demand_jitter * unit_jitter(*rng));
        weight[u] = w;
        wsum += w;
      }
      for (std::size_t u = 0; u < n_areas; ++u) {
        const double s = wsum > 0.0 ? total * (weight[u] / wsum) : 0.0;
        out.at(u, p, slot_offset + t) = make_triple(s, svc);
      }
    }
}

} // namespace detail

/// Synthetic demand for one period of the scenario's time grid. Each
/// (service, slot) total |U| q_p(t) is split across areas in proportion to
/// population; a nonzero `demand_jitter` perturbs the split per slot using
/// `seed`, leaving the totals unchanged.
inline DemandSet generate_demand(const Scenario& sc, std::uint64_t seed = 0) {
  double pop = 0.0;
  for (const auto& a : sc.areas) pop += a.population;
  if (!(pop > 0.0) || !(sc.total_population > 0.0)) throw input_error("total population is zero");
  DemandSet out(sc.areas.size(), sc.services.size(), sc.time_grid.slot_count);
  std::mt19937_64 rng(seed);
  detail::fill_period(out, 0, sc, &rng);
  return out;
}

// ---------------------------------------------------------------------------
// Catchments

/// Nearest edge node per area (ties: lexicographically smallest node id).
/// Entries are edge-node indices; empty when the scenario has no edge nodes.
inline std::vector<std::size_t> assign_catchments(const Scenario& sc) {
  if (sc.edge_nodes.empty()) return {};
  std::vector<std::size_t> owner(sc.areas.size());
  for (std::size_t u = 0; u < sc.areas.size(); ++u) {
    std::size_t best = 0;
    double best_d = distance(sc.edge_nodes[0].location, sc.areas[u].location, sc.coordinates, sc.distance_scale);
    for (std::size_t e = 1; e < sc.edge_nodes.size(); ++e) {
      const double d = distance(sc.edge_nodes[e].location, sc.areas[u].location, sc.coordinates, sc.distance_scale);
      if (d < best_d || (d == best_d && sc.edge_nodes[e].id < sc.edge_nodes[best].id)) {
        best = e;
        best_d = d;
      }
    }
    owner[u] = best;
  }
  return owner;
}

/// d_ep(t): demand of service p originating in node e's catchment.
inline double edge_local_demand(const DemandSet& demand, const Scenario& sc, const std::string& edge_id,
                                std::size_t service, std::size_t slot) {
  const std::size_t e = index_of(sc.edge_nodes, edge_id, "edge node");
  if (service >= demand.services() || slot >= demand.slots()) throw input_error("service or slot out of range");
  const auto owner = assign_catchments(sc);
  double sum = 0.0;
  for (std::size_t u = 0; u < owner.size(); ++u)
    if (owner[u] == e) sum += demand.at(u, service, slot).s;
  return sum;
}

// ---------------------------------------------------------------------------
// Trace ingestion

using Timestamp = std::chrono::sys_seconds;

struct TraceObservation {
  Timestamp time;
  double value = 0.0;

  friend bool operator==(const TraceObservation&, const TraceObservation&) = default;
};

struct TrafficProfile {
  std::string service;
  std::vector<TraceObservation> observations; ///< strictly increasing in time

  friend bool operator==(const TrafficProfile&, const TrafficProfile&) = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

} // namespace detail

/// Parse an ISO-8601 timestamp: YYYY-MM-DD[(T| )HH:MM[:SS]][Z|(+|-)HH:MM].
inline Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  const std::string_view s = detail::trim(text);
  auto bad = [&]() -> Timestamp { throw parse_error("bad timestamp '" + std::string(s) + "'"); };
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return bad();
  int y = 0;
  unsigned mo = 0, d = 0;
  if (!detail::parse_int(s.substr(0, 4), y) || !detail::parse_int(s.substr(5, 2), mo) ||
      !detail::parse_int(s.substr(8, 2), d))
    return bad();
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok()) return bad();
  long secs = 0;
  std::string_view rest = s.substr(10);
  if (!rest.empty() && (rest[0] == 'T' || rest[0] == ' ')) {
    rest.remove_prefix(1);
    int hh = 0, mm = 0, ss = 0;
    if (rest.size() < 5 || rest[2] != ':' || !detail::parse_int(rest.substr(0, 2), hh) ||
        !detail::parse_int(rest.substr(3, 2), mm))
      return bad();
    rest.remove_prefix(5);
    if (!rest.empty() && rest[0] == ':') {
      if (rest.size() < 3 || !detail::parse_int(rest.substr(1, 2), ss)) return bad();
      rest.remove_prefix(3);
    }
    if (hh > 23 || mm > 59 || ss > 60) return bad();
    secs = hh * 3600L + mm * 60L + ss;
  }
  if (!rest.empty()) {
    if (rest == "Z") {
    } else if ((rest[0] == '+' || rest[0] == '-') && rest.size() == 6 && rest[3] == ':') {
      int oh = 0, om = 0;
      if (!detail::parse_int(rest.substr(1, 2), oh) || !detail::parse_int(rest.substr(4, 2), om)) return bad();
      const long off = oh * 3600L + om * 60L;
      secs -= rest[0] == '+' ? off : -off;
    } else {
      return bad();
    }
  }
  return sys_days{ymd} + seconds{secs};
}

/// Read a `timestamp,service,value` CSV into one profile per service (in order
/// of first appearance). Rows are sorted by time.
inline std::vector<TrafficProfile> ingest_traces(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<TrafficProfile> profiles;
  std::map<std::string, std::size_t> slot_of;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    view = detail::trim(view);
    if (!have_header) {
      if (view != "timestamp,service,value") throw parse_error("expected header 'timestamp,service,value'", line_no);
      have_header = true;
      continue;
    }
    if (view.empty()) continue;
    const auto c1 = view.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : view.find(',', c1 + 1);
    if (c2 == std::string_view::npos || view.find(',', c2 + 1) != std::string_view::npos)
      throw parse_error("expected 3 fields", line_no);
    Timestamp ts;
    try {
      ts = parse_timestamp(view.substr(0, c1));
    } catch (const parse_error& e) {
      throw parse_error(e.what(), line_no);
    }
    const std::string service(detail::trim(view.substr(c1 + 1, c2 - c1 - 1)));
    if (service.empty()) throw parse_error("empty service name", line_no);
    double value = 0.0;
    if (!detail::parse_double(view.substr(c2 + 1), value) || !std::isfinite(value))
      throw parse_error("bad value '" + std::string(view.substr(c2 + 1)) + "'", line_no);
    if (value < 0.0) throw validation_error("line " + std::to_string(line_no) + ": negative value");
    auto [it, inserted] = slot_of.try_emplace(service, profiles.size());
    if (inserted) profiles.push_back({service, {}});
    profiles[it->second].observations.push_back({ts, value});
  }
  if (!have_header) throw parse_error("missing header", line_no);
  for (auto& p : profiles) {
    std::stable_sort(p.observations.begin(), p.observations.end(),
                     [](const auto& a, const auto& b) { return a.time < b.time; });
    for (std::size_t i = 1; i < p.observations.size(); ++i)
      if (p.observations[i].time == p.observations[i - 1].time)
        throw validation_error("duplicate timestamp for service '" + p.service + "'");
  }
  return profiles;
}

/// Single-service variant. With an empty `service` the stream must hold at
/// most one service; otherwise the named service is selected.
inline TrafficProfile ingest_trace(std::istream& in, const std::string& service = {}) {
  auto all = ingest_traces(in);
  if (service.empty()) {
    if (all.empty()) return {};
    if (all.size() > 1) throw validation_error("trace holds several services; name one");
    return all.front();
  }
  for (auto& p : all)
    if (p.service == service) return p;
  throw validation_error("service '" + service + "' not found in trace");
}

/// Scale a series into [0,1] by its maximum; all-zero stays all-zero.
inline std::vector<double> normalize_values(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  const double mx = out.empty() ? 0.0 : *std::max_element(out.begin(), out.end());
  if (mx > 0.0)
    for (double& v : out) v /= mx;
  return out;
}

/// q_p(t): mean observation per slot (slot 0 starts at `origin`, or at the
/// first observation), divided by the largest slot mean. Slots without
/// observations repeat the previous slot's mean (leading gaps take the first
/// observed mean). Observations outside the grid are ignored.
inline std::vector<double> normalize_profile(const TrafficProfile& profile, const TimeGrid& grid,
                                             std::optional<Timestamp> origin = std::nullopt) {
  if (profile.observations.empty()) throw input_error("cannot normalize an empty profile");
  const Timestamp start = origin.value_or(profile.observations.front().time);
  const double slot_seconds = grid.slot_length_hours * 3600.0;
  std::vector<double> sum(grid.slot_count, 0.0);
  std::vector<std::size_t> count(grid.slot_count, 0);
  for (const auto& o : profile.observations) {
    const double offset = static_cast<double>((o.time - start).count());
    if (offset < 0.0) continue;
    const auto slot = static_cast<std::size_t>(std::floor(offset / slot_seconds));
    if (slot >= grid.slot_count) continue;
    sum[slot] += o.value;
    ++count[slot];
  }
  std::vector<double> mean(grid.slot_count, 0.0);
  std::optional<double> last;
  for (std::size_t t = 0; t < grid.slot_count; ++t)
    if (count[t]) {
      last = sum[t] / static_cast<double>(count[t]);
      break;
    }
  if (!last) throw input_error("profile has no observations inside the slot grid");
  for (std::size_t t = 0; t < grid.slot_count; ++t) {
    if (count[t]) last = sum[t] / static_cast<double>(count[t]);
    mean[t] = *last;
  }
  return normalize_values(mean);
}

// ---------------------------------------------------------------------------
// Prediction

enum class PredictorKind { oracle, seasonal_naive, moving_average };

struct PredictorConfig {
  PredictorKind kind = PredictorKind::oracle;
  std::size_t period = 24; ///< seasonal-naive season length in slots
  std::size_t window = 3;  ///< moving-average window in slots
};

struct SeriesForecast {
  std::vector<double> values;
  bool fell_back = false; ///< history too short for the requested strategy
};

/// Forecast `horizon` values from a scalar history. Oracle is not a series
/// strategy; callers resolve it against actual demand.
inline SeriesForecast forecast_series(std::span<const double> history, std::size_t horizon,
                                      const PredictorConfig& cfg) {
  if (history.empty()) throw input_error("prediction needs at least one observation");
  SeriesForecast f;
  f.values.resize(horizon);
  const std::size_t n = history.size();
  switch (cfg.kind) {
  case PredictorKind::seasonal_naive:
    if (cfg.period == 0) throw input_error("seasonal period must be positive");
    if (n < cfg.period) {
      f.fell_back = true;
      std::fill(f.values.begin(), f.values.end(), history.back());
    } else {
      for (std::size_t h = 0; h < horizon; ++h) f.values[h] = history[n - cfg.period + (h % cfg.period)];
    }
    break;
  case PredictorKind::moving_average: {
    if (cfg.window == 0) throw input_error("moving-average window must be positive");
    const std::size_t w = std::min(cfg.window, n);
    f.fell_back = w < cfg.window;
    const double mean = std::accumulate(history.end() - static_cast<std::ptrdiff_t>(w), history.end(), 0.0) /
                        static_cast<double>(w);
    std::fill(f.values.begin(), f.values.end(), mean);
    break;
  }
  case PredictorKind::oracle:
    throw input_error("oracle prediction has no series form");
  }
  return f;
}

struct DemandForecast {
  std::vector<DemandSlice> slices; ///< one per forecast step
  bool fell_back = false;

  /// Predicted storage total of service p at step h (the per-service profile).
  double service_total(std::size_t h, std::size_t p) const {
    double s = 0.0;
    for (std::size_t u = 0; u < slices.at(h).rows(); ++u) s += slices[h](u, p).s;
    return s;
  }
};

/// Forecast every (area, service) component from a sequence of past slices.
inline DemandForecast predict_demand(std::span<const DemandSlice> history, std::size_t horizon,
                                     const PredictorConfig& cfg) {
  if (history.empty()) throw input_error("prediction needs at least one slice of history");
  const std::size_t areas = history.front().rows(), services = history.front().cols();
  DemandForecast out;
  out.slices.assign(horizon, DemandSlice(areas, services));
  std::vector<double> series(history.size());
  auto run = [&](auto member) {
    for (std::size_t u = 0; u < areas; ++u)
      for (std::size_t p = 0; p < services; ++p) {
        for (std::size_t i = 0; i < history.size(); ++i) series[i] = history[i](u, p).*member;
        const auto f = forecast_series(series, horizon, cfg);
        out.fell_back = out.fell_back || f.fell_back;
        for (std::size_t h = 0; h < horizon; ++h) out.slices[h](u, p).*member = f.values[h];
      }
  };
  run(&DemandTriple::s);
  run(&DemandTriple::s_post);
  run(&DemandTriple::c);
  return out;
}

// ---------------------------------------------------------------------------
// Demand source for the scheduling loop

/// Actual per-slot demand plus observed history preceding slot 0.
struct DemandSource {
  DemandSet history; ///< may have zero slots
  DemandSet actual;
};

/// `history_periods` full periods of history followed by the evaluated
/// period, all drawn from one seeded stream (history first).
inline DemandSource make_demand_source(const Scenario& sc, std::uint64_t seed = 0, std::size_t history_periods = 1) {
  double pop = 0.0;
  for (const auto& a : sc.areas) pop += a.population;
  if (!(pop > 0.0) || !(sc.total_population > 0.0)) throw input_error("total population is zero");
  const std::size_t n = sc.time_grid.slot_count;
  std::mt19937_64 rng(seed);
  DemandSource src{DemandSet(sc.areas.size(), sc.services.size(), n * history_periods),
                   DemandSet(sc.areas.size(), sc.services.size(), n)};
  for (std::size_t k = 0; k < history_periods; ++k) detail::fill_period(src.history, k * n, sc, &rng);
  detail::fill_period(src.actual, 0, sc, &rng);
  return src;
}

} // namespace edgefed
