#pragma once

// CSV and JSON emission of comparison results, plus the per-slot redirect
// table consumed by a request dispatcher.

#include <edgefed/compare.hpp>
#include <edgefed/errors.hpp>
#include <edgefed/model.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <unistd.h>

namespace edgefed {

struct CsvTable {
  std::vector<std::string> notes; ///< emitted as leading "# ..." lines
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  friend bool operator==(const CsvTable&, const CsvTable&) = default;
};

/// Shortest text that parses back to the same double; "nan" for a missing value.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (v == 0.0) return "0";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline bool needs_quotes(std::string_view s) {
  return s.find_first_of(",\"\r\n") != std::string_view::npos || (!s.empty() && (s.front() == ' ' || s.back() == ' '));
}

inline void write_field(std::ostream& os, std::string_view s) {
  if (!needs_quotes(s)) {
    os << s;
    return;
  }
  os << '"';
  for (char c : s) {
    if (c == '"') os << '"';
    os << c;
  }
  os << '"';
}

inline void write_record(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    write_field(os, fields[i]);
  }
  os << "\r\n";
}

} // namespace detail

inline void write_csv(std::ostream& os, const CsvTable& t) {
  for (const auto& n : t.notes) os << "# " << n << "\r\n";
  detail::write_record(os, t.header);
  for (const auto& r : t.rows) detail::write_record(os, r);
}

inline std::string to_csv(const CsvTable& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

/// Parse RFC 4180 text (CRLF or LF). Lines starting with '#' before the header
/// are returned as notes.
inline CsvTable read_csv(std::istream& in) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  CsvTable t;
  std::size_t i = 0, line = 1;
  while (i < text.size() && text[i] == '#') {
    const std::size_t end = text.find('\n', i);
    std::string note = text.substr(i + 1, (end == std::string::npos ? text.size() : end) - i - 1);
    if (!note.empty() && note.back() == '\r') note.pop_back();
    if (!note.empty() && note.front() == ' ') note.erase(0, 1);
    t.notes.push_back(std::move(note));
    i = end == std::string::npos ? text.size() : end + 1;
    ++line;
  }
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, any = false;
  auto end_record = [&] {
    rec.push_back(std::move(field));
    field.clear();
    records.push_back(std::move(rec));
    rec.clear();
    any = false;
  };
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
    case '"':
      if (!field.empty()) throw parse_error("quote inside unquoted field", line);
      quoted = any = true;
      break;
    case ',':
      rec.push_back(std::move(field));
      field.clear();
      any = true;
      break;
    case '\r':
      if (i + 1 < text.size() && text[i + 1] == '\n') break;
      throw parse_error("bare carriage return", line);
    case '\n':
      end_record();
      ++line;
      break;
    default:
      field += c;
      any = true;
    }
  }
  if (quoted) throw parse_error("unterminated quoted field", line);
  if (any || !field.empty() || !rec.empty()) end_record();
  if (records.empty()) throw parse_error("missing header", line);
  t.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size())
      throw parse_error("expected " + std::to_string(t.header.size()) + " fields, got " +
                        std::to_string(records[r].size()));
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

/// Write via a sibling temporary file and rename, so readers never observe a
/// partially written file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw config_error("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw config_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw config_error("cannot replace '" + path.string() + "': " + ec.message());
  }
}

inline const char* savings_note() { return "savings are fractions: (baseline - model) / baseline"; }

/// One row per (group, model) with that model's saving against each baseline
/// and the group's latency requirements. Groups are sorted; gaps between the
/// smallest and largest group and groups with infeasible slots are noted, the
/// latter's rows omitted.
inline CsvTable emit_cost_table(std::span<const SavingsReport> reports) {
  CsvTable t;
  t.notes.push_back(savings_note());
  t.header = {"group", "model", "total_cost", "savings_vs_fixed", "savings_vs_multihoming"};
  if (reports.empty()) return t;
  for (const auto& [id, lp] : reports.front().requirements) t.header.push_back("l_" + id);

  std::vector<const SavingsReport*> sorted;
  for (const auto& r : reports) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->group < b->group; });

  std::set<int> present;
  for (auto* r : sorted) present.insert(r->group);
  for (int g = *present.begin(); g <= *present.rbegin(); ++g)
    if (!present.count(g)) t.notes.push_back("gap: group " + std::to_string(g) + " missing");

  for (auto* r : sorted) {
    const auto* fixed = r->find(ProvisioningModel::fixed_contract);
    const auto* multi = r->find(ProvisioningModel::multihoming);
    for (const auto& m : r->models) {
      if (!m.feasible()) {
        t.notes.push_back("gap: group " + std::to_string(r->group) + " " + to_string(m.model) + " infeasible");
        continue;
      }
      auto saving = [&](const ModelSummary* base) {
        return base && base->feasible() ? format_number(relative_saving(base->total_cost, m.total_cost))
                                        : std::string("nan");
      };
      std::vector<std::string> row{std::to_string(r->group), to_string(m.model), format_number(m.total_cost),
                                   saving(fixed), saving(multi)};
      for (const auto& [id, lp] : r->requirements) row.push_back(format_number(lp));
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

enum class Metric { average_cost, cost_saving, utilization };

inline const char* to_string(Metric m) {
  switch (m) {
  case Metric::average_cost: return "average_cost";
  case Metric::cost_saving: return "cost_saving";
  case Metric::utilization: return "utilization";
  }
  return "?";
}

inline Metric parse_metric(std::string_view s) {
  if (s == "average_cost") return Metric::average_cost;
  if (s == "cost_saving") return Metric::cost_saving;
  if (s == "utilization") return Metric::utilization;
  throw input_error("unknown metric '" + std::string(s) + "'");
}

/// Long-format series (slot, series, value) for one model.
///   average_cost: series "eip/service"
///   utilization:  series edge_storage, edge_compute, cloud_storage, cloud_compute
///   cost_saving:  federation's per-slot saving against `model`, overall and per EIP
///                 (for model = federation, against both baselines)
inline CsvTable emit_timeseries(const SavingsReport& report, Metric metric, ProvisioningModel model) {
  CsvTable t;
  t.header = {"slot", "series", "value"};
  const ModelSummary* m = report.find(model);
  if (!m) throw input_error(std::string("report has no ") + to_string(model) + " run");
  const std::size_t slots = m->slot_costs.size();
  std::vector<std::pair<std::string, std::vector<double>>> series;

  switch (metric) {
  case Metric::average_cost:
    for (const auto& [name, v] : m->average_cost) series.emplace_back(name, v);
    break;
  case Metric::utilization: {
    std::vector<double> es, ec, cs, cc;
    for (const auto& u : m->slot_utilization) {
      es.push_back(u.edge_storage);
      ec.push_back(u.edge_compute);
      cs.push_back(u.cloud_storage);
      cc.push_back(u.cloud_compute);
    }
    series = {{"edge_storage", es}, {"edge_compute", ec}, {"cloud_storage", cs}, {"cloud_compute", cc}};
    break;
  }
  case Metric::cost_saving: {
    t.notes.push_back(savings_note());
    const auto* fed = report.find(ProvisioningModel::federation);
    if (!fed) throw input_error("report has no federation run");
    std::vector<ProvisioningModel> baselines;
    if (model == ProvisioningModel::federation)
      baselines = {ProvisioningModel::fixed_contract, ProvisioningModel::multihoming};
    else
      baselines = {model};
    for (auto b : baselines) {
      const auto* base = report.find(b);
      if (!base) continue;
      const std::string prefix = std::string("vs_") + to_string(b);
      series.emplace_back(prefix + "/total", report.slot_savings_vs(b));
      for (const auto& [eip, costs] : base->eip_slot_costs) {
        std::vector<double> v(slots, std::nan(""));
        auto it = fed->eip_slot_costs.find(eip);
        for (std::size_t s = 0; s < slots && s < costs.size(); ++s) {
          const double f = it == fed->eip_slot_costs.end() ? 0.0 : it->second[s];
          if (!std::isnan(costs[s]) && !std::isnan(f)) v[s] = relative_saving(costs[s], f);
        }
        series.emplace_back(prefix + "/" + eip, std::move(v));
      }
    }
    break;
  }
  }
  for (const auto& [name, values] : series)
    for (std::size_t s = 0; s < values.size(); ++s)
      t.rows.push_back({std::to_string(s), name, format_number(values[s])});
  return t;
}

inline CsvTable emit_timeseries(const SavingsReport& report, std::string_view metric, ProvisioningModel model) {
  return emit_timeseries(report, parse_metric(metric), model);
}

inline std::vector<std::string> redirect_header() {
  return {"slot", "area", "service", "storage_targets", "compute_targets"};
}

/// Weighted redirect targets per (area, service) with nonzero demand. Target
/// lists are "node=fraction" pairs joined by ';', fractions above 1e-9.
inline CsvTable emit_redirect_table(const Allocation& alloc, const Scenario& sc, const DemandSlice& demand) {
  CsvTable t;
  t.header = redirect_header();
  auto targets = [&](const Array3<double>& edge, const Array3<double>& cloud, std::size_t u, std::size_t p) {
    std::string out;
    auto add = [&](const std::string& id, double f) {
      if (f <= 1e-9) return;
      if (!out.empty()) out += ';';
      out += id + "=" + format_number(f);
    };
    for (std::size_t e = 0; e < sc.edge_nodes.size(); ++e) add(sc.edge_nodes[e].id, edge(u, p, e));
    for (std::size_t a = 0; a < sc.cloud_nodes.size(); ++a) add(sc.cloud_nodes[a].id, cloud(u, p, a));
    return out;
  };
  for (std::size_t u = 0; u < sc.areas.size(); ++u)
    for (std::size_t p = 0; p < sc.services.size(); ++p) {
      const auto& d = demand(u, p);
      if (d.s == 0.0 && d.c == 0.0) continue;
      t.rows.push_back({std::to_string(alloc.slot), sc.areas[u].id, sc.services[p].id,
                        targets(alloc.alpha, alloc.theta_s, u, p), targets(alloc.beta, alloc.theta_c, u, p)});
    }
  return t;
}

/// Parse a "node=fraction;..." target list back into pairs.
inline std::vector<std::pair<std::string, double>> parse_targets(std::string_view s) {
  std::vector<std::pair<std::string, double>> out;
  while (!s.empty()) {
    const auto semi = s.find(';');
    const std::string_view item = s.substr(0, semi);
    const auto eq = item.find('=');
    double v = 0.0;
    if (eq == std::string_view::npos || !detail::parse_double(item.substr(eq + 1), v))
      throw parse_error("bad redirect target '" + std::string(item) + "'");
    out.emplace_back(std::string(item.substr(0, eq)), v);
    s = semi == std::string_view::npos ? std::string_view{} : s.substr(semi + 1);
  }
  return out;
}

namespace detail {

inline nlohmann::json trend_json(const Trend& t) {
  nlohmann::json j{{"values", t.values}, {"non_decreasing", t.non_decreasing()}};
  if (t.first_drop) j["first_drop_index"] = *t.first_drop;
  return j;
}

} // namespace detail

inline nlohmann::json report_json(const SavingsReport& r) {
  using nlohmann::json;
  json j{{"scenario", r.scenario}, {"group", r.group}, {"seed", r.seed}, {"savings_are_fractions", true}};
  json req = json::object();
  for (const auto& [id, lp] : r.requirements) req[id] = lp;
  j["latency_requirements"] = req;
  j["models"] = json::array();
  for (const auto& m : r.models) {
    json sat = json::object();
    for (std::size_t p = 0; p < m.satisfaction.size() && p < r.requirements.size(); ++p)
      sat[r.requirements[p].first] = m.satisfaction[p];
    j["models"].push_back({{"model", to_string(m.model)},
                           {"feasible", m.feasible()},
                           {"total_cost", m.total_cost},
                           {"eip_totals", m.eip_totals},
                           {"satisfaction", sat},
                           {"edge_utilization", m.utilization.edge_combined},
                           {"cloud_utilization", m.utilization.cloud_combined}});
  }
  for (auto b : {ProvisioningModel::fixed_contract, ProvisioningModel::multihoming}) {
    const std::string key = std::string("savings_vs_") + (b == ProvisioningModel::fixed_contract ? "fixed" : "multihoming");
    const auto s = r.savings_vs(b);
    j[key] = s ? json(*s) : json();
    json per_eip = json::object();
    for (const auto& [eip, v] : r.eip_savings_vs(b)) per_eip[eip] = v;
    j[key + "_by_eip"] = per_eip;
    const auto slots = r.slot_savings_vs(b);
    double lo = INFINITY, hi = -INFINITY;
    for (double v : slots)
      if (!std::isnan(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    j[key + "_slot_range"] = lo <= hi ? json::array({lo, hi}) : json();
  }
  j["flags"] = r.flags;
  return j;
}

inline nlohmann::json sweep_json(const SweepReport& s) {
  nlohmann::json j{{"groups", s.groups},
                   {"federation_cost_trend", detail::trend_json(s.federation_cost)},
                   {"edge_utilization_trend", detail::trend_json(s.edge_utilization)}};
  j["reports"] = nlohmann::json::array();
  for (const auto& r : s.reports) j["reports"].push_back(report_json(r));
  return j;
}

} // namespace edgefed
