#pragma once

// Fixed-column MPS export/import and an adapter that delegates solving to an
// external command.
//
// External command protocol: the solver is invoked as
//     <command> <model.mps> <solution.txt>
// and must write
//     status optimal|infeasible|unbounded
//     objective <value>
//     <column name> <value>      (one line per column, optional when not optimal)

#include <edgefed/errors.hpp>
#include <edgefed/lp/linear_program.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace edgefed::lp {

inline std::string mps_column_name(std::size_t j) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "X%07zu", j + 1);
  return buf;
}

inline std::string mps_row_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "R%07zu", i + 1);
  return buf;
}

/// Shortest %g rendering that fits the 12-character numeric field.
inline std::string mps_number(double v) {
  char buf[64];
  for (int prec = 12; prec >= 1; --prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::string(buf).size() <= 12) return buf;
  }
  throw input_error("number does not fit an MPS field");
}

namespace detail {

inline std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

// Data line with fields at columns 2-3, 5-12, 15-22, 25-36, 40-47, 50-61.
inline std::string mps_line(const std::string& f1, const std::string& f2, const std::string& f3 = {},
                            const std::string& f4 = {}, const std::string& f5 = {}, const std::string& f6 = {}) {
  std::string s = " " + pad(f1, 2) + " " + pad(f2, 8);
  if (!f3.empty()) s += "  " + pad(f3, 8) + "  " + pad(f4, 12);
  if (!f5.empty()) s += "   " + pad(f5, 8) + "  " + f6;
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

} // namespace detail

inline void write_mps(std::ostream& os, const LinearProgram& lp, const std::string& name = "EDGEFED") {
  if (lp.num_columns() > 9999999 || lp.num_rows() > 9999999) throw input_error("program too large for MPS names");
  os << "NAME          " << name << "\n";
  os << "ROWS\n";
  os << detail::mps_line("N", "COST") << "\n";
  for (std::size_t i = 0; i < lp.num_rows(); ++i)
    os << detail::mps_line(lp.rows[i].sense == RowSense::equal ? "E" : "L", mps_row_name(i)) << "\n";

  // Column-major view of the rows.
  std::vector<std::vector<std::pair<std::size_t, double>>> cols(lp.num_columns());
  for (std::size_t i = 0; i < lp.num_rows(); ++i)
    for (std::size_t k = 0; k < lp.rows[i].columns.size(); ++k)
      cols[lp.rows[i].columns[k]].emplace_back(i, lp.rows[i].values[k]);

  os << "COLUMNS\n";
  for (std::size_t j = 0; j < lp.num_columns(); ++j) {
    std::vector<std::pair<std::string, double>> entries;
    if (lp.objective[j] != 0.0) entries.emplace_back("COST", lp.objective[j]);
    for (const auto& [i, v] : cols[j]) entries.emplace_back(mps_row_name(i), v);
    if (entries.empty()) entries.emplace_back("COST", 0.0);
    for (std::size_t k = 0; k < entries.size(); k += 2) {
      if (k + 1 < entries.size())
        os << detail::mps_line("", mps_column_name(j), entries[k].first, mps_number(entries[k].second),
                               entries[k + 1].first, mps_number(entries[k + 1].second))
           << "\n";
      else
        os << detail::mps_line("", mps_column_name(j), entries[k].first, mps_number(entries[k].second)) << "\n";
    }
  }
  os << "RHS\n";
  for (std::size_t i = 0; i < lp.num_rows(); ++i)
    if (lp.rows[i].rhs != 0.0)
      os << detail::mps_line("", "RHS", mps_row_name(i), mps_number(lp.rows[i].rhs)) << "\n";
  os << "BOUNDS\n";
  for (std::size_t j = 0; j < lp.num_columns(); ++j)
    if (lp.upper[j] < infinity) os << detail::mps_line("UP", "BND", mps_column_name(j), mps_number(lp.upper[j])) << "\n";
  os << "ENDATA\n";
}

/// Reads what write_mps produces (and the common free-format subset: N/L/E/G
/// rows, UP/FX/PL/LO=0 bounds). G rows are negated into <= rows. Columns
/// appear in order of first mention; missing bounds mean [0, +inf).
inline LinearProgram read_mps(std::istream& in, std::vector<std::string>* column_names = nullptr) {
  enum class Section { none, rows, columns, rhs, bounds, done } sec = Section::none;
  LinearProgram lp;
  std::string cost_row;
  std::map<std::string, std::size_t> row_of, col_of;
  std::vector<double> row_sign;
  std::vector<std::string> names;
  std::string line;
  std::size_t line_no = 0;
  auto num = [&](const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw parse_error("bad number '" + s + "'", line_no);
    }
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '*') continue;
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (line[0] != ' ' && line[0] != '\t') {
      const std::string& h = tok[0];
      if (h == "NAME") sec = Section::none;
      else if (h == "ROWS") sec = Section::rows;
      else if (h == "COLUMNS") sec = Section::columns;
      else if (h == "RHS") sec = Section::rhs;
      else if (h == "BOUNDS") sec = Section::bounds;
      else if (h == "ENDATA") sec = Section::done;
      else throw parse_error("unsupported MPS section '" + h + "'", line_no);
      continue;
    }
    switch (sec) {
    case Section::rows: {
      if (tok.size() != 2) throw parse_error("ROWS entry needs type and name", line_no);
      if (tok[0] == "N") {
        if (cost_row.empty()) cost_row = tok[1];
        continue;
      }
      Row r;
      double sign = 1.0;
      if (tok[0] == "E") r.sense = RowSense::equal;
      else if (tok[0] == "L") r.sense = RowSense::less_equal;
      else if (tok[0] == "G") {
        r.sense = RowSense::less_equal;
        sign = -1.0;
      } else throw parse_error("unknown row type '" + tok[0] + "'", line_no);
      row_of[tok[1]] = lp.rows.size();
      lp.rows.push_back(std::move(r));
      row_sign.push_back(sign);
      break;
    }
    case Section::columns: {
      if (tok.size() != 3 && tok.size() != 5) throw parse_error("COLUMNS entry malformed", line_no);
      auto [it, fresh] = col_of.try_emplace(tok[0], lp.num_columns());
      if (fresh) {
        lp.add_column(0.0, infinity);
        names.push_back(tok[0]);
      }
      for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
        const double v = num(tok[k + 1]);
        if (tok[k] == cost_row) {
          lp.objective[it->second] = v;
          continue;
        }
        auto r = row_of.find(tok[k]);
        if (r == row_of.end()) throw parse_error("unknown row '" + tok[k] + "'", line_no);
        if (v != 0.0) lp.rows[r->second].add(it->second, v * row_sign[r->second]);
      }
      break;
    }
    case Section::rhs: {
      if (tok.size() != 3 && tok.size() != 5) throw parse_error("RHS entry malformed", line_no);
      for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
        if (tok[k] == cost_row) continue;
        auto r = row_of.find(tok[k]);
        if (r == row_of.end()) throw parse_error("unknown row '" + tok[k] + "'", line_no);
        lp.rows[r->second].rhs = num(tok[k + 1]) * row_sign[r->second];
      }
      break;
    }
    case Section::bounds: {
      if (tok.size() < 3) throw parse_error("BOUNDS entry malformed", line_no);
      auto c = col_of.find(tok[2]);
      if (c == col_of.end()) throw parse_error("unknown column '" + tok[2] + "'", line_no);
      const std::string& type = tok[0];
      if (type == "PL") lp.upper[c->second] = infinity;
      else {
        if (tok.size() != 4) throw parse_error("bound needs a value", line_no);
        const double v = num(tok[3]);
        if (type == "UP") lp.upper[c->second] = v;
        else if (type == "FX" && v == 0.0) lp.upper[c->second] = 0.0;
        else if (type == "LO" && v == 0.0) {
        } else throw parse_error("unsupported bound '" + type + "'", line_no);
      }
      break;
    }
    default:
      throw parse_error("data line outside a section", line_no);
    }
  }
  if (sec != Section::done) throw parse_error("missing ENDATA", line_no);
  if (column_names) *column_names = std::move(names);
  return lp;
}

/// Solution file format shared with external solvers (see file comment).
inline void write_solution(std::ostream& os, const LpSolution& sol, const std::vector<std::string>& column_names) {
  char buf[64];
  os << "status " << to_string(sol.status) << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", sol.objective_value);
  os << "objective " << buf << "\n";
  for (std::size_t j = 0; j < sol.values.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g", sol.values[j]);
    os << (j < column_names.size() ? column_names[j] : mps_column_name(j)) << " " << buf << "\n";
  }
}

inline LpSolution read_solution(std::istream& in, std::size_t columns) {
  LpSolution sol;
  std::string key, value;
  if (!(in >> key >> value) || key != "status") throw parse_error("solution must start with 'status'");
  if (value == "optimal") sol.status = LpStatus::optimal;
  else if (value == "infeasible") sol.status = LpStatus::infeasible;
  else if (value == "unbounded") sol.status = LpStatus::unbounded;
  else throw parse_error("unknown status '" + value + "'");
  if (!(in >> key >> value) || key != "objective") throw parse_error("missing objective line");
  sol.objective_value = std::stod(value);
  if (sol.status != LpStatus::optimal) return sol;
  sol.values.assign(columns, 0.0);
  std::map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < columns; ++j) index[mps_column_name(j)] = j;
  while (in >> key >> value) {
    auto it = index.find(key);
    if (it == index.end()) throw parse_error("unknown column '" + key + "' in solution");
    sol.values[it->second] = std::stod(value);
  }
  return sol;
}

/// Runs `command model.mps solution.txt` in a scratch directory. The objective
/// is recomputed from the returned values against the original program.
class ExternalSolver final : public Solver {
public:
  explicit ExternalSolver(std::string command) : command_(std::move(command)) {}

  LpSolution solve(const LinearProgram& lp) const override {
    namespace fs = std::filesystem;
    std::random_device rd;
    const fs::path dir = fs::temp_directory_path() / ("edgefed-lp-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(dir);
    struct Cleanup {
      fs::path p;
      ~Cleanup() {
        std::error_code ec;
        fs::remove_all(p, ec);
      }
    } cleanup{dir};
    const fs::path model = dir / "model.mps", result = dir / "solution.txt";
    {
      std::ofstream os(model);
      write_mps(os, lp);
    }
    const std::string cmd = "\"" + command_ + "\" \"" + model.string() + "\" \"" + result.string() + "\"";
    if (std::system(cmd.c_str()) != 0) throw solver_error("external solver failed: " + command_);
    std::ifstream is(result);
    if (!is) throw solver_error("external solver wrote no solution file");
    LpSolution sol = read_solution(is, lp.num_columns());
    if (sol.status == LpStatus::optimal) sol.objective_value = lp.objective_value(sol.values);
    return sol;
  }

  std::string name() const override { return "external:" + command_; }

private:
  std::string command_;
};

} // namespace edgefed::lp
