#pragma once

#include <edgefed/errors.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace edgefed::lp {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

enum class RowSense { less_equal, equal };

struct Row {
  std::vector<std::size_t> columns;
  std::vector<double> values;
  RowSense sense = RowSense::less_equal;
  double rhs = 0.0;

  void add(std::size_t col, double v) {
    columns.push_back(col);
    values.push_back(v);
  }
};

/// min c'x  s.t.  rows,  0 <= x_j <= upper_j.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<double> upper;
  std::vector<Row> rows;

  std::size_t num_columns() const noexcept { return objective.size(); }
  std::size_t num_rows() const noexcept { return rows.size(); }

  std::size_t add_column(double cost, double ub = 1.0) {
    objective.push_back(cost);
    upper.push_back(ub);
    return objective.size() - 1;
  }

  std::size_t add_row(Row r) {
    for (std::size_t c : r.columns)
      if (c >= num_columns()) throw input_error("row references column " + std::to_string(c) + " out of range");
    rows.push_back(std::move(r));
    return rows.size() - 1;
  }

  double activity(std::size_t i, const std::vector<double>& x) const {
    const Row& r = rows[i];
    double s = 0.0;
    for (std::size_t k = 0; k < r.columns.size(); ++k) s += r.values[k] * x[r.columns[k]];
    return s;
  }

  double objective_value(const std::vector<double>& x) const {
    double s = 0.0;
    for (std::size_t j = 0; j < objective.size(); ++j) s += objective[j] * x[j];
    return s;
  }
};

enum class LpStatus { optimal, infeasible, unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
  case LpStatus::optimal: return "optimal";
  case LpStatus::infeasible: return "infeasible";
  case LpStatus::unbounded: return "unbounded";
  }
  return "?";
}

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  double objective_value = 0.0;
  std::vector<double> values;
  std::optional<std::size_t> certificate_row; ///< set when infeasible: the row left unsatisfied by phase one
  std::size_t iterations = 0;
};

/// Largest bound or row violation of x. Row violations are divided by
/// max(1, largest |coefficient| of the row) so that the figure is comparable
/// across rows with very different magnitudes.
inline double max_violation(const LinearProgram& lp, const std::vector<double>& x) {
  double worst = 0.0;
  for (std::size_t j = 0; j < lp.num_columns(); ++j)
    worst = std::max({worst, -x[j], x[j] - lp.upper[j]});
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    const Row& r = lp.rows[i];
    double scale = 1.0;
    for (double v : r.values) scale = std::max(scale, std::abs(v));
    const double d = lp.activity(i, x) - r.rhs;
    worst = std::max(worst, (r.sense == RowSense::equal ? std::abs(d) : d) / scale);
  }
  return worst;
}

/// Solver contract. Implementations must be safe for concurrent independent
/// invocations and, for an optimal status, return x satisfying every bound and
/// row within 1e-7 in the sense of max_violation.
class Solver {
public:
  virtual ~Solver() = default;
  virtual LpSolution solve(const LinearProgram& lp) const = 0;
  virtual std::string name() const = 0;
};

} // namespace edgefed::lp
