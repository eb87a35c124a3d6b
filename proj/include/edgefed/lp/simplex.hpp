#pragma once

// Bounded-variable revised simplex (two phases, dense explicit basis inverse).
//
// Rows are equilibrated by their largest coefficient and the objective by its
// largest cost before solving; tolerances apply to the scaled problem. Pricing
// is Dantzig's rule; after `degenerate_switch` consecutive degenerate pivots
// the solver uses Bland's smallest-index rule for both the entering and the
// leaving choice until a pivot makes progress, which rules out cycling.

#include <edgefed/errors.hpp>
#include <edgefed/lp/linear_program.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace edgefed::lp {

struct SimplexOptions {
  double feasibility_tolerance = 1e-7;
  double optimality_tolerance = 1e-7;
  double pivot_tolerance = 1e-9;
  std::size_t refactor_interval = 100;
  std::size_t degenerate_switch = 30;
  bool bland_only = false;
  std::size_t max_iterations = 0; ///< 0: 50 * (rows + columns) + 10000
};

namespace detail {

class SimplexEngine {
public:
  SimplexEngine(const LinearProgram& lp, const SimplexOptions& opt) : lp_(lp), opt_(opt) { setup(); }

  LpSolution run() {
    LpSolution sol;
    if (n_art_ > 0) {
      std::vector<double> phase1(n_total_, 0.0);
      for (std::size_t j = art_begin_; j < n_total_; ++j) phase1[j] = 1.0;
      cost_ = phase1;
      const auto st = iterate();
      refactor();
      (void)st; // phase one is bounded below by zero
      double worst = 0.0;
      std::size_t worst_row = 0;
      for (std::size_t j = art_begin_; j < n_total_; ++j)
        if (x_[j] > worst) {
          worst = x_[j];
          worst_row = art_row_[j - art_begin_];
        }
      if (worst > opt_.feasibility_tolerance) {
        sol.status = LpStatus::infeasible;
        sol.certificate_row = worst_row;
        sol.iterations = iterations_;
        return sol;
      }
      for (std::size_t j = art_begin_; j < n_total_; ++j) upper_[j] = 0.0;
    }
    cost_.assign(n_total_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) cost_[j] = lp_.objective[j] * cost_scale_;
    const auto st = iterate();
    sol.iterations = iterations_;
    if (st == Outcome::unbounded) {
      sol.status = LpStatus::unbounded;
      return sol;
    }
    refactor();
    sol.status = LpStatus::optimal;
    sol.values.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      double v = x_[j];
      if (v < 0.0) v = 0.0;
      if (v > lp_.upper[j]) v = lp_.upper[j];
      sol.values[j] = v;
    }
    sol.objective_value = lp_.objective_value(sol.values);
    return sol;
  }

private:
  enum class State : unsigned char { basic, at_lower, at_upper };
  enum class Outcome { optimal, unbounded };

  const LinearProgram& lp_;
  SimplexOptions opt_;

  std::size_t m_ = 0, n_ = 0, n_total_ = 0, art_begin_ = 0, n_art_ = 0;
  std::vector<std::size_t> col_start_;
  std::vector<std::size_t> col_row_;
  std::vector<double> col_val_;
  std::vector<double> upper_, cost_, x_, b_;
  std::vector<std::size_t> art_row_;
  std::vector<State> state_;
  std::vector<std::size_t> head_; // basic column per basis position
  std::vector<double> binv_;      // m x m row-major
  double cost_scale_ = 1.0;
  std::size_t iterations_ = 0;

  double& binv(std::size_t i, std::size_t k) { return binv_[i * m_ + k]; }

  void setup() {
    m_ = lp_.num_rows();
    n_ = lp_.num_columns();
    if (lp_.upper.size() != n_) throw input_error("bounds and objective sizes differ");

    std::vector<double> row_scale(m_, 1.0);
    for (std::size_t i = 0; i < m_; ++i) {
      double mx = 0.0;
      for (double v : lp_.rows[i].values) mx = std::max(mx, std::abs(v));
      if (mx > 0.0) row_scale[i] = 1.0 / mx;
    }
    double cmax = 0.0;
    for (double c : lp_.objective) cmax = std::max(cmax, std::abs(c));
    cost_scale_ = cmax > 0.0 ? 1.0 / cmax : 1.0;

    // Structural columns in CSC form.
    std::vector<std::size_t> count(n_, 0);
    for (const auto& r : lp_.rows)
      for (std::size_t c : r.columns) ++count[c];
    col_start_.assign(n_ + 1, 0);
    for (std::size_t j = 0; j < n_; ++j) col_start_[j + 1] = col_start_[j] + count[j];
    col_row_.resize(col_start_[n_]);
    col_val_.resize(col_start_[n_]);
    std::vector<std::size_t> fill(col_start_.begin(), col_start_.end() - 1);
    for (std::size_t i = 0; i < m_; ++i) {
      const Row& r = lp_.rows[i];
      for (std::size_t k = 0; k < r.columns.size(); ++k) {
        const std::size_t pos = fill[r.columns[k]]++;
        col_row_[pos] = i;
        col_val_[pos] = r.values[k] * row_scale[i];
      }
    }
    b_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) b_[i] = lp_.rows[i].rhs * row_scale[i];

    upper_ = lp_.upper;
    x_.assign(n_, 0.0);
    state_.assign(n_, State::at_lower);
    head_.assign(m_, 0);

    auto push_unit = [&](std::size_t row, double sign, double ub) {
      col_row_.push_back(row);
      col_val_.push_back(sign);
      col_start_.push_back(col_row_.size());
      upper_.push_back(ub);
      x_.push_back(0.0);
      state_.push_back(State::at_lower);
      return upper_.size() - 1;
    };

    std::vector<double> basis_sign(m_, 1.0);
    std::vector<std::size_t> need_art;
    for (std::size_t i = 0; i < m_; ++i) {
      if (lp_.rows[i].sense == RowSense::less_equal) {
        const std::size_t s = push_unit(i, 1.0, infinity);
        if (b_[i] >= 0.0) {
          head_[i] = s;
          state_[s] = State::basic;
          x_[s] = b_[i];
        } else {
          need_art.push_back(i);
        }
      } else {
        need_art.push_back(i);
      }
    }
    art_begin_ = upper_.size();
    for (std::size_t i : need_art) {
      const double sign = b_[i] >= 0.0 ? 1.0 : -1.0;
      const std::size_t a = push_unit(i, sign, infinity);
      head_[i] = a;
      state_[a] = State::basic;
      x_[a] = std::abs(b_[i]);
      basis_sign[i] = sign;
      art_row_.push_back(i);
    }
    n_total_ = upper_.size();
    n_art_ = n_total_ - art_begin_;

    binv_.assign(m_ * m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) binv(i, i) = 1.0 / basis_sign[i];
  }

  // Rebuild B^{-1} from the basic columns and recompute the basic values.
  void refactor() {
    if (m_ == 0) return;
    std::vector<double> a(m_ * m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t j = head_[i];
      for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k) a[col_row_[k] * m_ + i] = col_val_[k];
    }
    std::vector<double>& inv = binv_;
    std::fill(inv.begin(), inv.end(), 0.0);
    for (std::size_t i = 0; i < m_; ++i) inv[i * m_ + i] = 1.0;
    for (std::size_t c = 0; c < m_; ++c) {
      std::size_t piv = c;
      double best = std::abs(a[c * m_ + c]);
      for (std::size_t r = c + 1; r < m_; ++r)
        if (std::abs(a[r * m_ + c]) > best) {
          best = std::abs(a[r * m_ + c]);
          piv = r;
        }
      if (best < 1e-13) throw solver_error("singular basis during refactorization");
      if (piv != c) {
        std::swap_ranges(a.begin() + static_cast<std::ptrdiff_t>(c * m_), a.begin() + static_cast<std::ptrdiff_t>((c + 1) * m_),
                         a.begin() + static_cast<std::ptrdiff_t>(piv * m_));
        std::swap_ranges(inv.begin() + static_cast<std::ptrdiff_t>(c * m_), inv.begin() + static_cast<std::ptrdiff_t>((c + 1) * m_),
                         inv.begin() + static_cast<std::ptrdiff_t>(piv * m_));
      }
      const double d = 1.0 / a[c * m_ + c];
      for (std::size_t k = 0; k < m_; ++k) {
        a[c * m_ + k] *= d;
        inv[c * m_ + k] *= d;
      }
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == c) continue;
        const double f = a[r * m_ + c];
        if (f == 0.0) continue;
        for (std::size_t k = 0; k < m_; ++k) {
          a[r * m_ + k] -= f * a[c * m_ + k];
          inv[r * m_ + k] -= f * inv[c * m_ + k];
        }
      }
    }
    // x_B = B^{-1} (b - N x_N)
    std::vector<double> rhs = b_;
    for (std::size_t j = 0; j < n_total_; ++j) {
      if (state_[j] == State::basic || x_[j] == 0.0) continue;
      for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k) rhs[col_row_[k]] -= col_val_[k] * x_[j];
    }
    for (std::size_t i = 0; i < m_; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < m_; ++k) s += inv[i * m_ + k] * rhs[k];
      x_[head_[i]] = s;
    }
  }

  Outcome iterate() {
    const std::size_t limit = opt_.max_iterations ? opt_.max_iterations : 50 * (m_ + n_total_) + 10000;
    std::vector<double> y(m_), w(m_);
    std::size_t degenerate_run = 0;
    std::size_t since_refactor = 0;
    for (;;) {
      if (iterations_ >= limit) throw solver_error("simplex iteration limit reached");
      if (since_refactor >= opt_.refactor_interval) {
        refactor();
        since_refactor = 0;
      }
      const bool bland = opt_.bland_only || degenerate_run >= opt_.degenerate_switch;

      // Duals y' = c_B' B^{-1}.
      std::fill(y.begin(), y.end(), 0.0);
      for (std::size_t i = 0; i < m_; ++i) {
        const double cb = cost_[head_[i]];
        if (cb == 0.0) continue;
        const double* row = &binv_[i * m_];
        for (std::size_t k = 0; k < m_; ++k) y[k] += cb * row[k];
      }

      // Pricing.
      std::size_t enter = n_total_;
      double enter_d = 0.0, best = 0.0;
      for (std::size_t j = 0; j < n_total_; ++j) {
        if (state_[j] == State::basic || upper_[j] <= 0.0) continue;
        double d = cost_[j];
        for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k) d -= y[col_row_[k]] * col_val_[k];
        const bool improving = state_[j] == State::at_lower ? d < -opt_.optimality_tolerance
                                                            : d > opt_.optimality_tolerance;
        if (!improving) continue;
        if (bland) {
          enter = j;
          enter_d = d;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          enter = j;
          enter_d = d;
        }
      }
      if (enter == n_total_) return Outcome::optimal;
      (void)enter_d;

      // Column of the entering variable in the current basis.
      std::fill(w.begin(), w.end(), 0.0);
      for (std::size_t k = col_start_[enter]; k < col_start_[enter + 1]; ++k) {
        const std::size_t r = col_row_[k];
        const double v = col_val_[k];
        for (std::size_t i = 0; i < m_; ++i) w[i] += binv_[i * m_ + r] * v;
      }
      const double dir = state_[enter] == State::at_lower ? 1.0 : -1.0;

      // Ratio test: x_B(t) = x_B - t * dir * w.
      double step = infinity;
      for (std::size_t i = 0; i < m_; ++i) {
        const double delta = dir * w[i];
        const std::size_t j = head_[i];
        double r = infinity;
        if (delta > opt_.pivot_tolerance) r = std::max(0.0, x_[j]) / delta;
        else if (delta < -opt_.pivot_tolerance && upper_[j] < infinity) r = std::max(0.0, upper_[j] - x_[j]) / -delta;
        step = std::min(step, r);
      }
      std::size_t leave = m_;
      if (step < infinity) {
        const double cutoff = step + 1e-12 * std::max(1.0, step);
        double best_piv = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
          const double delta = dir * w[i];
          const std::size_t j = head_[i];
          double r = infinity;
          if (delta > opt_.pivot_tolerance) r = std::max(0.0, x_[j]) / delta;
          else if (delta < -opt_.pivot_tolerance && upper_[j] < infinity) r = std::max(0.0, upper_[j] - x_[j]) / -delta;
          if (r > cutoff) continue;
          if (bland) {
            if (leave == m_ || head_[i] < head_[leave]) leave = i;
          } else if (std::abs(delta) > best_piv) {
            best_piv = std::abs(delta);
            leave = i;
          }
        }
        if (leave != m_) {
          const double delta = dir * w[leave];
          const std::size_t j = head_[leave];
          step = delta > 0.0 ? std::max(0.0, x_[j]) / delta : std::max(0.0, upper_[j] - x_[j]) / -delta;
        }
      }

      const double span = upper_[enter];
      const bool flip = span < infinity && span <= step;
      if (!flip && step == infinity) return Outcome::unbounded;
      const double t = flip ? span : step;

      ++iterations_;
      ++since_refactor;
      degenerate_run = t <= 1e-11 ? degenerate_run + 1 : 0;

      for (std::size_t i = 0; i < m_; ++i) x_[head_[i]] -= t * dir * w[i];
      x_[enter] += t * dir;

      if (flip) {
        state_[enter] = state_[enter] == State::at_lower ? State::at_upper : State::at_lower;
        x_[enter] = state_[enter] == State::at_lower ? 0.0 : upper_[enter];
        continue;
      }

      const std::size_t out = head_[leave];
      const double delta = dir * w[leave];
      if (delta > 0.0) {
        state_[out] = State::at_lower;
        x_[out] = 0.0;
      } else {
        state_[out] = State::at_upper;
        x_[out] = upper_[out];
      }
      state_[enter] = State::basic;
      head_[leave] = enter;

      // Product-form update of B^{-1}.
      const double piv = w[leave];
      double* prow = &binv_[leave * m_];
      for (std::size_t k = 0; k < m_; ++k) prow[k] /= piv;
      for (std::size_t i = 0; i < m_; ++i) {
        if (i == leave || w[i] == 0.0) continue;
        const double f = w[i];
        double* row = &binv_[i * m_];
        for (std::size_t k = 0; k < m_; ++k) row[k] -= f * prow[k];
      }
    }
  }
};

} // namespace detail

/// The bundled solver.
class SimplexSolver final : public Solver {
public:
  explicit SimplexSolver(SimplexOptions options = {}) : options_(options) {}

  LpSolution solve(const LinearProgram& lp) const override {
    detail::SimplexEngine engine(lp, options_);
    return engine.run();
  }

  std::string name() const override { return "bundled-simplex"; }

  const SimplexOptions& options() const noexcept { return options_; }

private:
  SimplexOptions options_;
};

} // namespace edgefed::lp
