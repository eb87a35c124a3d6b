#include <edgefed/lp/simplex.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <optional>
#include <random>

using namespace edgefed::lp;

namespace {

Row make_row(std::vector<std::size_t> cols, std::vector<double> vals, RowSense sense, double rhs) {
  Row r;
  r.columns = std::move(cols);
  r.values = std::move(vals);
  r.sense = sense;
  r.rhs = rhs;
  return r;
}

// Vertex enumeration over all choices of n active constraints. Independent of
// the simplex code: plain Gaussian elimination on each candidate system.
std::optional<double> vertex_oracle(const LinearProgram& lp) {
  const std::size_t n = lp.num_columns();
  struct Con {
    std::vector<double> a;
    double b;
    bool eq;
  };
  std::vector<Con> cons;
  for (const auto& r : lp.rows) {
    Con c{std::vector<double>(n, 0.0), r.rhs, r.sense == RowSense::equal};
    for (std::size_t k = 0; k < r.columns.size(); ++k) c.a[r.columns[k]] += r.values[k];
    cons.push_back(c);
  }
  for (std::size_t j = 0; j < n; ++j) {
    Con lo{std::vector<double>(n, 0.0), 0.0, false};
    lo.a[j] = -1.0;
    cons.push_back(lo);
    if (std::isfinite(lp.upper[j])) {
      Con hi{std::vector<double>(n, 0.0), lp.upper[j], false};
      hi.a[j] = 1.0;
      cons.push_back(hi);
    }
  }
  std::optional<double> best;
  const std::size_t m = cons.size();
  std::vector<std::size_t> pick(n);
  auto feasible = [&](const std::vector<double>& x) {
    for (const auto& c : cons) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += c.a[j] * x[j];
      if (c.eq ? std::abs(s - c.b) > 1e-7 : s - c.b > 1e-7) return false;
    }
    return true;
  };
  auto solve = [&](const std::vector<std::size_t>& idx) -> std::optional<std::vector<double>> {
    std::vector<std::vector<double>> M(n, std::vector<double>(n + 1));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) M[i][j] = cons[idx[i]].a[j];
      M[i][n] = cons[idx[i]].b;
    }
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c; r < n; ++r)
        if (std::abs(M[r][c]) > std::abs(M[piv][c])) piv = r;
      if (std::abs(M[piv][c]) < 1e-12) return std::nullopt;
      std::swap(M[c], M[piv]);
      for (std::size_t r = 0; r < n; ++r) {
        if (r == c) continue;
        const double f = M[r][c] / M[c][c];
        for (std::size_t k = c; k <= n; ++k) M[r][k] -= f * M[c][k];
      }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = M[i][n] / M[i][i];
    return x;
  };
  // Recursive choice of n constraint indices.
  auto rec = [&](auto&& self, std::size_t start, std::size_t depth) -> void {
    if (depth == n) {
      if (auto x = solve(pick); x && feasible(*x)) {
        const double v = lp.objective_value(*x);
        if (!best || v < *best) best = v;
      }
      return;
    }
    for (std::size_t i = start; i < m; ++i) {
      pick[depth] = i;
      self(self, i + 1, depth + 1);
    }
  };
  rec(rec, 0, 0);
  return best;
}

} // namespace

TEST(Simplex, SingleBoundedColumnStaysAtZero) {
  LinearProgram lp;
  lp.add_column(1.0);
  const auto sol = SimplexSolver().solve(lp);
  ASSERT_EQ(sol.status, LpStatus::optimal);
  EXPECT_DOUBLE_EQ(sol.values[0], 0.0);
  EXPECT_DOUBLE_EQ(sol.objective_value, 0.0);
}

TEST(Simplex, DominatedColumnIsLeftOut) {
  LinearProgram lp;
  lp.add_column(2.0);
  lp.add_column(1.0);
  lp.add_row(make_row({0, 1}, {1, 1}, RowSense::equal, 1.0));
  const auto sol = SimplexSolver().solve(lp);
  ASSERT_EQ(sol.status, LpStatus::optimal);
  EXPECT_NEAR(sol.values[0], 0.0, 1e-12);
  EXPECT_NEAR(sol.values[1], 1.0, 1e-12);
  EXPECT_NEAR(sol.objective_value, 1.0, 1e-12);
}

TEST(Simplex, EqualityPinsSingleColumn) {
  LinearProgram lp;
  lp.add_column(3.5);
  lp.add_row(make_row({0}, {1}, RowSense::equal, 1.0));
  const auto sol = SimplexSolver().solve(lp);
  ASSERT_EQ(sol.status, LpStatus::optimal);
  EXPECT_NEAR(sol.objective_value, 3.5, 1e-12);
}

TEST(Simplex, InfeasibleReportsCertificateRow) {
  LinearProgram lp;
  lp.add_column(1.0);
  lp.add_column(1.0);
  lp.add_row(make_row({0}, {1}, RowSense::less_equal, 0.5));
  lp.add_row(make_row({0, 1}, {1, 1}, RowSense::equal, 3.0)); // both capped at 1
  const auto sol = SimplexSolver().solve(lp);
  ASSERT_EQ(sol.status, LpStatus::infeasible);
  ASSERT_TRUE(sol.certificate_row.has_value());
  EXPECT_EQ(*sol.certificate_row, 1u);
}

TEST(Simplex, UnboundedDetected) {
  LinearProgram lp;
  lp.add_column(-1.0, infinity);
  lp.add_column(0.0, infinity);
  lp.add_row(make_row({0, 1}, {1, -1}, RowSense::less_equal, 1.0));
  EXPECT_EQ(SimplexSolver().solve(lp).status, LpStatus::unbounded);
}

TEST(Simplex, NegativeRhsLessEqualRow) {
  // -x - y <= -1.5  means x + y >= 1.5
  LinearProgram lp;
  lp.add_column(1.0);
  lp.add_column(2.0);
  lp.add_row(make_row({0, 1}, {-1, -1}, RowSense::less_equal, -1.5));
  const auto sol = SimplexSolver().solve(lp);
  ASSERT_EQ(sol.status, LpStatus::optimal);
  EXPECT_NEAR(sol.objective_value, 2.0, 1e-9);
  EXPECT_NEAR(sol.values[0], 1.0, 1e-9);
}

TEST(Simplex, DegenerateProblemTerminatesWithBlandOnly) {
  // Classic cycling example (Beale), bounded to make it finite.
  LinearProgram lp;
  for (double c : {-0.75, 150.0, -0.02, 6.0}) lp.add_column(c, infinity);
  lp.add_row(make_row({0, 1, 2, 3}, {0.25, -60, -0.04, 9}, RowSense::less_equal, 0.0));
  lp.add_row(make_row({0, 1, 2, 3}, {0.5, -90, -0.02, 3}, RowSense::less_equal, 0.0));
  lp.add_row(make_row({2}, {1}, RowSense::less_equal, 1.0));
  for (bool bland : {false, true}) {
    SimplexOptions o;
    o.bland_only = bland;
    const auto sol = SimplexSolver(o).solve(lp);
    ASSERT_EQ(sol.status, LpStatus::optimal);
    EXPECT_NEAR(sol.objective_value, -0.05, 1e-9);
  }
}

TEST(Simplex, RandomSmallProgramsMatchVertexEnumeration) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> coef(-2.0, 3.0), pos(0.1, 2.0);
  int optimal = 0;
  for (int trial = 0; trial < 300; ++trial) {
    LinearProgram lp;
    const std::size_t n = 2 + trial % 3;
    for (std::size_t j = 0; j < n; ++j) lp.add_column(coef(rng), pos(rng));
    const std::size_t m = 1 + trial % 3;
    for (std::size_t i = 0; i < m; ++i) {
      Row r;
      for (std::size_t j = 0; j < n; ++j)
        if (rng() % 4 != 0) r.add(j, coef(rng));
      if (r.columns.empty()) r.add(0, 1.0);
      r.sense = (i == 0 && trial % 2 == 0) ? RowSense::equal : RowSense::less_equal;
      r.rhs = coef(rng);
      lp.add_row(r);
    }
    const auto expect = vertex_oracle(lp);
    const auto sol = SimplexSolver().solve(lp);
    if (!expect) {
      EXPECT_EQ(sol.status, LpStatus::infeasible) << "trial " << trial;
      continue;
    }
    ASSERT_EQ(sol.status, LpStatus::optimal) << "trial " << trial;
    ++optimal;
    EXPECT_NEAR(sol.objective_value, *expect, 1e-7) << "trial " << trial;
    EXPECT_LE(max_violation(lp, sol.values), 1e-7) << "trial " << trial;
  }
  EXPECT_GT(optimal, 100);
}

TEST(Simplex, DeterministicOnRepeatedSolve) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  LinearProgram lp;
  for (int j = 0; j < 12; ++j) lp.add_column(d(rng));
  for (int i = 0; i < 3; ++i) {
    Row r;
    for (int j = i * 4; j < i * 4 + 4; ++j) r.add(static_cast<std::size_t>(j), 1.0);
    r.sense = RowSense::equal;
    r.rhs = 1.0;
    lp.add_row(r);
  }
  const auto a = SimplexSolver().solve(lp), b = SimplexSolver().solve(lp);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.objective_value, b.objective_value);
}
