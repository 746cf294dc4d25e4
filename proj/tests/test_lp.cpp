#include <gtest/gtest.h>

#include <random>

#include "gridseer/milp.hpp"

using namespace gridseer;

namespace {

double row_activity(const lp::Row& row, const std::vector<double>& x) {
  double v = 0.0;
  for (const auto& t : row.terms) v += t.coef * x[t.var];
  return v;
}

bool feasible(const lp::Model& m, const std::vector<double>& x, double tol = 1e-7) {
  for (std::size_t j = 0; j < m.variable_count(); ++j) {
    if (x[j] < m.lower(static_cast<int>(j)) - tol || x[j] > m.upper(static_cast<int>(j)) + tol) {
      return false;
    }
  }
  for (std::size_t i = 0; i < m.row_count(); ++i) {
    const lp::Row& r = m.row(static_cast<int>(i));
    const double v = row_activity(r, x);
    if (v < r.lower - tol || v > r.upper + tol) return false;
  }
  return true;
}

double objective(const lp::Model& m, const std::vector<double>& x) {
  double z = 0.0;
  for (std::size_t j = 0; j < m.variable_count(); ++j) z += m.cost(static_cast<int>(j)) * x[j];
  return z;
}

// Random covering program: min c x, A x >= 1 over 0/1 boxes, A in {0,1}.
lp::Model random_cover(std::mt19937_64& rng, int vars, int rows) {
  lp::Model m;
  std::uniform_int_distribution<int> cost(1, 9);
  for (int j = 0; j < vars; ++j) m.add_variable(0.0, 1.0, cost(rng));
  for (int i = 0; i < rows; ++i) {
    std::vector<lp::Term> terms;
    for (int j = 0; j < vars; ++j) {
      if (rng() % 3 == 0) terms.push_back({j, 1.0});
    }
    if (terms.empty()) terms.push_back({static_cast<int>(rng() % vars), 1.0});
    m.add_row(std::move(terms), 1.0, lp::kInf);
  }
  return m;
}

double brute_force_binary(const lp::Model& m) {
  const int n = static_cast<int>(m.variable_count());
  double best = lp::kInf;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<double> x(n);
    for (int j = 0; j < n; ++j) x[j] = (mask >> j) & 1u;
    if (feasible(m, x)) best = std::min(best, objective(m, x));
  }
  return best;
}

}  // namespace

TEST(Simplex, KnownOptimum) {
  // max 3x + 2y s.t. x + y <= 4, x + 3y <= 6, 0 <= x <= 3, 0 <= y <= 10.
  lp::Model m;
  int x = m.add_variable(0, 3, -3);
  int y = m.add_variable(0, 10, -2);
  m.add_row({{x, 1}, {y, 1}}, -lp::kInf, 4);
  m.add_row({{x, 1}, {y, 3}}, -lp::kInf, 6);
  lp::Simplex s(m);
  ASSERT_EQ(s.solve(), lp::Status::kOptimal);
  EXPECT_NEAR(s.objective(), -11.0, 1e-9);
  EXPECT_NEAR(s.primal()[x], 3.0, 1e-9);
  EXPECT_NEAR(s.primal()[y], 1.0, 1e-9);
}

TEST(Simplex, EqualityAndRangeRows) {
  lp::Model m;
  int x = m.add_variable(-5, 5, 1);
  int y = m.add_variable(-5, 5, 1);
  m.add_row({{x, 1}, {y, -1}}, 2, 2);
  m.add_row({{x, 1}, {y, 1}}, -1, 3);
  lp::Simplex s(m);
  ASSERT_EQ(s.solve(), lp::Status::kOptimal);
  EXPECT_NEAR(s.objective(), -1.0, 1e-9);
  EXPECT_TRUE(feasible(m, s.primal()));
}

TEST(Simplex, DetectsInfeasibility) {
  lp::Model m;
  int x = m.add_variable(0, 1, 1);
  int y = m.add_variable(0, 1, 1);
  m.add_row({{x, 1}, {y, 1}}, 3, lp::kInf);
  lp::Simplex s(m);
  EXPECT_EQ(s.solve(), lp::Status::kInfeasible);
}

TEST(Simplex, WarmStartAfterBoundChangeAndNewRow) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 40; ++k) {
    lp::Model m = random_cover(rng, 8, 6);
    lp::Simplex s(m);
    ASSERT_EQ(s.solve(), lp::Status::kOptimal);
    const double before = s.objective();
    // Fixing a variable to zero can only raise the optimum.
    s.set_bounds(0, 0.0, 0.0);
    lp::Row extra{{{1, 1.0}, {2, 1.0}}, 1.0, lp::kInf};
    s.add_row(extra);
    lp::Status st = s.solve();

    lp::Model cold = m;
    cold.add_row(extra.terms, extra.lower, extra.upper);
    lp::Model fixed;
    for (std::size_t j = 0; j < cold.variable_count(); ++j) {
      const int jj = static_cast<int>(j);
      fixed.add_variable(j == 0 ? 0.0 : cold.lower(jj), j == 0 ? 0.0 : cold.upper(jj), cold.cost(jj));
    }
    for (std::size_t i = 0; i < cold.row_count(); ++i) {
      const lp::Row& r = cold.row(static_cast<int>(i));
      fixed.add_row(r.terms, r.lower, r.upper);
    }
    lp::Simplex fresh(fixed);
    lp::Status want = fresh.solve();
    ASSERT_EQ(st, want);
    if (st != lp::Status::kOptimal) continue;
    EXPECT_NEAR(s.objective(), fresh.objective(), 1e-7);
    EXPECT_GE(s.objective(), before - 1e-9);
    EXPECT_TRUE(feasible(fixed, s.primal()));
  }
}

TEST(Simplex, RandomCoversAreFeasibleAndBelowIntegerOptimum) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 100; ++k) {
    lp::Model m = random_cover(rng, 7, 5);
    lp::Simplex s(m);
    ASSERT_EQ(s.solve(), lp::Status::kOptimal);
    EXPECT_TRUE(feasible(m, s.primal()));
    EXPECT_LE(s.objective(), brute_force_binary(m) + 1e-9);
  }
}

TEST(BranchAndBound, MatchesEnumeration) {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 100; ++k) {
    lp::Model m = random_cover(rng, 9, 7);
    const double want = brute_force_binary(m);
    std::vector<int> vars(m.variable_count());
    for (std::size_t j = 0; j < vars.size(); ++j) vars[j] = static_cast<int>(j);
    milp::BranchAndBound bb(m, {vars});
    milp::Options opt;
    opt.integral_objective = true;
    milp::Result r = bb.solve(opt);
    ASSERT_EQ(r.status, milp::Status::kOptimal);
    EXPECT_NEAR(r.objective, want, 1e-9);
    EXPECT_TRUE(feasible(m, r.solution));
    for (double v : r.solution) EXPECT_NEAR(v, std::round(v), 1e-9);
  }
}

TEST(BranchAndBound, LazyCutsAreEnforced) {
  // min -x0 - x1 - x2 with the cut x0 + x1 + x2 <= 1 supplied lazily.
  lp::Model m;
  for (int j = 0; j < 3; ++j) m.add_variable(0, 1, -1.0 - 0.1 * j);
  milp::BranchAndBound bb(m, {{0, 1, 2}});
  int calls = 0;
  bb.set_separator([&](const std::vector<double>& x) {
    ++calls;
    std::vector<lp::Row> out;
    if (x[0] + x[1] + x[2] > 1.0 + 1e-9) out.push_back({{{0, 1}, {1, 1}, {2, 1}}, -lp::kInf, 1.0});
    return out;
  });
  milp::Result r = bb.solve({});
  ASSERT_EQ(r.status, milp::Status::kOptimal);
  EXPECT_NEAR(r.objective, -1.2, 1e-9);
  EXPECT_NEAR(r.solution[2], 1.0, 1e-9);
  EXPECT_GT(calls, 0);
  EXPECT_GE(r.cuts, 1);
}

TEST(BranchAndBound, InfeasibleAndCutoff) {
  lp::Model m;
  int x = m.add_variable(0, 1, 1);
  int y = m.add_variable(0, 1, 1);
  m.add_row({{x, 2}, {y, 2}}, 1, 1);  // x + y = 1/2 has no 0-1 point
  milp::BranchAndBound bb(m, {{x, y}});
  EXPECT_EQ(bb.solve({}).status, milp::Status::kInfeasible);

  lp::Model easy;
  int a = easy.add_variable(0, 1, 2);
  easy.add_row({{a, 1}}, 1, lp::kInf);
  milp::BranchAndBound cut(easy, {{a}});
  cut.set_cutoff(2.0);
  milp::Result r = cut.solve({});
  EXPECT_TRUE(r.solution.empty());
}
