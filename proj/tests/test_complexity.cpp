#include <gtest/gtest.h>

#include <cmath>

#include "spukf/complexity.hpp"
#include "spukf/io.hpp"

using namespace spukf;

namespace {

const int kJs[] = {1, 10, 50, 100};
const int kHs[] = {1, 2, 5, 10};

double quadratic_root(double a, double b, double c) { return (-b + std::sqrt(b * b - 4 * a * c)) / (2 * a); }

}  // namespace

TEST(CostBound, UnitParameters) {
  const CostModelParams p{1, 1, 1};
  EXPECT_DOUBLE_EQ(cost_bound(CostAlgo::ukf, p), 26 + 31 + 9);
  EXPECT_DOUBLE_EQ(cost_bound(CostAlgo::spukf, p), 5 + 4 + 17 + 9);
  EXPECT_DOUBLE_EQ(cost_bound(CostAlgo::espukf, p), 6 + 11 + 20 + 20 + 9);
}

TEST(CostBound, StrictlyMonotone) {
  for (CostAlgo a : {CostAlgo::ukf, CostAlgo::spukf, CostAlgo::espukf})
    for (int n = 1; n <= 20; ++n)
      for (int j : kJs)
        for (int h : kHs) {
          const double c = cost_bound(a, {n, j, h});
          EXPECT_LT(c, cost_bound(a, {n + 1, j, h}));
          EXPECT_LT(c, cost_bound(a, {n, j + 1, h}));
          EXPECT_LT(c, cost_bound(a, {n, j, h + 1}));
        }
}

TEST(CostBound, RejectsInvalid) {
  EXPECT_THROW(cost_bound(CostAlgo::ukf, {0, 1, 1}), InvalidArgument);
  EXPECT_THROW(reduction_percent(CostAlgo::spukf, {1, 1, 0}), InvalidArgument);
}

TEST(Reduction, UnitParameters) {
  EXPECT_NEAR(reduction_percent(CostAlgo::spukf, {1, 1, 1}), 31.0 / 66.0 * 100.0, 1e-12);
  EXPECT_NEAR(reduction_percent(CostAlgo::spukf, {1, 1, 1}), 46.97, 0.01);
  EXPECT_NEAR(reduction_percent(CostAlgo::espukf, {1, 1, 1}), 0.0, 1e-12);
}

TEST(Reduction, MatchesBoundDifference) {
  for (CostAlgo a : {CostAlgo::spukf, CostAlgo::espukf})
    for (int n = 1; n <= 50; ++n)
      for (int j : kJs)
        for (int h : kHs) {
          const CostModelParams p{n, j, h};
          const double u = cost_bound(CostAlgo::ukf, p);
          EXPECT_NEAR(reduction_percent(a, p), (u - cost_bound(a, p)) / u * 100.0, 1e-9);
        }
}

TEST(Reduction, ExpensiveDynamicsFavourSinglePropagation) {
  // Bounds 868350 and 56780 by direct substitution.
  EXPECT_NEAR(reduction_percent(CostAlgo::spukf, {10, 1000, 10}), 100.0 * (868350.0 - 56780.0) / 868350.0, 1e-9);
  EXPECT_GT(reduction_percent(CostAlgo::spukf, {10, 1000, 10}), 90.0);
}

TEST(Limit, SpukfQuadraticOracle) {
  // 5n^2 - 22n - 14 for j = h = 1.
  EXPECT_NEAR(state_dim_limit(CostAlgo::spukf, 1, 1), quadratic_root(5, -22, -14), 1e-9);
  for (int j : kJs)
    for (int h : kHs)
      EXPECT_NEAR(state_dim_limit(CostAlgo::spukf, j, h),
                  quadratic_root(5, -(26.0 * h - 4), -(8.0 * h * j + 10 * h - j - 3)), 1e-9 * (1 + h * j));
}

TEST(Limit, RootBracketsSignChange) {
  for (CostAlgo a : {CostAlgo::spukf, CostAlgo::espukf})
    for (int j : kJs)
      for (int h : kHs) {
        const double root = state_dim_limit(a, j, h);
        const int lo = static_cast<int>(std::floor(root));
        if (lo >= 1 && std::abs(root - lo) > 1e-9) EXPECT_GT(reduction_percent(a, {lo, j, h}), 0.0);
        EXPECT_LT(reduction_percent(a, {static_cast<int>(std::ceil(root)) + 1, j, h}), 0.0);
        // The root zeroes the reduction numerator.
        EXPECT_NEAR(detail::limit_poly_over_n(a, root, j, h), 0.0, 1e-6 * (1 + root * root * root));
      }
}

TEST(Limit, EspukfBelowSpukf) {
  for (int j : kJs)
    for (int h : kHs) EXPECT_LT(state_dim_limit(CostAlgo::espukf, j, h), state_dim_limit(CostAlgo::spukf, j, h));
}

TEST(Limit, GridSignsAndOrdering) {
  for (CostAlgo a : {CostAlgo::spukf, CostAlgo::espukf})
    for (int j : kJs)
      for (int h : kHs) {
        const double root = state_dim_limit(a, j, h);
        for (int n = 1; n <= 50; ++n) {
          if (std::abs(n - root) < 1e-9) continue;
          const double r = reduction_percent(a, {n, j, h});
          if (n < root) EXPECT_GT(r, 0.0) << n << " " << j << " " << h;
          else EXPECT_LT(r, 0.0) << n << " " << j << " " << h;
        }
      }
  for (int n = 1; n <= 50; ++n)
    for (int j : kJs)
      for (int h : kHs) {
        const double sp = reduction_percent(CostAlgo::spukf, {n, j, h});
        const double esp = reduction_percent(CostAlgo::espukf, {n, j, h});
        if (sp > 0 && esp > 0) EXPECT_GT(sp, esp);
      }
}

TEST(Limit, Errors) {
  EXPECT_THROW(state_dim_limit(CostAlgo::ukf, 1, 1), InvalidArgument);
  EXPECT_THROW(state_dim_limit(CostAlgo::spukf, 0, 1), InvalidArgument);
}

TEST(Grid, CellsMatchDirectCalls) {
  const auto g = complexity_grid(10, {1, 5}, {1, 3});
  EXPECT_EQ(g.rows.size(), 3u * 2 * 2 * 10);
  EXPECT_EQ(g.limits.size(), 2u * 2 * 2);
  for (const auto& r : g.rows) {
    EXPECT_EQ(r.cost_bound, cost_bound(r.algo, {r.n, r.j, r.h}));
    EXPECT_EQ(r.reduction_percent, reduction_percent(r.algo, {r.n, r.j, r.h}));
  }
  for (const auto& l : g.limits) {
    EXPECT_EQ(l.limit, state_dim_limit(l.algo, l.j, l.h));
    for (const auto& r : g.rows)
      if (r.algo == l.algo && r.j == l.j && r.h == l.h && r.n < l.limit) EXPECT_GT(r.reduction_percent, 0.0);
  }
  const auto it = std::find_if(g.limits.begin(), g.limits.end(), [](const LimitRow& l) {
    return l.algo == CostAlgo::spukf && l.j == 1 && l.h == 1;
  });
  ASSERT_NE(it, g.limits.end());
  EXPECT_NEAR(it->limit, quadratic_root(5, -22, -14), 1e-9);
  EXPECT_THROW(complexity_grid(0, {1}, {1}), ConfigError);
}
