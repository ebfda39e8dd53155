#include <gtest/gtest.h>

#include <cmath>

#include "retmap/fixed_point.hpp"
#include "retmap/v_series.hpp"

namespace retmap {
namespace {

// Lipschitz bound of J on the ball: (3/2) delta (4 + m)^{1/2} / 5 with m = 0.9,
// since sup W[1] = 1/5.
double lipschitz_bound(double delta) { return 1.5 * delta * std::sqrt(4.9) / 5.0; }

TEST(FixedPoint, ZeroDeltaIsZero) {
  const auto r = solve_fixed_point(Grid::make(256), 0.0);
  EXPECT_EQ(r.solution.sup_norm(), 0.0);
  EXPECT_EQ(r.iterations, 1);
}

TEST(FixedPoint, ConvergesQuicklyWithContractionBelowBound) {
  const auto grid = Grid::make(1024);
  FixedPointOptions opts;
  opts.tol = 1e-15;
  for (double d : {0.05, 0.1, 0.2, -0.2}) {
    const auto r = solve_fixed_point(grid, d, opts);
    EXPECT_LE(r.iterations, 20) << d;
    EXPECT_LT(r.final_step_norm, 1e-15);
    EXPECT_GT(r.contraction_estimate, 0.0);
    EXPECT_LT(r.contraction_estimate, lipschitz_bound(std::abs(d))) << d;
  }
}

TEST(FixedPoint, SolutionIsAFixedPoint) {
  const auto grid = Grid::make(1024);
  FixedPointOptions opts;
  opts.tol = 1e-15;
  const auto r = solve_fixed_point(grid, 0.3, opts);
  EXPECT_LE((apply_J(r.solution, 0.3) - r.solution).sup_norm(), 1e-15);
  EXPECT_LE(r.solution.sup_norm(), opts.ball_radius);
}

TEST(FixedPoint, StepsDecreaseGeometrically) {
  FixedPointOptions opts;
  opts.tol = 1e-14;
  const auto r = solve_fixed_point(Grid::make(512), 0.2, opts);
  for (std::size_t k = 1; k < r.step_norms.size(); ++k) EXPECT_LT(r.step_norms[k], r.step_norms[k - 1]);
}

TEST(FixedPoint, DeltaOutsideRangeRejected) {
  EXPECT_THROW(solve_fixed_point(Grid::make(64), 0.4), DomainError);
  EXPECT_THROW(solve_fixed_point(Grid::make(64), -0.5), DomainError);
}

TEST(FixedPoint, IterationCapReportsLastStep) {
  FixedPointOptions opts;
  opts.max_iter = 2;
  opts.tol = 1e-15;
  try {
    solve_fixed_point(Grid::make(256), 0.3, opts);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_GT(e.achieved(), 1e-15);
  }
}

TEST(ApplyJ, OutOfBallThrows) {
  const auto grid = Grid::make(64);
  try {
    apply_J(GridFunction::constant(grid, 0.95), 0.1);
    FAIL() << "expected OutOfBall";
  } catch (const OutOfBall& e) {
    EXPECT_DOUBLE_EQ(e.sup_norm(), 0.95);
  }
}

TEST(ApplyJ, FirstIterateIsFirstSeriesTerm) {
  const auto grid = Grid::make(512);
  const auto vs = compute_v_series(1, grid, {.estimate_quadrature_error = false});
  const auto j0 = apply_J(GridFunction::constant(grid, 0.0), 0.1);
  EXPECT_LE((j0 - 0.1 * vs.v_n(1)).sup_norm(), 1e-16);
}

TEST(FixedPoint, DifferenceFromSeriesShrinksWithDelta) {
  const auto vs = compute_v_series(6, Grid::make(2048));
  FixedPointOptions opts;
  opts.tol = 1e-15;
  auto diff = [&](double d) { return (partial_sum(vs, d) - solve_fixed_point(vs.grid, d, opts).solution).sup_norm(); };
  const double slope = std::log(diff(0.2) / diff(0.1)) / std::log(2.0);
  EXPECT_NEAR(slope, 7.0, 0.3);
}

}  // namespace
}  // namespace retmap
