#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "retmap/fixed_point.hpp"
#include "retmap/v_series.hpp"

namespace retmap {
namespace {

const VSeries& series_2048() {
  static const VSeries vs = compute_v_series(8, Grid::make(2048));
  return vs;
}

TEST(VSeries, FirstCoefficientIsBetaValue) {
  EXPECT_NEAR(series_2048().c_n(1), oracle::c1_beta(), 1e-12);
  EXPECT_NEAR(series_2048().c_n(1), 0.374579650613159972923548512842, 1e-12);
}

TEST(VSeries, CoefficientsAlternateInSign) {
  const auto& vs = series_2048();
  for (int n = 1; n <= vs.order; ++n) EXPECT_GT((n % 2 == 1 ? 1.0 : -1.0) * vs.c_n(n), 0.0) << "n=" << n;
}

TEST(VSeries, FrozenCoefficients) {
  // Values from this pipeline at M = 2048, cross-checked against M = 4096 and
  // a Chebyshev-Lobatto grid.
  const double expected[] = {0.374579650613161,   -0.108485461036078,   0.0281026809124584,
                             -0.00684058078486232, 0.00160031806406223,  -0.000364225607912963,
                             8.12378951051277e-05, -1.78413165499232e-05};
  for (int n = 1; n <= 8; ++n) EXPECT_NEAR(series_2048().c_n(n), expected[n - 1], 1e-12) << "n=" << n;
}

TEST(VSeries, GridKindsAgree) {
  const auto cheb = compute_v_series(8, Grid::make(2048, GridKind::chebyshev_lobatto));
  for (int n = 1; n <= 8; ++n) EXPECT_NEAR(cheb.c_n(n), series_2048().c_n(n), 1e-12);
}

TEST(VSeries, VanishAtOriginAndEndpointIsC) {
  const auto& vs = series_2048();
  for (int n = 1; n <= vs.order; ++n) {
    EXPECT_EQ(vs.v_n(n).front(), 0.0);
    EXPECT_EQ(vs.v_n(n).back(), vs.c_n(n));
  }
}

TEST(VSeries, SmallXiLimits) {
  // Off-node values near the origin; v_2 ~ xi^6 sits at roundoff on the first
  // nodes, so it is probed a little further out.
  const auto& vs = series_2048();
  for (double xi : {1e-3, 2e-3}) EXPECT_NEAR(vs.v_n(1)(xi) / std::pow(xi, 3), 8.0 / 5.0, 1e-4);
  EXPECT_NEAR(vs.v_n(2)(0.02) / std::pow(0.02, 6), -3.0 / 5.0, 1e-2);
}

TEST(VSeries, MatchesHandWrittenLowOrders) {
  const auto& vs = series_2048();
  const auto p = p_function(vs.grid);
  const auto v1 = weighted_cumulative(power(p, 1.5));
  const auto sqrt_p = power(p, 0.5);
  const auto v2 = -1.5 * weighted_cumulative(sqrt_p * v1);
  const auto v3 = weighted_cumulative(-1.5 * (sqrt_p * v2) + 0.375 * divide(v1 * v1, sqrt_p, 0.5));
  EXPECT_LE((vs.v_n(1) - v1).sup_norm(), 1e-12);
  EXPECT_LE((vs.v_n(2) - v2).sup_norm(), 1e-12);
  EXPECT_LE((vs.v_n(3) - v3).sup_norm(), 1e-12);
}

TEST(VSeries, QuadratureErrorEstimate) {
  const auto& vs = series_2048();
  ASSERT_EQ(vs.c_error.size(), 8u);
  for (double e : vs.c_error) EXPECT_LE(e, 1e-10);
}

TEST(VSeries, CoarseGridFailsStrictTolerance) {
  VSeriesOptions opts;
  opts.quadrature_tol = 1e-14;
  EXPECT_THROW(compute_v_series(4, Grid::make(64), opts), NonConvergence);
}

TEST(VSeries, OrderMustBePositive) { EXPECT_THROW(compute_v_series(0, Grid::make(64)), DomainError); }

TEST(EvalV, DomainChecks) {
  const auto& vs = series_2048();
  EXPECT_THROW(eval_v(vs, 0.5, 0.4), DomainError);
  EXPECT_THROW(eval_v(vs, 0.5, -0.5), DomainError);
  EXPECT_THROW(eval_v(vs, 1.2, 0.1), DomainError);
  EXPECT_EQ(eval_v(vs, 0.7, 0.0), 0.0);
}

TEST(EvalV, EndpointIsPartialSumOfC) {
  const auto& vs = series_2048();
  const double d = 0.2;
  double expected = 0.0;
  for (int n = vs.order; n >= 1; --n) expected = (expected + vs.c_n(n)) * d;
  EXPECT_NEAR(eval_v(vs, 1.0, d), expected, 1e-15);
}

TEST(VSeries, AgreesWithFixedPoint) {
  const auto& vs = series_2048();
  FixedPointOptions opts;
  opts.tol = 1e-15;
  for (double d : {0.05, 0.1, 0.2}) {
    const auto fp = solve_fixed_point(vs.grid, d, opts);
    const double diff = (partial_sum(vs, d) - fp.solution).sup_norm();
    EXPECT_LE(diff, 5.0 * std::pow(d, 9)) << "delta=" << d;
  }
}

TEST(VSeries, OdeResidualScalesAsNextOrder) {
  // Order 6 keeps the delta^7 remainder above roundoff at delta = 0.05.
  const auto vs = compute_v_series(6, Grid::make(2048));
  EXPECT_LE(ode_residual(vs, 0.0), 1e-15);
  const double r1 = ode_residual(vs, 0.05);
  const double r2 = ode_residual(vs, 0.1);
  EXPECT_LT(r2, 1e-9);
  EXPECT_NEAR(std::log2(r2 / r1), 7.0, 0.3);
}

}  // namespace
}  // namespace retmap
