#ifndef RETMAP_FIXED_POINT_HPP_
#define RETMAP_FIXED_POINT_HPP_

// Picard iteration for  v = J[v],  J[v](xi) = delta xi^{-2} \int_0^xi t^4 (p - v)^{3/2} dt,
// on the ball sup|v| <= m. Independent of the series route: it never touches
// the v_n, only the same grid and cumulative rule.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "retmap/errors.hpp"
#include "retmap/grid.hpp"

namespace retmap {

struct FixedPointOptions {
  double ball_radius = 0.9;  // m
  double delta_max = 0.4;
  double tol = 1e-12;
  int max_iter = 500;
  // Step ratios are only trusted while the previous step exceeds this floor.
  double ratio_floor = 1e-13;
};

struct FixedPointResult {
  GridFunction solution;
  double delta = 0.0;
  int iterations = 0;
  double final_step_norm = 0.0;
  double contraction_estimate = 0.0;
  std::vector<double> step_norms;
};

inline GridFunction apply_J(const GridFunction& v, double delta, double ball_radius = 0.9) {
  const double sup = v.sup_norm();
  if (sup > ball_radius) {
    throw OutOfBall("apply_J: sup|v| = " + std::to_string(sup) + " exceeds ball radius " +
                        std::to_string(ball_radius),
                    sup);
  }
  const GridFunction p = p_function(v.grid());
  return delta * weighted_cumulative(power(p - v, 1.5));
}

inline FixedPointResult solve_fixed_point(const GridPtr& grid, double delta, const FixedPointOptions& opts = {}) {
  if (!(std::abs(delta) < opts.delta_max)) {
    throw DomainError("solve_fixed_point: |delta| must be below " + std::to_string(opts.delta_max));
  }
  if (!(opts.tol > 0.0)) throw DomainError("solve_fixed_point: tolerance must be positive");
  GridFunction v = GridFunction::constant(grid, 0.0);
  std::vector<double> steps;
  double contraction = 0.0;
  for (int k = 1; k <= opts.max_iter; ++k) {
    GridFunction next = apply_J(v, delta, opts.ball_radius);
    const double step = (next - v).sup_norm();
    if (!steps.empty() && steps.back() > opts.ratio_floor) {
      contraction = std::max(contraction, step / steps.back());
    }
    steps.push_back(step);
    v = std::move(next);
    if (step < opts.tol) {
      return FixedPointResult{std::move(v), delta, k, step, contraction, std::move(steps)};
    }
  }
  throw NonConvergence("solve_fixed_point: no convergence after " + std::to_string(opts.max_iter) +
                           " iterations, last step " + std::to_string(steps.back()),
                       steps.back());
}

}  // namespace retmap

#endif  // RETMAP_FIXED_POINT_HPP_
