#ifndef RETMAP_V_SERIES_HPP_
#define RETMAP_V_SERIES_HPP_

// Coefficients v_n of the expansion v(xi; delta) = sum_{n>=1} delta^n v_n(xi)
// of the solution of
//     xi v' + 2 v = delta xi^3 (p - v)^{3/2},   v(0) = 0,
// via  v_n = W[p^{3/2} R_{n-1}],  where 1 + sum delta^n R_n is the series of
// (1 - sum delta^k v_k / p)^{3/2}  and W is weighted_cumulative.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "retmap/errors.hpp"
#include "retmap/grid.hpp"
#include "retmap/series.hpp"

namespace retmap {

struct VSeriesOptions {
  double delta_max = 0.4;
  // Tolerance on |c_n(M) - c_n(2M)|; compute_v_series throws past it.
  double quadrature_tol = 1e-10;
  bool estimate_quadrature_error = true;
};

struct VSeries {
  int order = 0;
  std::vector<GridFunction> v;     // v[n-1] holds v_n
  std::vector<double> c;           // c[n-1] = v_n(1)
  std::vector<double> c_refined;   // c_n on the grid with 2M intervals (if estimated)
  std::vector<double> c_error;     // |c_n(M) - c_n(2M)|, empty if not estimated
  GridPtr grid;
  double delta_max = 0.4;

  const GridFunction& v_n(int n) const { return v.at(static_cast<std::size_t>(n - 1)); }
  double c_n(int n) const { return c.at(static_cast<std::size_t>(n - 1)); }
};

namespace detail {

inline std::vector<GridFunction> v_recursion(int order, const GridPtr& grid) {
  const GridFunction p = p_function(grid);
  const GridFunction p32 = power(p, 1.5);
  // S = 1 - sum_k delta^k v_k / p, extended one coefficient per step.
  std::vector<GridFunction> s_coeffs{GridFunction::constant(grid, 1.0)};
  std::vector<GridFunction> v;
  v.reserve(static_cast<std::size_t>(order));
  for (int n = 1; n <= order; ++n) {
    const FunctionSeries s(s_coeffs, "delta");
    const FunctionSeries r = series_pow_frac(s, Rational{3, 2});
    v.push_back(weighted_cumulative(p32 * r[n - 1]));
    // p >= 1 on [0, 1]
    s_coeffs.push_back(-1.0 * divide(v.back(), p, 1.0 - 1e-12));
  }
  return v;
}

}  // namespace detail

inline VSeries compute_v_series(int order, const GridPtr& grid, const VSeriesOptions& opts = {}) {
  if (order < 1) throw DomainError("compute_v_series: order must be at least 1");
  VSeries out;
  out.order = order;
  out.grid = grid;
  out.delta_max = opts.delta_max;
  out.v = detail::v_recursion(order, grid);
  for (const auto& vn : out.v) out.c.push_back(vn.back());
  if (opts.estimate_quadrature_error) {
    const auto fine = detail::v_recursion(order, grid->refined());
    double worst = 0.0;
    for (int n = 0; n < order; ++n) {
      out.c_refined.push_back(fine[static_cast<std::size_t>(n)].back());
      const double err = std::abs(out.c_refined.back() - out.c[static_cast<std::size_t>(n)]);
      out.c_error.push_back(err);
      worst = std::max(worst, err);
    }
    if (worst > opts.quadrature_tol) {
      throw NonConvergence("compute_v_series: quadrature error estimate " + std::to_string(worst) +
                               " exceeds tolerance " + std::to_string(opts.quadrature_tol),
                           worst);
    }
  }
  return out;
}

namespace detail {

inline void require_delta(const VSeries& vs, double delta) {
  if (!(std::abs(delta) < vs.delta_max)) {
    throw DomainError("|delta| = " + std::to_string(std::abs(delta)) + " outside the admissible range " +
                      std::to_string(vs.delta_max));
  }
}

}  // namespace detail

// Partial sum sum_{n=1}^{N} delta^n v_n(xi), interpolated off the grid.
inline double eval_v(const VSeries& vs, double xi, double delta) {
  detail::require_delta(vs, delta);
  const Grid::Interpolant rule = vs.grid->interpolation(xi);
  double acc = 0.0;
  for (int n = vs.order; n >= 1; --n) acc = (acc + vs.v_n(n).apply(rule)) * delta;
  return acc;
}

// The partial sum as a grid function; `terms` defaults to all of them.
inline GridFunction partial_sum(const VSeries& vs, double delta, int terms = -1) {
  detail::require_delta(vs, delta);
  if (terms < 0) terms = vs.order;
  if (terms > vs.order) throw DomainError("partial_sum: more terms than computed");
  GridFunction acc = GridFunction::constant(vs.grid, 0.0);
  for (int n = terms; n >= 1; --n) acc = delta * (acc + vs.v_n(n));
  return acc;
}

// sup over interior nodes of |xi S' + 2 S - delta xi^3 (p - S)^{3/2}| for the
// partial sum S.
inline double ode_residual(const VSeries& vs, double delta) {
  const GridFunction s = partial_sum(vs, delta);
  const GridFunction ds = derivative(s);
  const auto x = vs.grid->nodes();
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    const double rhs = delta * x[i] * x[i] * x[i] * std::pow(eval_p(x[i]) - s[i], 1.5);
    worst = std::max(worst, std::abs(x[i] * ds[i] + 2.0 * s[i] - rhs));
  }
  return worst;
}

}  // namespace retmap

#endif  // RETMAP_V_SERIES_HPP_
