#ifndef RETMAP_RETURN_MAP_HPP_
#define RETMAP_RETURN_MAP_HPP_

// First-return map of  dx/dtau = -2y,  dy/dtau = 4x^3 - alpha y^3  on the
// positive x-axis, assembled from the quadrant solution
//     phi(x; alpha, eta) = [eta^4 - x^4 - eta^3 (eta - x) v(sqrt(1 - x/eta); 2 eta^3 alpha)]^{1/2}.
//
// phi(0; alpha, eta)^2 = eta^4 (1 - V(2 eta^3 alpha)) with V(d) = sum c_n d^n,
// so the half-turn matching phi(0; alpha, eta) = phi(0; -alpha, eta~) has the
// scaling solution eta~ = eta g(beta), beta = eta^3 alpha, where
//     g^4 (1 - V(-2 g^3 beta)) = 1 - V(2 beta).
// The second half-turn is the same equation at eta~, hence
//     eta~~ / eta = g(beta) g(beta g(beta)^3).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include "retmap/errors.hpp"
#include "retmap/series.hpp"
#include "retmap/v_series.hpp"

namespace retmap {

inline constexpr double kEtaMin = 0.5;
inline constexpr double kEtaMax = 1.5;
inline constexpr double kRadicandClamp = 1e-12;

inline double phi(double x, double alpha, double eta, const VSeries& vs) {
  if (!(eta >= kEtaMin && eta <= kEtaMax)) throw DomainError("phi: eta must lie in [1/2, 3/2]");
  if (!(x >= 0.0 && x <= eta)) throw DomainError("phi: x must lie in [0, eta]");
  const double delta = 2.0 * eta * eta * eta * alpha;
  if (x == eta) {
    detail::require_delta(vs, delta);
    return 0.0;
  }
  const double xi = std::sqrt(std::max(0.0, 1.0 - x / eta));
  const double v = eval_v(vs, std::min(xi, 1.0), delta);
  // eta^4 - x^4 - eta^3 (eta - x) v, factored to keep (eta - x) exact.
  const double radicand = (eta - x) * ((eta + x) * (eta * eta + x * x) - eta * eta * eta * v);
  if (radicand < -kRadicandClamp) {
    throw DomainError("phi: negative radicand " + std::to_string(radicand) + " (delta too large?)");
  }
  return radicand <= 0.0 ? 0.0 : std::sqrt(radicand);
}

// Branches (i)-(iv): the four quadrants of one rotation.
inline double quadrant_solution(int branch, double x, double alpha, double eta, const VSeries& vs) {
  switch (branch) {
    case 1:
      return phi(x, alpha, eta, vs);
    case 2:
      if (x > 0.0) throw DomainError("branch 2 needs x in [-eta, 0]");
      return phi(-x, -alpha, eta, vs);
    case 3:
      if (x > 0.0) throw DomainError("branch 3 needs x in [-eta, 0]");
      return -phi(-x, alpha, eta, vs);
    case 4:
      return -phi(x, -alpha, eta, vs);
    default:
      throw DomainError("quadrant branch must be 1, 2, 3 or 4");
  }
}

struct HalfTurnSeries {
  ScalarSeries g;  // eta~ = eta g(eta^3 alpha)

  double operator()(double eta, double alpha) const { return eta * evaluate(g, eta * eta * eta * alpha); }
};

struct ReturnMapSeries {
  ScalarSeries full_turn;        // eta~~ = eta F(eta^3 alpha)
  std::vector<double> x_coeffs;  // X~~ = sum_n x_coeffs[n] eps^{3n+1}, x_coeffs[0] = 1
  int order = 0;

  double operator()(double eta, double alpha) const {
    return eta * evaluate(full_turn, eta * eta * eta * alpha);
  }

  // eps + sum_{n=1}^{terms} X_n eps^{3n+1}.
  double x_partial_sum(double eps, int terms) const {
    if (terms > order) throw DomainError("x_partial_sum: more terms than computed");
    const double e3 = eps * eps * eps;
    double acc = 0.0;
    for (int n = terms; n >= 0; --n) acc = acc * e3 + x_coeffs[static_cast<std::size_t>(n)];
    return acc * eps;
  }
};

// Residual of the half-turn matching equation for a trial g; order = g.order().
inline ScalarSeries half_turn_residual(std::span<const double> c, const ScalarSeries& g) {
  const int n = g.order();
  if (static_cast<int>(c.size()) < n) throw DomainError("half-turn residual needs c_1..c_N");
  std::vector<double> v_coeffs(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> rhs(static_cast<std::size_t>(n) + 1, 0.0);
  rhs[0] = 1.0;
  for (int k = 1; k <= n; ++k) {
    v_coeffs[static_cast<std::size_t>(k)] = c[static_cast<std::size_t>(k - 1)];
    rhs[static_cast<std::size_t>(k)] = -c[static_cast<std::size_t>(k - 1)] * std::ldexp(1.0, k);
  }
  const ScalarSeries v_series(std::move(v_coeffs), "delta");
  const ScalarSeries beta = identity_series(n);
  const ScalarSeries g2 = g * g;
  const ScalarSeries g3 = g2 * g;
  const ScalarSeries g4 = g2 * g2;
  const ScalarSeries inner = -2.0 * (beta * g3);
  const ScalarSeries one = ScalarSeries::constant(1.0, n);
  const ScalarSeries lhs = g4 * (one - series_compose(v_series, inner));
  return lhs - ScalarSeries(std::move(rhs));
}

inline HalfTurnSeries half_turn_series(std::span<const double> c, int order) {
  if (order < 1) throw DomainError("half_turn_series: order must be at least 1");
  if (static_cast<int>(c.size()) < order) throw DomainError("half_turn_series: order exceeds available c_n");
  auto residual = [c](const ScalarSeries& g) { return half_turn_residual(c, g); };
  return HalfTurnSeries{series_solve_implicit(residual, order)};
}

inline HalfTurnSeries half_turn_series(const VSeries& vs, int order) {
  if (order > vs.order) throw DomainError("half_turn_series: order exceeds the v-series order");
  return half_turn_series(std::span<const double>(vs.c), order);
}

inline ReturnMapSeries full_turn_series(const HalfTurnSeries& half, int order) {
  if (order < 1 || order > half.g.order()) throw DomainError("full_turn_series: order out of range");
  const ScalarSeries g = half.g.truncated(order);
  const ScalarSeries beta = identity_series(order);
  const ScalarSeries inner = beta * (g * g * g);
  ReturnMapSeries out{g * series_compose(g, inner), {}, order};
  // eta = 1, alpha = sqrt(2) eps^3: X_n = F_n 2^{n/2}.
  for (int n = 0; n <= order; ++n) out.x_coeffs.push_back(out.full_turn[n] * std::pow(2.0, 0.5 * n));
  return out;
}

// Solves phi(0; -alpha, e) = phi(0; alpha, eta) for e directly, i.e.
//     e^4 (1 - v(1; -2 e^3 alpha)) = eta^4 (1 - v(1; 2 eta^3 alpha)),
// with v(1; .) the partial sum of the v-series. The second half-turn is
// match_eta(match_eta(eta, alpha), alpha).
inline double match_eta(double eta, double alpha, const VSeries& vs) {
  if (!(eta >= kEtaMin && eta <= kEtaMax)) throw DomainError("match_eta: eta must lie in [1/2, 3/2]");
  const double target = eta * eta * eta * eta * (1.0 - eval_v(vs, 1.0, 2.0 * eta * eta * eta * alpha));
  auto mismatch = [&](double e) {
    const double e3 = e * e * e;
    return e3 * e * (1.0 - eval_v(vs, 1.0, -2.0 * e3 * alpha)) - target;
  };
  const HalfTurnSeries guess = half_turn_series(vs, std::min(vs.order, 3));
  const double center = guess(eta, alpha);
  for (double width = 1e-3; width < 0.5; width *= 4.0) {
    const double lo = std::max(kEtaMin * 0.5, center - width);
    const double hi = center + width;
    double flo = 0.0;
    double fhi = 0.0;
    try {
      flo = mismatch(lo);
      fhi = mismatch(hi);
    } catch (const DomainError&) {
      break;
    }
    if ((flo < 0.0) == (fhi < 0.0)) continue;
    std::uintmax_t iters = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(mismatch, lo, hi, flo, fhi,
                                                         boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (a + b);
  }
  throw DegenerateImplicit("match_eta: no bracketing root of the matching equation");
}

// (eta~~ / eta)^4 as a series in beta: the return map in the energy
// coordinate T = eta^4 is T -> T F(beta)^4.
inline ScalarSeries energy_return_series(const ReturnMapSeries& rm) {
  const ScalarSeries f2 = rm.full_turn * rm.full_turn;
  return f2 * f2;
}

// M(T) = 8 c_1 T^{7/4}.
inline double melnikov(double T, double c1) {
  if (!(T > 0.0)) throw DomainError("melnikov: T must be positive");
  return 8.0 * c1 * std::pow(T, 1.75);
}

// M(T) = 4 \int_0^{T^{1/4}} (T - x^4)^{3/2} dx by tanh-sinh quadrature; the
// rule's own error estimate goes to *error when given.
inline double melnikov_quadrature(double T, double* error = nullptr) {
  if (!(T > 0.0)) throw DomainError("melnikov_quadrature: T must be positive");
  const double top = std::pow(T, 0.25);
  boost::math::quadrature::tanh_sinh<double> rule;
  auto integrand = [T](double x) {
    const double r = T - x * x * x * x;
    return r > 0.0 ? r * std::sqrt(r) : 0.0;
  };
  double est = 0.0;
  const double tol = 1e-14;
  const double value = 4.0 * rule.integrate(integrand, 0.0, top, tol, &est);
  // floor at one ulp; tanh-sinh can report exactly zero once levels agree
  if (error != nullptr) *error = std::max(4.0 * est, std::numeric_limits<double>::epsilon() * value);
  return value;
}

}  // namespace retmap

#endif  // RETMAP_RETURN_MAP_HPP_
