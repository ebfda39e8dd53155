#ifndef RETMAP_SERIES_HPP_
#define RETMAP_SERIES_HPP_

// Truncated power series in one small parameter over an abstract
// coefficient space. The same engine handles scalar series (the half-turn
// and full-turn maps) and series whose coefficients are grid functions (the
// expansion of (p - v)^{3/2} in powers of delta).

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "retmap/errors.hpp"

namespace retmap {

// Specialize for each coefficient type. Required members:
//   add(a, b), scale(s, a), mul(a, b), zero_like(a), one_like(a), norm(a),
//   compatible(a, b).
// zero_like/one_like take a prototype because some spaces (grid functions)
// carry a domain that the identity elements must share.
template <class C>
struct CoefficientOps;

template <>
struct CoefficientOps<double> {
  static double add(double a, double b) { return a + b; }
  static double scale(double s, double a) { return s * a; }
  static double mul(double a, double b) { return a * b; }
  static double zero_like(double) { return 0.0; }
  static double one_like(double) { return 1.0; }
  static double norm(double a) { return std::abs(a); }
  static bool compatible(double, double) { return true; }
};

template <class C>
concept CoefficientSpace = requires(const C& a, const C& b, double s) {
  { CoefficientOps<C>::add(a, b) } -> std::convertible_to<C>;
  { CoefficientOps<C>::scale(s, a) } -> std::convertible_to<C>;
  { CoefficientOps<C>::mul(a, b) } -> std::convertible_to<C>;
  { CoefficientOps<C>::zero_like(a) } -> std::convertible_to<C>;
  { CoefficientOps<C>::one_like(a) } -> std::convertible_to<C>;
  { CoefficientOps<C>::norm(a) } -> std::convertible_to<double>;
  { CoefficientOps<C>::compatible(a, b) } -> std::convertible_to<bool>;
};

struct Rational {
  long num = 0;
  long den = 1;

  double value() const {
    if (den == 0) throw DomainError("rational exponent with zero denominator");
    return static_cast<double>(num) / static_cast<double>(den);
  }
};

template <CoefficientSpace C>
class TruncatedSeries {
 public:
  using Ops = CoefficientOps<C>;

  explicit TruncatedSeries(std::vector<C> coeffs, std::string parameter = "beta")
      : coeffs_(std::move(coeffs)), parameter_(std::move(parameter)) {
    if (coeffs_.empty()) throw DomainError("a truncated series needs at least one coefficient");
  }

  // c + 0*t + ... through the given order.
  static TruncatedSeries constant(const C& c, int order, std::string parameter = "beta") {
    std::vector<C> coeffs(static_cast<std::size_t>(order) + 1, Ops::zero_like(c));
    coeffs[0] = c;
    return TruncatedSeries(std::move(coeffs), std::move(parameter));
  }

  int order() const { return static_cast<int>(coeffs_.size()) - 1; }
  const C& operator[](int n) const { return coeffs_.at(static_cast<std::size_t>(n)); }
  C& operator[](int n) { return coeffs_.at(static_cast<std::size_t>(n)); }
  const std::vector<C>& coeffs() const { return coeffs_; }
  const std::string& parameter() const { return parameter_; }

  TruncatedSeries truncated(int order) const {
    if (order < 0 || order > this->order()) throw DomainError("truncation order out of range");
    return TruncatedSeries(std::vector<C>(coeffs_.begin(), coeffs_.begin() + order + 1), parameter_);
  }

 private:
  std::vector<C> coeffs_;
  std::string parameter_;
};

using ScalarSeries = TruncatedSeries<double>;

namespace detail {

template <CoefficientSpace C>
void require_compatible(const TruncatedSeries<C>& a, const TruncatedSeries<C>& b) {
  if (!CoefficientOps<C>::compatible(a[0], b[0])) {
    throw SpaceMismatch("series coefficients live in different spaces");
  }
}

}  // namespace detail

template <CoefficientSpace C>
TruncatedSeries<C> series_add(const TruncatedSeries<C>& a, const TruncatedSeries<C>& b) {
  using Ops = CoefficientOps<C>;
  detail::require_compatible(a, b);
  const int n = std::min(a.order(), b.order());
  std::vector<C> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) out.push_back(Ops::add(a[k], b[k]));
  return TruncatedSeries<C>(std::move(out), a.parameter());
}

template <CoefficientSpace C>
TruncatedSeries<C> series_scale(double s, const TruncatedSeries<C>& a) {
  std::vector<C> out;
  out.reserve(a.coeffs().size());
  for (const C& c : a.coeffs()) out.push_back(CoefficientOps<C>::scale(s, c));
  return TruncatedSeries<C>(std::move(out), a.parameter());
}

template <CoefficientSpace C>
TruncatedSeries<C> series_sub(const TruncatedSeries<C>& a, const TruncatedSeries<C>& b) {
  return series_add(a, series_scale(-1.0, b));
}

// Cauchy product truncated at the smaller order.
template <CoefficientSpace C>
TruncatedSeries<C> series_mul(const TruncatedSeries<C>& a, const TruncatedSeries<C>& b) {
  using Ops = CoefficientOps<C>;
  detail::require_compatible(a, b);
  const int n = std::min(a.order(), b.order());
  std::vector<C> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    C acc = Ops::mul(a[0], b[k]);
    for (int j = 1; j <= k; ++j) acc = Ops::add(acc, Ops::mul(a[j], b[k - j]));
    out.push_back(std::move(acc));
  }
  return TruncatedSeries<C>(std::move(out), a.parameter());
}

template <CoefficientSpace C>
TruncatedSeries<C> operator+(const TruncatedSeries<C>& a, const TruncatedSeries<C>& b) {
  return series_add(a, b);
}
template <CoefficientSpace C>
TruncatedSeries<C> operator-(const TruncatedSeries<C>& a, const TruncatedSeries<C>& b) {
  return series_sub(a, b);
}
template <CoefficientSpace C>
TruncatedSeries<C> operator*(const TruncatedSeries<C>& a, const TruncatedSeries<C>& b) {
  return series_mul(a, b);
}
template <CoefficientSpace C>
TruncatedSeries<C> operator*(double s, const TruncatedSeries<C>& a) {
  return series_scale(s, a);
}

// a^e for a series with unit constant term, using
//   n h_n = sum_{k=1}^{n} (k (e + 1) - n) a_k h_{n-k},   h_0 = 1.
// With grid-function coefficients the recurrence runs node by node.
template <CoefficientSpace C>
TruncatedSeries<C> series_pow_frac(const TruncatedSeries<C>& a, Rational exponent,
                                   double unit_tol = 1e-12) {
  using Ops = CoefficientOps<C>;
  const double e = exponent.value();
  const C one = Ops::one_like(a[0]);
  if (Ops::norm(Ops::add(a[0], Ops::scale(-1.0, one))) > unit_tol) {
    throw DomainError("series_pow_frac: constant term must be 1 (normalize first)");
  }
  std::vector<C> h;
  h.reserve(a.coeffs().size());
  h.push_back(one);
  for (int n = 1; n <= a.order(); ++n) {
    C acc = Ops::zero_like(one);
    for (int k = 1; k <= n; ++k) {
      const double weight = static_cast<double>(k) * (e + 1.0) - static_cast<double>(n);
      if (weight == 0.0) continue;
      acc = Ops::add(acc, Ops::scale(weight, Ops::mul(a[k], h[static_cast<std::size_t>(n - k)])));
    }
    h.push_back(Ops::scale(1.0 / static_cast<double>(n), acc));
  }
  return TruncatedSeries<C>(std::move(h), a.parameter());
}

// outer(inner(t)) by Horner's scheme in the series ring.
template <CoefficientSpace C>
TruncatedSeries<C> series_compose(const TruncatedSeries<C>& outer, const TruncatedSeries<C>& inner) {
  using Ops = CoefficientOps<C>;
  detail::require_compatible(outer, inner);
  if (Ops::norm(inner[0]) != 0.0) {
    throw DomainError("series_compose: inner series must have zero constant term");
  }
  const int n = std::min(outer.order(), inner.order());
  const TruncatedSeries<C> in = inner.truncated(n);
  auto result = TruncatedSeries<C>::constant(outer[n], n, inner.parameter());
  for (int k = n - 1; k >= 0; --k) {
    result = series_mul(result, in);
    result[0] = Ops::add(result[0], outer[k]);
  }
  return result;
}

template <class F>
concept ScalarResidual = requires(F f, const ScalarSeries& g) {
  { f(g) } -> std::convertible_to<ScalarSeries>;
};

struct ImplicitSolveOptions {
  double leading = 1.0;          // known order-0 solution g_0
  double linearization_tol = 1e-12;
};

// Solves residual(g) = O(t^{N+1}) for g = g_0 + g_1 t + ... + g_N t^N.
// The order-n residual coefficient is affine in g_n once g_0..g_{n-1} are
// fixed, so each order costs two residual evaluations and one division.
template <ScalarResidual F>
ScalarSeries series_solve_implicit(F&& residual, int order, ImplicitSolveOptions opts = {}) {
  if (order < 0) throw DomainError("series_solve_implicit: negative order");
  std::vector<double> g(static_cast<std::size_t>(order) + 1, 0.0);
  g[0] = opts.leading;
  for (int n = 1; n <= order; ++n) {
    std::vector<double> trial(g.begin(), g.begin() + n + 1);
    trial[static_cast<std::size_t>(n)] = 0.0;
    const ScalarSeries r0 = residual(ScalarSeries(trial));
    trial[static_cast<std::size_t>(n)] = 1.0;
    const ScalarSeries r1 = residual(ScalarSeries(trial));
    if (r0.order() < n || r1.order() < n) {
      throw DomainError("series_solve_implicit: residual returned too few orders");
    }
    const double lin = r1[n] - r0[n];
    if (std::abs(lin) < opts.linearization_tol) {
      throw DegenerateImplicit("series_solve_implicit: linearization vanishes at order " +
                               std::to_string(n));
    }
    g[static_cast<std::size_t>(n)] = -r0[n] / lin;
  }
  return ScalarSeries(std::move(g));
}

inline double evaluate(const ScalarSeries& s, double t) {
  double acc = 0.0;
  for (int k = s.order(); k >= 0; --k) acc = acc * t + s[k];
  return acc;
}

// t itself as a series of the given order.
inline ScalarSeries identity_series(int order, std::string parameter = "beta") {
  std::vector<double> c(static_cast<std::size_t>(order) + 1, 0.0);
  if (order >= 1) c[1] = 1.0;
  return ScalarSeries(std::move(c), std::move(parameter));
}

}  // namespace retmap

#endif  // RETMAP_SERIES_HPP_
