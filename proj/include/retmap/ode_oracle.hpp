#ifndef RETMAP_ODE_ORACLE_HPP_
#define RETMAP_ODE_ORACLE_HPP_

// Direct integration of
//     X' = -Y,          Y' = X^3 - Y^3                  (original)
//     x' = -2y,         y' = 4x^3 - alpha y^3           (normalized, X = eps x)
// through one rotation, with axis crossings located on the dense output.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "retmap/dop853.hpp"
#include "retmap/errors.hpp"

namespace retmap {

enum class Axis { positive_x, negative_x, positive_y, negative_y };

inline const char* to_string(Axis axis) {
  switch (axis) {
    case Axis::positive_x:
      return "positive-x";
    case Axis::negative_x:
      return "negative-x";
    case Axis::positive_y:
      return "positive-y";
    case Axis::negative_y:
      return "negative-y";
  }
  return "?";
}

struct State {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
};

struct CrossingEvent {
  Axis axis;
  double value;     // |coordinate| on the crossed axis
  double time;
  int index;        // 1-based crossing count
  double residual;  // |other coordinate| at the refined time
};

struct Trajectory {
  double alpha = 0.0;
  std::vector<State> samples;  // start plus every accepted step
  std::vector<DenseStep<2>> steps;
  std::vector<CrossingEvent> events;
  IntegrationStats stats;

  const CrossingEvent& last_event() const { return events.back(); }

  State at(double t) const {
    auto it = std::lower_bound(steps.begin(), steps.end(), t,
                               [](const DenseStep<2>& s, double value) { return s.t_end() < value; });
    if (it == steps.end()) throw DomainError("Trajectory::at: time beyond the integrated range");
    const auto y = (*it)(t);
    return {y[0], y[1], t};
  }

  // y on the trajectory where it passes x inside the given quadrant (1..4,
  // counted along the rotation from the starting point).
  double y_at_x(int quadrant, double x) const;
};

struct OracleOptions {
  double tol = 1e-12;       // relative tolerance; absolute is tol / 100
  long max_steps = 2'000'000;
  int crossings = 4;
};

namespace detail {

inline double refine_root(const DenseStep<2>& step, int component, double target) {
  auto f = [&](double t) { return step(t)[static_cast<std::size_t>(component)] - target; };
  double lo = step.t_begin();
  double hi = step.t_end();
  const double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                                         boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (a + b);
}

inline void validate_tol(double tol) {
  if (!(tol >= 1e-13 && tol <= 1e-6)) throw DomainError("ODE tolerance must lie in [1e-13, 1e-6]");
}

inline int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace detail

// Integrates rhs from (x0, 0) until `opts.crossings` axis crossings occurred.
template <class Rhs>
Trajectory trace_rotation(Rhs&& rhs, double x0, double alpha, const OracleOptions& opts) {
  detail::validate_tol(opts.tol);
  if (x0 == 0.0 || !std::isfinite(x0)) throw DomainError("start at the equilibrium or non-finite start");
  Trajectory tr;
  tr.alpha = alpha;
  tr.samples.push_back({x0, 0.0, 0.0});
  Dop853Options dop;
  dop.rtol = opts.tol;
  dop.atol = opts.tol * 1e-2;
  dop.max_steps = opts.max_steps;
  // Signs of x and y last seen away from zero; y starts on the axis.
  int sx = detail::sign_of(x0);
  int sy = 0;
  auto observer = [&](const DenseStep<2>& step, double t, const StateVec<2>& y) {
    tr.steps.push_back(step);
    tr.samples.push_back({y[0], y[1], t});
    struct Hit {
      double time;
      int component;
      Axis axis;
    };
    std::vector<Hit> hits;
    const int nx = detail::sign_of(y[0]);
    const int ny = detail::sign_of(y[1]);
    if (sy == 0) {
      sy = ny;
    } else if (ny != 0 && ny != sy) {
      // y changes sign: an x-axis crossing.
      const double tc = detail::refine_root(step, 1, 0.0);
      hits.push_back({tc, 1, step(tc)[0] > 0.0 ? Axis::positive_x : Axis::negative_x});
      sy = ny;
    }
    if (nx != 0 && nx != sx) {
      const double tc = detail::refine_root(step, 0, 0.0);
      hits.push_back({tc, 0, step(tc)[1] > 0.0 ? Axis::positive_y : Axis::negative_y});
      sx = nx;
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.time < b.time; });
    for (const Hit& h : hits) {
      const auto s = step(h.time);
      const double value = std::abs(s[static_cast<std::size_t>(1 - h.component)]);
      const double residual = std::abs(s[static_cast<std::size_t>(h.component)]);
      tr.events.push_back({h.axis, value, h.time, static_cast<int>(tr.events.size()) + 1, residual});
    }
    return static_cast<int>(tr.events.size()) >= opts.crossings;
  };
  tr.stats = dop853_integrate<2>(std::forward<Rhs>(rhs), 0.0, StateVec<2>{x0, 0.0},
                                 std::numeric_limits<double>::max(), dop, observer);
  if (static_cast<int>(tr.events.size()) < opts.crossings) {
    throw IntegrationFailure("integration ended before the requested crossings");
  }
  tr.events.resize(static_cast<std::size_t>(opts.crossings));
  return tr;
}

inline auto normalized_rhs(double alpha) {
  return [alpha](double, const StateVec<2>& s) {
    const double x = s[0];
    const double y = s[1];
    return StateVec<2>{-2.0 * y, 4.0 * x * x * x - alpha * y * y * y};
  };
}

// The rotation of the normalized system started at (x0, 0); x0 may be
// negative (the point reflection of a positive start).
inline Trajectory integrate_normalized_from(double x0, double alpha, const OracleOptions& opts = {}) {
  return trace_rotation(normalized_rhs(alpha), x0, alpha, opts);
}

// Crossings positive-y, negative-x, negative-y, positive-x of the trajectory
// started at (eta, 0); the last value is the first return eta~~.
inline Trajectory integrate_normalized(double eta, double alpha, double tol = 1e-12, double delta_max = 0.4) {
  if (!(eta >= 0.5 && eta <= 1.5)) throw DomainError("integrate_normalized: eta must lie in [1/2, 3/2]");
  if (!(alpha >= 0.0)) throw DomainError("integrate_normalized: alpha must be non-negative");
  if (!(2.0 * eta * eta * eta * alpha < delta_max)) {
    throw DomainError("integrate_normalized: 2 eta^3 alpha outside the admissible range");
  }
  OracleOptions opts;
  opts.tol = tol;
  return integrate_normalized_from(eta, alpha, opts);
}

inline Trajectory trace_original(double epsilon, double tol = 1e-12) {
  if (!(epsilon > 0.0 && epsilon <= 0.5)) throw DomainError("integrate_original: epsilon must lie in (0, 0.5]");
  OracleOptions opts;
  opts.tol = tol;
  auto rhs = [](double, const StateVec<2>& s) {
    const double x = s[0];
    const double y = s[1];
    return StateVec<2>{-y, x * x * x - y * y * y};
  };
  return trace_rotation(rhs, epsilon, 0.0, opts);
}

// First return X~~ of the original system started at (epsilon, 0).
inline double integrate_original(double epsilon, double tol = 1e-12) {
  return trace_original(epsilon, tol).last_event().value;
}

struct LyapunovReport {
  double l_start = 0.0;
  double l_end = 0.0;
  double max_violation = 0.0;  // largest increase of L between consecutive accepted steps
  double max_drift = 0.0;      // largest |L - L_start|
  bool monotone = false;       // max_violation within the slack
  bool strictly_decreased = false;
};

// L = y^2 + x^4 along a normalized trajectory; dL/dtau = -2 alpha y^4.
inline LyapunovReport lyapunov_audit(const Trajectory& tr, double slack) {
  auto lyap = [](const State& s) { return s.y * s.y + s.x * s.x * s.x * s.x; };
  LyapunovReport r;
  if (tr.samples.empty()) return r;
  r.l_start = lyap(tr.samples.front());
  double prev = r.l_start;
  double end_time = tr.events.empty() ? tr.samples.back().t : tr.events.back().time;
  for (const State& s : tr.samples) {
    if (s.t > end_time) break;
    const double l = lyap(s);
    r.max_violation = std::max(r.max_violation, l - prev);
    r.max_drift = std::max(r.max_drift, std::abs(l - r.l_start));
    prev = l;
  }
  r.l_end = tr.events.empty() ? lyap(tr.samples.back()) : lyap(tr.at(end_time));
  r.max_drift = std::max(r.max_drift, std::abs(r.l_end - r.l_start));
  r.monotone = r.max_violation <= slack;
  r.strictly_decreased = r.l_end < r.l_start;
  return r;
}

inline double Trajectory::y_at_x(int quadrant, double x) const {
  if (quadrant < 1 || quadrant > 4 || static_cast<int>(events.size()) < quadrant) {
    throw DomainError("y_at_x: quadrant not covered by the trajectory");
  }
  const double t_lo = quadrant == 1 ? 0.0 : events[static_cast<std::size_t>(quadrant - 2)].time;
  const double t_hi = events[static_cast<std::size_t>(quadrant - 1)].time;
  for (const auto& step : steps) {
    if (step.t_end() < t_lo || step.t_begin() > t_hi) continue;
    const double a = std::max(step.t_begin(), t_lo);
    const double b = std::min(step.t_end(), t_hi);
    const double fa = step(a)[0] - x;
    const double fb = step(b)[0] - x;
    if (fa == 0.0) return step(a)[1];
    if (fb == 0.0) return step(b)[1];
    if ((fa < 0.0) == (fb < 0.0)) continue;
    auto f = [&](double t) { return step(t)[0] - x; };
    std::uintmax_t iters = 200;
    const auto [lo, hi] = boost::math::tools::toms748_solve(f, a, b, fa, fb,
                                                           boost::math::tools::eps_tolerance<double>(52), iters);
    return step(0.5 * (lo + hi))[1];
  }
  throw DomainError("y_at_x: x = " + std::to_string(x) + " not reached in quadrant " + std::to_string(quadrant));
}

}  // namespace retmap

#endif  // RETMAP_ODE_ORACLE_HPP_
