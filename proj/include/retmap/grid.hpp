#ifndef RETMAP_GRID_HPP_
#define RETMAP_GRID_HPP_

// Real functions on [0, 1] sampled on a fixed grid, and the weighted
// cumulative integral  g(xi) = xi^{-2} \int_0^xi t^4 f(t) dt  that drives the
// v_n recursion.
//
// The cumulative integral integrates, on each cell, the degree-5 Lagrange
// interpolant of t^4 f(t) through the six nearest nodes. For smooth f the
// global error is O(h^6). Off-node evaluation uses local cubic interpolation
// (error O(h^4)).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "retmap/errors.hpp"
#include "retmap/series.hpp"

namespace retmap {

enum class GridKind { uniform, chebyshev_lobatto };

inline const char* to_string(GridKind kind) {
  return kind == GridKind::uniform ? "uniform" : "chebyshev_lobatto";
}

namespace detail {

// Fornberg's finite-difference weights: w[d][j] is the weight of f(nodes[j])
// in the d-th derivative at z, for d = 0..max_derivative.
inline std::vector<std::vector<double>> fornberg_weights(double z, std::span<const double> nodes,
                                                         int max_derivative) {
  const int n = static_cast<int>(nodes.size()) - 1;
  const int m = max_derivative;
  std::vector<std::vector<double>> c(static_cast<std::size_t>(m) + 1,
                                     std::vector<double>(nodes.size(), 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[static_cast<std::size_t>(i)] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[static_cast<std::size_t>(i)] - nodes[static_cast<std::size_t>(j)];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        }
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

inline int stencil_start(int center, int width, int node_count) {
  return std::clamp(center, 0, node_count - width);
}

}  // namespace detail

class Grid {
 public:
  static constexpr int kMinIntervals = 64;
  static constexpr int kCumulativeWidth = 6;
  static constexpr int kInterpWidth = 4;
  static constexpr int kDerivWidth = 7;

  // M intervals, M + 1 nodes, endpoints exactly 0 and 1.
  static std::shared_ptr<const Grid> make(int intervals, GridKind kind = GridKind::uniform) {
    return std::shared_ptr<const Grid>(new Grid(intervals, kind));
  }

  int intervals() const { return intervals_; }
  std::size_t size() const { return nodes_.size(); }
  GridKind kind() const { return kind_; }
  std::span<const double> nodes() const { return nodes_; }
  double node(std::size_t i) const { return nodes_[i]; }

  // Same kind, twice as many intervals.
  std::shared_ptr<const Grid> refined() const { return make(2 * intervals_, kind_); }

  // Index i of the cell [x_i, x_{i+1}] containing xi (clamped to the domain).
  std::size_t locate(double xi) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), xi);
    const auto i = static_cast<std::ptrdiff_t>(it - nodes_.begin()) - 1;
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, intervals_ - 1));
  }

  struct Interpolant {
    int start;
    std::array<double, kInterpWidth> weights;
  };

  // Cubic Lagrange weights for evaluating any grid function at xi.
  Interpolant interpolation(double xi) const {
    if (!(xi >= 0.0 && xi <= 1.0)) throw DomainError("grid function evaluated outside [0, 1]");
    const std::size_t cell = locate(xi);
    Interpolant rule{};
    rule.start = detail::stencil_start(static_cast<int>(cell) - 1, kInterpWidth, static_cast<int>(size()));
    const std::span<const double> stencil(nodes_.data() + rule.start, kInterpWidth);
    const auto w = detail::fornberg_weights(xi, stencil, 0);
    std::copy(w[0].begin(), w[0].end(), rule.weights.begin());
    return rule;
  }

  struct CellRule {
    int start;
    std::array<double, kCumulativeWidth> weights;
  };
  const std::vector<CellRule>& cumulative_rules() const { return cell_rules_; }

  struct NodeRule {
    int start;
    std::array<double, kDerivWidth> weights;
  };
  const std::vector<NodeRule>& derivative_rules() const { return deriv_rules_; }

  bool same_nodes(const Grid& other) const {
    return this == &other || (kind_ == other.kind_ && intervals_ == other.intervals_);
  }

 private:
  Grid(int intervals, GridKind kind) : intervals_(intervals), kind_(kind) {
    if (intervals < kMinIntervals) {
      throw DomainError("grid needs at least " + std::to_string(kMinIntervals) + " intervals");
    }
    nodes_.resize(static_cast<std::size_t>(intervals) + 1);
    for (int i = 0; i <= intervals; ++i) {
      const double s = static_cast<double>(i) / intervals;
      nodes_[static_cast<std::size_t>(i)] =
          kind == GridKind::uniform ? s : 0.5 * (1.0 - std::cos(std::numbers::pi * s));
    }
    nodes_.front() = 0.0;
    nodes_.back() = 1.0;
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      if (!(nodes_[i] > nodes_[i - 1])) throw DomainError("grid nodes must be strictly increasing");
    }
    build_cell_rules();
    build_derivative_rules();
  }

  void build_cell_rules() {
    // 4-point Gauss-Legendre is exact for the degree-5 basis polynomials.
    static constexpr std::array<double, 4> gx{-0.8611363115940526, -0.3399810435848563,
                                              0.3399810435848563, 0.8611363115940526};
    static constexpr std::array<double, 4> gw{0.34785484513745385, 0.6521451548625462,
                                              0.6521451548625462, 0.34785484513745385};
    const int count = static_cast<int>(nodes_.size());
    cell_rules_.resize(static_cast<std::size_t>(intervals_));
    for (int i = 0; i < intervals_; ++i) {
      CellRule& rule = cell_rules_[static_cast<std::size_t>(i)];
      rule.start = detail::stencil_start(i - 2, kCumulativeWidth, count);
      rule.weights.fill(0.0);
      const std::span<const double> stencil(nodes_.data() + rule.start, kCumulativeWidth);
      const double a = nodes_[static_cast<std::size_t>(i)];
      const double b = nodes_[static_cast<std::size_t>(i) + 1];
      const double half = 0.5 * (b - a);
      const double mid = 0.5 * (a + b);
      for (std::size_t q = 0; q < gx.size(); ++q) {
        const auto w = detail::fornberg_weights(mid + half * gx[q], stencil, 0);
        for (int j = 0; j < kCumulativeWidth; ++j) rule.weights[static_cast<std::size_t>(j)] += half * gw[q] * w[0][j];
      }
    }
  }

  void build_derivative_rules() {
    const int count = static_cast<int>(nodes_.size());
    deriv_rules_.resize(nodes_.size());
    for (int i = 0; i < count; ++i) {
      NodeRule& rule = deriv_rules_[static_cast<std::size_t>(i)];
      rule.start = detail::stencil_start(i - kDerivWidth / 2, kDerivWidth, count);
      const std::span<const double> stencil(nodes_.data() + rule.start, kDerivWidth);
      const auto w = detail::fornberg_weights(nodes_[static_cast<std::size_t>(i)], stencil, 1);
      std::copy(w[1].begin(), w[1].end(), rule.weights.begin());
    }
  }

  int intervals_;
  GridKind kind_;
  std::vector<double> nodes_;
  std::vector<CellRule> cell_rules_;
  std::vector<NodeRule> deriv_rules_;
};

using GridPtr = std::shared_ptr<const Grid>;

class GridFunction {
 public:
  GridFunction(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw DomainError("grid function without a grid");
    if (values_.size() != grid_->size()) throw DomainError("grid function length does not match its grid");
    for (double v : values_) {
      if (!std::isfinite(v)) throw NumericalError("grid function has non-finite values");
    }
  }

  static GridFunction constant(GridPtr grid, double c) {
    const std::size_t n = grid->size();
    return GridFunction(std::move(grid), std::vector<double>(n, c));
  }

  template <class F>
  static GridFunction sample(GridPtr grid, F&& f) {
    std::vector<double> v(grid->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid->node(i));
    return GridFunction(std::move(grid), std::move(v));
  }

  const GridPtr& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double front() const { return values_.front(); }
  double back() const { return values_.back(); }

  double sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  // Local cubic interpolation; exact at nodes.
  double operator()(double xi) const { return apply(grid_->interpolation(xi)); }

  double apply(const Grid::Interpolant& rule) const {
    double acc = 0.0;
    for (int j = 0; j < Grid::kInterpWidth; ++j) {
      acc += rule.weights[static_cast<std::size_t>(j)] * values_[static_cast<std::size_t>(rule.start + j)];
    }
    return acc;
  }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

inline bool same_grid(const GridFunction& f, const GridFunction& g) {
  return f.grid()->same_nodes(*g.grid());
}

namespace detail {

inline void require_same_grid(const GridFunction& f, const GridFunction& g) {
  if (!same_grid(f, g)) throw SpaceMismatch("grid functions live on different grids");
}

template <class Op>
GridFunction zip(const GridFunction& f, const GridFunction& g, Op op) {
  require_same_grid(f, g);
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(f[i], g[i]);
  return GridFunction(f.grid(), std::move(out));
}

template <class Op>
GridFunction map(const GridFunction& f, Op op) {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(f[i]);
  return GridFunction(f.grid(), std::move(out));
}

}  // namespace detail

inline GridFunction operator+(const GridFunction& f, const GridFunction& g) {
  return detail::zip(f, g, [](double a, double b) { return a + b; });
}
inline GridFunction operator-(const GridFunction& f, const GridFunction& g) {
  return detail::zip(f, g, [](double a, double b) { return a - b; });
}
inline GridFunction operator*(const GridFunction& f, const GridFunction& g) {
  return detail::zip(f, g, [](double a, double b) { return a * b; });
}
inline GridFunction operator*(double s, const GridFunction& f) {
  return detail::map(f, [s](double a) { return s * a; });
}

// f / g, refusing divisors smaller than min_abs in magnitude.
inline GridFunction divide(const GridFunction& f, const GridFunction& g, double min_abs) {
  detail::require_same_grid(f, g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::abs(g[i]) < min_abs) {
      throw NearSingular("division by a grid function with |g| = " + std::to_string(std::abs(g[i])) +
                         " below " + std::to_string(min_abs) + " at xi = " + std::to_string(g.grid()->node(i)));
    }
  }
  return detail::zip(f, g, [](double a, double b) { return a / b; });
}

// f^e for a positive base.
inline GridFunction power(const GridFunction& f, double e) {
  return detail::map(f, [e](double a) {
    if (a <= 0.0) throw DomainError("power of a non-positive grid function");
    return std::pow(a, e);
  });
}

// 4 - 6t^2 + 4t^4 - t^6, so that t^2 p(t) = 1 - (1 - t^2)^4. Lies in [1, 4] on [0, 1].
inline double eval_p(double t) {
  const double s = t * t;
  return 4.0 + s * (-6.0 + s * (4.0 - s));
}

inline GridFunction p_function(const GridPtr& grid) { return GridFunction::sample(grid, eval_p); }

// g(xi_i) = xi_i^{-2} \int_0^{xi_i} t^4 f(t) dt, with g(0) = 0 stored directly.
inline GridFunction weighted_cumulative(const GridFunction& f) {
  const Grid& grid = *f.grid();
  const std::span<const double> x = grid.nodes();
  std::vector<double> integrand(f.size());
  for (std::size_t i = 0; i < integrand.size(); ++i) {
    const double t2 = x[i] * x[i];
    integrand[i] = t2 * t2 * f[i];
  }
  std::vector<double> out(f.size(), 0.0);
  double running = 0.0;
  const auto& rules = grid.cumulative_rules();
  for (std::size_t cell = 0; cell < rules.size(); ++cell) {
    const auto& rule = rules[cell];
    double piece = 0.0;
    for (int j = 0; j < Grid::kCumulativeWidth; ++j) {
      piece += rule.weights[static_cast<std::size_t>(j)] * integrand[static_cast<std::size_t>(rule.start + j)];
    }
    running += piece;
    out[cell + 1] = running / (x[cell + 1] * x[cell + 1]);
  }
  return GridFunction(f.grid(), std::move(out));
}

// d f / d xi at every node from a 7-point stencil.
inline GridFunction derivative(const GridFunction& f) {
  const auto& rules = f.grid()->derivative_rules();
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < Grid::kDerivWidth; ++j) {
      acc += rules[i].weights[static_cast<std::size_t>(j)] * f[static_cast<std::size_t>(rules[i].start + j)];
    }
    out[i] = acc;
  }
  return GridFunction(f.grid(), std::move(out));
}

struct QuadratureCheck {
  double value;          // W[p^{3/2}](1) on the given grid
  double refined_value;  // same on the grid with twice the intervals
  double difference;
  bool converged;
};

// Doubling test for the cumulative rule on the first-order integrand.
inline QuadratureCheck quadrature_self_check(const GridPtr& grid, double tol = 1e-10) {
  auto endpoint = [](const GridPtr& g) { return weighted_cumulative(power(p_function(g), 1.5)).back(); };
  const double a = endpoint(grid);
  const double b = endpoint(grid->refined());
  return {a, b, std::abs(a - b), std::abs(a - b) <= tol};
}

template <>
struct CoefficientOps<GridFunction> {
  static GridFunction add(const GridFunction& a, const GridFunction& b) { return a + b; }
  static GridFunction scale(double s, const GridFunction& a) { return s * a; }
  static GridFunction mul(const GridFunction& a, const GridFunction& b) { return a * b; }
  static GridFunction zero_like(const GridFunction& a) { return GridFunction::constant(a.grid(), 0.0); }
  static GridFunction one_like(const GridFunction& a) { return GridFunction::constant(a.grid(), 1.0); }
  static double norm(const GridFunction& a) { return a.sup_norm(); }
  static bool compatible(const GridFunction& a, const GridFunction& b) { return same_grid(a, b); }
};

using FunctionSeries = TruncatedSeries<GridFunction>;

}  // namespace retmap

#endif  // RETMAP_GRID_HPP_
