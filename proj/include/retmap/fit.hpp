#ifndef RETMAP_FIT_HPP_
#define RETMAP_FIT_HPP_

#include <cmath>
#include <cstddef>
#include <span>

#include "retmap/errors.hpp"

namespace retmap {

struct PowerLawFit {
  double exponent = 0.0;        // slope of log y against log x
  double prefactor = 0.0;       // exp(intercept)
  double exponent_stderr = 0.0;
};

// Least-squares fit of log|y| = log(prefactor) + exponent * log(x).
inline PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_power_law: need matching samples (>= 2)");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || y[i] == 0.0) throw DomainError("fit_power_law: samples must be non-zero, x positive");
    const double lx = std::log(x[i]);
    const double ly = std::log(std::abs(y[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw DomainError("fit_power_law: abscissae must not all coincide");
  PowerLawFit fit;
  fit.exponent = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - fit.exponent * sx) / n;
  fit.prefactor = std::exp(intercept);
  if (x.size() > 2) {
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = std::log(std::abs(y[i])) - intercept - fit.exponent * std::log(x[i]);
      sse += r * r;
    }
    fit.exponent_stderr = std::sqrt(sse / (n - 2.0) * n / denom);
  }
  return fit;
}

}  // namespace retmap

#endif  // RETMAP_FIT_HPP_
