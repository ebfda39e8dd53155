#ifndef RETMAP_TESTS_ORACLES_HPP_
#define RETMAP_TESTS_ORACLES_HPP_

// Test-only reference values computed without the library's grid pipeline.

#include <cmath>
#include <random>
#include <vector>

namespace retmap::oracle {

// c_1 = (1/2) \int_0^1 (1 - s^4)^{3/2} ds = Gamma(1/4) Gamma(5/2) / (8 Gamma(11/4)).
inline double c1_beta() { return std::tgamma(0.25) * std::tgamma(2.5) / (8.0 * std::tgamma(2.75)); }

// Generalized binomial coefficient C(e, k).
inline double binomial(double e, int k) {
  double out = 1.0;
  for (int j = 0; j < k; ++j) out *= (e - j) / (j + 1);
  return out;
}

// Coefficients of (1 + a t)^e through t^order.
inline std::vector<double> binomial_series(double a, double e, int order) {
  std::vector<double> c;
  for (int k = 0; k <= order; ++k) c.push_back(binomial(e, k) * std::pow(a, k));
  return c;
}

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20261019);
  return gen;
}

inline std::vector<double> random_small_ints(int count, int lo, int hi) {
  std::uniform_int_distribution<int> d(lo, hi);
  std::vector<double> v;
  for (int i = 0; i < count; ++i) v.push_back(d(rng()));
  return v;
}

inline std::vector<double> random_uniform(int count, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v;
  for (int i = 0; i < count; ++i) v.push_back(d(rng()));
  return v;
}

}  // namespace retmap::oracle

#endif  // RETMAP_TESTS_ORACLES_HPP_
