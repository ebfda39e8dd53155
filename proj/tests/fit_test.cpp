#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "retmap/fit.hpp"

namespace retmap {
namespace {

TEST(PowerLaw, ExactData) {
  std::vector<double> x;
  std::vector<double> y;
  for (int i = 0; i < 10; ++i) {
    x.push_back(std::pow(10.0, -1.0 - 0.3 * i));
    y.push_back(0.16 * std::pow(x.back(), 2.5));
  }
  const auto fit = fit_power_law(x, y);
  EXPECT_NEAR(fit.exponent, 2.5, 1e-12);
  EXPECT_NEAR(fit.prefactor, 0.16, 1e-12);
  EXPECT_LT(fit.exponent_stderr, 1e-10);
}

TEST(PowerLaw, NegativeValuesUseMagnitude) {
  const std::vector<double> x{1.0, 2.0, 4.0};
  const std::vector<double> y{-3.0, -12.0, -48.0};
  const auto fit = fit_power_law(x, y);
  EXPECT_NEAR(fit.exponent, 2.0, 1e-14);
  EXPECT_NEAR(fit.prefactor, 3.0, 1e-13);
}

TEST(PowerLaw, RejectsBadInput) {
  const std::vector<double> one{1.0};
  EXPECT_THROW(fit_power_law(one, one), DomainError);
  const std::vector<double> x{1.0, -1.0};
  const std::vector<double> y{1.0, 1.0};
  EXPECT_THROW(fit_power_law(x, y), DomainError);
  const std::vector<double> same{2.0, 2.0};
  EXPECT_THROW(fit_power_law(same, y), DomainError);
}

}  // namespace
}  // namespace retmap
