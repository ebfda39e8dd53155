#ifndef RETMAP_ERRORS_HPP_
#define RETMAP_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace retmap {

// Bad arguments: violated preconditions, out-of-domain parameters.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Coefficient spaces of two series do not match (different grids, ...).
class SpaceMismatch : public DomainError {
 public:
  using DomainError::DomainError;
};

// A numerical procedure failed to reach its target.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NearSingular : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateImplicit : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class OutOfBall : public NumericalError {
 public:
  OutOfBall(const std::string& what, double sup_norm)
      : NumericalError(what), sup_norm_(sup_norm) {}
  double sup_norm() const noexcept { return sup_norm_; }

 private:
  double sup_norm_;
};

class NonConvergence : public NumericalError {
 public:
  NonConvergence(const std::string& what, double achieved)
      : NumericalError(what), achieved_(achieved) {}
  // Last step norm or achieved tolerance, depending on the thrower.
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

class IntegrationFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace retmap

#endif  // RETMAP_ERRORS_HPP_
