#pragma once

#include <stdexcept>
#include <string>

namespace menos {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operator expected Hermitian (or symmetric) but asymmetry exceeds tolerance.
class SymmetryError : public Error {
 public:
  using Error::Error;
};

// Parameter point outside the declared domain of a model.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Fisher matrix singular or too ill-conditioned to invert.
class SingularFisherError : public Error {
 public:
  SingularFisherError(const std::string& what, double condition_number)
      : Error(what), condition_number_(condition_number) {}
  double condition_number() const noexcept { return condition_number_; }

 private:
  double condition_number_;
};

// An outcome with vanishing probability but non-vanishing derivative.
class SingularScoreError : public Error {
 public:
  using Error::Error;
};

// Noise POVM carries weight on outcomes the target POVM cannot account for.
class OutcomeMismatchError : public Error {
 public:
  using Error::Error;
};

// Mismatched dimensions, wrong parameter count, etc.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Sweep / CLI specification that cannot be run as given.
class SpecError : public Error {
 public:
  using Error::Error;
};

// A built-in object could not be constructed (truncation leakage, bad POVM).
class ConstructionError : public Error {
 public:
  using Error::Error;
};

}  // namespace menos
