#pragma once

#include <stdexcept>
#include <string>

namespace dbp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class ModelError : public Error {
 public:
  using Error::Error;
};

/// Two spectral values that appear in a denominator are closer than epsDistinct.
class NearDegenerateSpectrumError : public Error {
 public:
  using Error::Error;
};

/// Matrix handed to the Perron solver is reducible.
class NotPositiveRegularError : public Error {
 public:
  using Error::Error;
};

class NotMMatrixError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver ran out of iterations. Carries the last residual.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, long iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}

  double residual() const { return residual_; }
  long iterations() const { return iterations_; }

 private:
  double residual_;
  long iterations_;
};

/// Every replication of an ensemble hit the event cap.
class DegenerateEnsembleError : public Error {
 public:
  using Error::Error;
};

}  // namespace dbp
