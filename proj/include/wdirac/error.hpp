#pragma once

#include <stdexcept>
#include <string>

namespace wdirac {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid geometry, resolution, exponent or experiment parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Fields, weights or operators that live on different grids or fiber sizes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A weight that is not Hermitian positive definite where one is required.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Factorization failure or numerical rank deficiency.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Requested index, cluster or sample outside what is available.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A theorem hypothesis (kernel-freeness, Loewner order) does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Kernel/gap structure that cannot be resolved at the current resolution.
class DiagnosticError : public Error {
 public:
  using Error::Error;
};

/// Dual Rayleigh quotient evaluated on (numerically) harmonic spinor.
class NearKernelError : public Error {
 public:
  using Error::Error;
};

/// k_max beyond the reliable part of the discrete spectrum.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& what, int reliable_k_max)
      : Error(what), reliable_k_max_(reliable_k_max) {}

  int reliable_k_max() const noexcept { return reliable_k_max_; }

 private:
  int reliable_k_max_;
};

}  // namespace wdirac
