#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace nldeco {

// Compact rendering of a double for messages (std::to_string prints 1e-9 as 0.000000).
inline std::string show(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.3g", value);
  return buffer;
}

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument or configuration violates a model invariant (bad index, d <= -0.5, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not deliver a result within its budget.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double achieved_estimate)
      : Error(what), achieved_estimate_(achieved_estimate) {}

  double achieved_estimate() const noexcept { return achieved_estimate_; }

 private:
  double achieved_estimate_;
};

/// The requested kernel integral does not exist for this spectral density.
class DivergentKernelError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A truncated Fock-space computation exceeded its truncation budget.
class TruncationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace nldeco
