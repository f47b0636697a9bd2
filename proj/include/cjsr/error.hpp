#pragma once

#include <stdexcept>
#include <string>

namespace cjsr {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates a documented precondition or type invariant.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical routine failed (non-convergence, loss of definiteness).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Certification requested with fewer samples than the decision-variable count.
class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

/// The sampled program stayed infeasible up to the growth-rate cap.
class UnboundedGrowth : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent system/experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}

}  // namespace detail
}  // namespace cjsr
