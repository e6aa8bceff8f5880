#pragma once

#include <stdexcept>
#include <string>

namespace thermoscale {

// Base for every error raised by the library. Callers that only care about
// "something was wrong with my input" can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes do not line up (matmul inner dims, channel vs state dims, ...).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A value lies outside the domain of the model (negative x, eta > 0.5, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Input is not a valid quantum object (non-Hermitian, non-PSD, incomplete
// Kraus set, unnormalized vector).
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

// An iterative numerical routine did not converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Malformed external input (CSV, JSON config).
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace thermoscale
