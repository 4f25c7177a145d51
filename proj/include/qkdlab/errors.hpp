#pragma once

#include <stdexcept>
#include <string>

namespace qkdlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside its documented domain, or a structural mismatch
// (unknown label, wrong dimension, non-Hermitian input).
class DomainError : public Error {
 public:
  using Error::Error;
};

// The requested attack cannot be realized by any set of Eve probes.
class InfeasibleError : public Error {
 public:
  InfeasibleError() : Error("infeasible attack parameters") {}
  explicit InfeasibleError(const std::string& detail)
      : Error("infeasible attack parameters: " + detail) {}
};

// No positive key rate exists for the requested point.
class NoKeyError : public Error {
 public:
  using Error::Error;
};

}  // namespace qkdlab
