#pragma once

#include <stdexcept>
#include <string>

namespace maglab {

/// Malformed user input: bad words, out-of-range parameters, missing files.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Arguments outside the domain of a geometric operation (|z| >= 1, elliptic elements).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure failed to converge or left its valid region.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configured resource cap was exceeded.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace maglab
