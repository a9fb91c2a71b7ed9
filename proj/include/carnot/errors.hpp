#pragma once

#include <stdexcept>
#include <string>

namespace carnot {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Points or polynomials built over different groups were combined.
class DescriptorMismatch : public Error {
 public:
  using Error::Error;
};

/// A descriptor failed validation and was used where a valid one is required.
class InvalidDescriptor : public Error {
 public:
  using Error::Error;
};

/// Operation requires a polynomial of h-degree <= 2.
class DegreeError : public Error {
 public:
  using Error::Error;
};

/// A sample point or segment left the domain of the field.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Sampling produced no admissible points.
class SamplingError : public Error {
 public:
  using Error::Error;
};

/// The function is not h-differentiable at the requested point
/// (its estimated subdifferential is not a singleton).
class NotDifferentiable : public Error {
 public:
  using Error::Error;
};

/// A one-dimensional restriction behaved non-convexly.
class ConvexityError : public Error {
 public:
  using Error::Error;
};

/// Least-squares design did not have full column rank.
class RankDeficient : public Error {
 public:
  using Error::Error;
};

/// Malformed input file or configuration.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace carnot
