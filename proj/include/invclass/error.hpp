#pragma once

#include <stdexcept>
#include <string>

namespace invclass {

// Base of everything the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files or streams.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Inconsistent shapes, non-finite entries, out-of-range indices.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// No acceptable step found by a line search.
class LineSearchFailure : public Error {
 public:
  using Error::Error;
};

// A quantity that is positive in exact arithmetic came out non-positive.
class NumericalBreakdown : public Error {
 public:
  using Error::Error;
};

// The constrained formulation has no solution in the searched bracket.
class Infeasible : public Error {
 public:
  using Error::Error;
};

// g_k(x*(lambda)) was observed to decrease while lambda increased.
class MonotonicityViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace invclass
