#pragma once

#include <stdexcept>
#include <string>

namespace sontag {

// Base for every failure raised by the library. Precondition violations
// (wrong dimensions, invalid parameters) use std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class NotSymmetric : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class NotStabilizable : public Error {
 public:
  using Error::Error;
};

class BadWeights : public Error {
 public:
  using Error::Error;
};

class DomainViolation : public Error {
 public:
  using Error::Error;
};

class NonFiniteJacobian : public Error {
 public:
  using Error::Error;
};

class NonFiniteValue : public Error {
 public:
  using Error::Error;
};

class NonPositiveLambda : public Error {
 public:
  using Error::Error;
};

}  // namespace sontag
