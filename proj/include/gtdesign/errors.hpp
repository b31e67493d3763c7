#pragma once

#include <stdexcept>
#include <string>

namespace gtdesign {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates a domain constraint (parameter ranges, bounds, design shape).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The response probability is numerically 0 or 1, so the information weight is infinite.
class DegenerateModel : public Error {
 public:
  using Error::Error;
};

/// The requested criterion is undefined because the target is not estimable.
class CriterionUndefined : public Error {
 public:
  using Error::Error;
};

class RootBracketError : public Error {
 public:
  using Error::Error;
};

/// More than one sign change was found where the root is unique.
class RootAmbiguityError : public Error {
 public:
  using Error::Error;
};

class InvalidSupport : public Error {
 public:
  using Error::Error;
};

class InfeasibleApportionment : public Error {
 public:
  using Error::Error;
};

/// Two support points collapse onto the same integer size after rounding.
class SizeCollision : public Error {
 public:
  using Error::Error;
};

class EfficiencyUndefined : public Error {
 public:
  using Error::Error;
};

/// File could not be read, written or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gtdesign
