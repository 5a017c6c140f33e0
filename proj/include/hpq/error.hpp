#pragma once

#include <stdexcept>
#include <string>

namespace hpq {

// Caller broke a precondition (bad shapes, mismatched formats, invalid spec).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input value outside the mathematical domain of an operation (e.g. NaN).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed file or stream contents.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An internal invariant did not hold. Always a bug.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace hpq
