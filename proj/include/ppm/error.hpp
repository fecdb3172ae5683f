#pragma once

#include <stdexcept>
#include <string>

namespace ppm {

// Input outside an operation's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A bracketed root search found no sign change or could not grow its bracket.
class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Pricing synthesis could not complete.
class SynthesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed instance, trace file, or configuration.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exact enumeration would exceed its search budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ppm
