#pragma once

#include <stdexcept>
#include <string>

namespace fbpr {

// Invalid arguments or configurations outside an operation's domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// No synthesis length within the search cap satisfies a length condition.
class InfeasibleConfiguration : public DomainError {
 public:
  using DomainError::DomainError;
};

// Malformed serialized input.
class FormatError : public DomainError {
 public:
  using DomainError::DomainError;
};

// A numerical factorization did not converge or saw non-finite data.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

}  // namespace detail
}  // namespace fbpr
