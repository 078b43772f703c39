#pragma once

#include <stdexcept>
#include <string>

namespace fkc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of an operation (z = 0 for a kernel,
/// negative radius, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A standing assumption of the theory is violated. `condition()` names it:
/// "(1.1)" .. "(1.4)", "(A)", "d>alpha1", "lim V = inf".
class AssumptionError : public Error {
 public:
  AssumptionError(std::string condition, const std::string& what)
      : Error("assumption " + condition + " violated: " + what), condition_(std::move(condition)) {}
  const std::string& condition() const noexcept { return condition_; }

 private:
  std::string condition_;
};

/// The requested quantity is not defined for this family.
class NotAvailable : public Error {
 public:
  using Error::Error;
};

/// Iterative solver failed to converge.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Malformed scenario configuration.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace fkc
