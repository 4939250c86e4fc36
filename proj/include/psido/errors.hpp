#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace psido {

/// Raised when an argument violates a documented domain (dimensions,
/// exponents, grid sizes, malformed configuration).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an operation's mathematical precondition does not hold for
/// otherwise well-formed data (e.g. evaluating off the support of f).
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A symbol produced a non-finite value. Carries the offending point.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, std::vector<double> x, std::vector<double> xi)
      : std::runtime_error(what), x_(std::move(x)), xi_(std::move(xi)) {}

  const std::vector<double>& x() const noexcept { return x_; }
  const std::vector<double>& xi() const noexcept { return xi_; }

 private:
  std::vector<double> x_;
  std::vector<double> xi_;
};

/// The smoothness-budget inequality system has no solution; `binding()`
/// names the constraints that could not be met simultaneously.
class InfeasibleBudget : public std::runtime_error {
 public:
  InfeasibleBudget(const std::string& what, std::vector<std::string> binding)
      : std::runtime_error(what), binding_(std::move(binding)) {}

  const std::vector<std::string>& binding() const noexcept { return binding_; }

 private:
  std::vector<std::string> binding_;
};

class IoError : public std::runtime_error {
 public:
  IoError(const std::string& what, std::filesystem::path path)
      : std::runtime_error(what + ": " + path.string()), path_(std::move(path)) {}

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace psido
