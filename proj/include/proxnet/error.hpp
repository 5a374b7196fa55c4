#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace proxnet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised when an intersection of constraint sets is detected to be empty.
class InfeasibleSetError : public Error {
 public:
  using Error::Error;
};

/// An iterative method hit its iteration cap; carries the best iterate seen.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, std::vector<double> best, double residual)
      : Error(what), best_(std::move(best)), residual_(residual) {}
  const std::vector<double>& best_iterate() const { return best_; }
  double residual() const { return residual_; }

 private:
  std::vector<double> best_;
  double residual_;
};

/// A local solve failed inside the distributed driver.
class AgentSolveError : public Error {
 public:
  AgentSolveError(std::size_t agent, std::size_t iteration, const std::string& cause)
      : Error("agent " + std::to_string(agent) + " at iteration " + std::to_string(iteration) +
              ": " + cause),
        agent_(agent),
        iteration_(iteration) {}
  std::size_t agent() const { return agent_; }
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t agent_;
  std::size_t iteration_;
};

/// Problem/network/step validation failed and no override was given.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, std::vector<std::string> issues)
      : Error(what), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// Malformed configuration document.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace proxnet
