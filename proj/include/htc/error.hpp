#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace htc {

/// Failure categories. The CLI maps each one onto a fixed exit status.
enum class ErrorKind {
  config,           // malformed input or spec that fails validation
  forward,          // singular step matrix or non-finite solution
  consistency,      // t = 0 compatibility conditions violated by the data
  degeneracy,       // measurement matrix below the nondegeneracy threshold
  non_contraction,  // fixed-point iteration failed on every admissible horizon
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what,
        std::optional<std::size_t> step = std::nullopt)
      : std::runtime_error(what), kind_(kind), step_(step) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Time index at which the failure was detected, when one applies.
  std::optional<std::size_t> step() const noexcept { return step_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> step_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class ForwardError : public Error {
 public:
  ForwardError(const std::string& what, std::size_t step)
      : Error(ErrorKind::forward, what, step) {}
};

class DegeneracyError : public Error {
 public:
  DegeneracyError(const std::string& what, std::size_t step, double det)
      : Error(ErrorKind::degeneracy, what, step), det_(det) {}
  double determinant() const noexcept { return det_; }

 private:
  double det_;
};

class NonContractionError : public Error {
 public:
  explicit NonContractionError(const std::string& what)
      : Error(ErrorKind::non_contraction, what) {}
};

class ConsistencyError : public Error {
 public:
  explicit ConsistencyError(const std::string& what)
      : Error(ErrorKind::consistency, what) {}
};

}  // namespace htc
