#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace turbo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree (e.g. matmul inner dimensions).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A parameter is outside its documented domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An iterative routine exhausted its budget without converging.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A computation produced NaN or Inf. Carries where it happened so that
/// heavy-tailed overflows can be reported rather than masked.
class NonFiniteError : public Error {
 public:
  NonFiniteError(std::string stage, std::size_t iteration)
      : Error("non-finite value in " + stage +
              (iteration > 0 ? " at iteration " + std::to_string(iteration) : std::string{})),
        stage_(std::move(stage)),
        iteration_(iteration) {}

  const std::string& stage() const noexcept { return stage_; }
  /// 1-based iteration index, 0 when not inside an iteration.
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::string stage_;
  std::size_t iteration_;
};

/// Malformed text input (schedule, config or matrix file).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace turbo
