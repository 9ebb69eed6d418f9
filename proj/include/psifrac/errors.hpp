#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace psifrac {

/// Base class for all errors thrown by this library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition or out-of-domain argument.
class input_error : public error {
 public:
  using error::error;
};

/// Lexical or syntax error in an expression or a config file.
/// `position` is a byte offset into the offending source text.
class parse_error : public error {
 public:
  parse_error(const std::string& what, std::size_t position)
      : error(what), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Runtime failure while evaluating an expression (division by zero,
/// ln/sqrt outside their domain, overflow).
class eval_error : public error {
 public:
  using error::error;
};

/// Operation that is well-defined mathematically but outside what this
/// library implements (e.g. differentiating abs, deep nested derivatives
/// of opaque callables).
class unsupported_error : public error {
 public:
  using error::error;
};

/// Degenerate boundary data: a vanishing boundary determinant.
class singular_error : public error {
 public:
  using error::error;
};

/// An iteration failed to reach its tolerance.  Carries the best value
/// obtained and, for solvers, the per-iteration progress history.
class convergence_error : public error {
 public:
  convergence_error(const std::string& what, double best_value, double est_error,
                    std::vector<double> history = {})
      : error(what),
        best_value_(best_value),
        est_error_(est_error),
        history_(std::move(history)) {}

  double best_value() const noexcept { return best_value_; }
  double est_error() const noexcept { return est_error_; }
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  double best_value_;
  double est_error_;
  std::vector<double> history_;
};

}  // namespace psifrac
