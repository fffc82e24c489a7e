#pragma once

#include <stdexcept>
#include <string>

namespace kpad {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind { io = 1, invalid = 2, convergence = 3 };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
  ErrorKind kind_;
};

class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

class InvalidArgument : public Error {
public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorKind::invalid, what) {}
};

class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, double residual)
      : Error(ErrorKind::convergence, what), residual_(residual) {}
  // Final KKT violation (SVM solvers) or gradient norm (logistic regression).
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

}  // namespace kpad
