#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace agestruct {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration or expression text.
class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& what)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column),
        message_(what) {}

  int line() const { return line_; }
  int column() const { return column_; }
  /// The message without the position prefix.
  const std::string& message() const { return message_; }

 private:
  int line_;
  int column_;
  std::string message_;
};

/// A structural or sign condition on the model or an assembled operator failed.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// An iterative method ran out of iterations or diverged.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Caller passed arguments outside the documented domain.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace agestruct
