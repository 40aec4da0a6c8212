#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace lineup {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (CSV rows, JSON specs, decimal literals, BQM files).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The constraint set admits no line-up. `label()` names the binding
/// constraint or position group.
class InfeasibleError : public Error {
 public:
  InfeasibleError(std::string label, const std::string& what)
      : Error(what), label_(std::move(label)) {}

  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
};

}  // namespace lineup
