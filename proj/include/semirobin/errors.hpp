#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace semirobin {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument or violated precondition at the API boundary.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A problem datum violates one of the structural hypotheses, e.g. "H(beta)".
class HypothesisError : public Error {
 public:
  HypothesisError(std::string hypothesis, const std::string& what)
      : Error(hypothesis + ": " + what), hypothesis_(std::move(hypothesis)) {}

  const std::string& hypothesis() const noexcept { return hypothesis_; }

 private:
  std::string hypothesis_;
};

/// An iterative method stopped without meeting its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double attained)
      : Error(what), attained_(attained) {}

  /// Residual or gradient norm reached before giving up.
  double attained() const noexcept { return attained_; }

 private:
  double attained_;
};

/// Configuration text could not be parsed or failed schema validation.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0, std::string key = {})
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line),
        key_(std::move(key)) {}

  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  int line_;
  std::string key_;
};

}  // namespace semirobin
