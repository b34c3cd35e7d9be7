#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gridfault {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line and the offending field.
class ParseError : public Error {
 public:
  ParseError(std::string source, int line, std::string field, const std::string& what);

  const std::string& source() const noexcept { return source_; }
  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string source_;
  int line_;
  std::string field_;
};

/// Input that parsed but violates one or more invariants; all violations are listed.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations);

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Numerical failure during a computation (divergence, singular matrix, blow-up).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Rotor angles left the admissible band.
class InstabilityError : public NumericalError {
 public:
  InstabilityError(double time, int generator_bus, double angle);

  double time() const noexcept { return time_; }
  int generator_bus() const noexcept { return generator_bus_; }

 private:
  double time_;
  int generator_bus_;
};

}  // namespace gridfault
