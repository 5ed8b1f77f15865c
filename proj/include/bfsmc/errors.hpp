#pragma once

#include <stdexcept>
#include <string>

namespace bfsmc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// p + r*kappa <= 0: the last homogeneity weight is not positive.
class InfeasibleWeightsError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A feedback pair failed one of its defining checks.
class InvalidPairError : public Error {
 public:
  using Error::Error;
};

/// The requested gains do not produce a strict Lyapunov decrease.
class RejectedPairError : public InvalidPairError {
 public:
  using InvalidPairError::InvalidPairError;
};

class TuningError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Scenario parse failure; carries the offending section and line when known.
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& what, std::string section = {}, long line = -1)
      : ConfigError(what), section_(std::move(section)), line_(line) {}
  const std::string& section() const noexcept { return section_; }
  long line() const noexcept { return line_; }

 private:
  std::string section_;
  long line_;
};

/// The Lyapunov value reached the barrier (V >= bound * (1 - guard)).
class BarrierBlowup : public Error {
 public:
  BarrierBlowup(double bound, double value)
      : Error("barrier blow-up: V=" + std::to_string(value) +
              " reached bound " + std::to_string(bound)),
        bound_(bound),
        value_(value) {}
  double bound() const noexcept { return bound_; }
  double value() const noexcept { return value_; }

 private:
  double bound_;
  double value_;
};

}  // namespace bfsmc
