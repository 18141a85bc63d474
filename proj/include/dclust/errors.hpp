#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dclust {

// Base of every error the library raises. kind() is the stable,
// machine-readable name the CLI reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual std::string_view kind() const noexcept = 0;
};

class ConfigError : public Error {
 public:
  using Error::Error;
  std::string_view kind() const noexcept override { return "ConfigError"; }
};

// Structurally unusable input (length mismatch, nonpositive dt, ...).
class MalformedConfig : public ConfigError {
 public:
  using ConfigError::ConfigError;
  std::string_view kind() const noexcept override { return "MalformedConfig"; }
};

// Well-formed input that fails one of the checkable model assumptions.
class AssumptionViolation : public ConfigError {
 public:
  using ConfigError::ConfigError;
  std::string_view kind() const noexcept override { return "AssumptionViolation"; }
};

// Input outside what a particular solver supports (e.g. non-affine drift
// handed to the moment solver).
class UnsupportedConfig : public ConfigError {
 public:
  using ConfigError::ConfigError;
  std::string_view kind() const noexcept override { return "UnsupportedConfig"; }
};

class NumericalBlowup : public Error {
 public:
  using Error::Error;
  std::string_view kind() const noexcept override { return "NumericalBlowup"; }
};

class NonConvergence : public Error {
 public:
  using Error::Error;
  std::string_view kind() const noexcept override { return "NonConvergence"; }
};

class RankOutOfRange : public Error {
 public:
  using Error::Error;
  std::string_view kind() const noexcept override { return "RankOutOfRange"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  std::string_view kind() const noexcept override { return "IoError"; }
};

}  // namespace dclust
