#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bgeva {

// Base class for every error raised by the library. The CLI maps the
// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad or unusable input data (missing file, non-binary response, ...).
class DataError : public Error {
public:
  using Error::Error;
};

// Invalid configuration values or flags.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Linear predictor outside the GEV support 1 + tau*eta >= eps.
class DomainError : public Error {
public:
  DomainError(const std::string& what, std::vector<std::size_t> rows = {}, double eta = 0.0)
      : Error(what), rows_(std::move(rows)), eta_(eta) {}

  const std::vector<std::size_t>& rows() const noexcept { return rows_; }
  double eta() const noexcept { return eta_; }

private:
  std::vector<std::size_t> rows_;
  double eta_;
};

// Numerical failure in an estimation routine.
class NumericalError : public Error {
public:
  using Error::Error;
};

// Archive / report (de)serialization problems.
class FormatError : public Error {
public:
  using Error::Error;
};

}  // namespace bgeva
