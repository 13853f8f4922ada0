#pragma once

#include <stdexcept>
#include <string>

namespace hgpdc {

/// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  ok = 0,
  failure = 1,
  config = 2,
  diverged = 3,
  calibration = 4,
  io = 5,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::failure; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::config; }
};

/// Integration produced non-finite or overflowing values.
class DivergedError : public Error {
 public:
  DivergedError(const std::string& what, double z_reached)
      : Error(what), z_reached_(z_reached) {}
  double z_reached() const noexcept { return z_reached_; }
  ExitCode exit_code() const noexcept override { return ExitCode::diverged; }

 private:
  double z_reached_;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::calibration; }
};

class IoError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::io; }
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class EmptySpectrumError : public NumericError {
 public:
  using NumericError::NumericError;
};

class DegenerateSpectrumError : public NumericError {
 public:
  using NumericError::NumericError;
};

class WidthExceedsGridError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace hgpdc
