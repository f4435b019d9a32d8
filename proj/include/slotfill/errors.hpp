#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace slotfill {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape disagreement between tensor operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A caller violated an operation's precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values detected in a forward or backward pass.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::string tensor = {})
      : Error(what), tensor_(std::move(tensor)) {}
  const std::string& tensor() const { return tensor_; }

 private:
  std::string tensor_;
};

/// Malformed input file; carries a 1-based line number (0 when unknown).
class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& msg)
      : Error(path + ":" + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// IOB validation failure; position is 1-based.
class ValidationError : public Error {
 public:
  ValidationError(std::size_t position, const std::string& msg)
      : Error("position " + std::to_string(position) + ": " + msg), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Checkpoint could not be read or does not fit the requested use.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace slotfill
