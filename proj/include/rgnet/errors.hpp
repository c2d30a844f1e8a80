#pragma once

#include <stdexcept>
#include <string>

namespace rgnet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration value; key() names the offending setting when known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message, std::string key = {})
      : Error(message), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

enum class DataErrorKind {
  EmptyInput,
  DegenerateAnnotation,
  DanglingReference,
  DuplicateId,
  DegenerateProposal,
  Parse,
};

class DataError : public Error {
 public:
  DataError(DataErrorKind kind, const std::string& message) : Error(message), kind_(kind) {}
  DataErrorKind kind() const noexcept { return kind_; }

 private:
  DataErrorKind kind_;
};

enum class FormatErrorKind {
  Io,
  BadMagic,
  VersionMismatch,
  TruncatedPayload,
  NonFiniteValue,
};

class FormatError : public Error {
 public:
  FormatError(FormatErrorKind kind, const std::string& message) : Error(message), kind_(kind) {}
  FormatErrorKind kind() const noexcept { return kind_; }

 private:
  FormatErrorKind kind_;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace rgnet
