#pragma once

#include <stdexcept>
#include <string>

namespace survey {

// Base for every error raised by the library. The CLI maps ConfigError and
// SchemaError to exit code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class DatasetError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

// Violated caller obligation (unlabeled training data, non-scalar loss...).
class ContractError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace survey
