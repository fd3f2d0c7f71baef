#pragma once

#include <stdexcept>
#include <string>

namespace memrl {

// Error taxonomy shared by the library and the CLI exit codes:
// config errors (bad configuration / preconditions), data errors
// (parse, validation, infeasible actions) and I/O errors.
enum class ErrorKind { config = 1, data = 2, io = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string msg)
      : std::runtime_error(std::move(msg)), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::string msg) : Error(ErrorKind::config, std::move(msg)) {}
};

class DataError : public Error {
 public:
  explicit DataError(std::string msg) : Error(ErrorKind::data, std::move(msg)) {}
};

class IoError : public Error {
 public:
  explicit IoError(std::string msg) : Error(ErrorKind::io, std::move(msg)) {}
};

}  // namespace memrl
