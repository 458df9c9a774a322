#pragma once

#include <stdexcept>
#include <string>

namespace ising_market {

/// Broad failure class; the CLI maps each one to its exit status.
enum class ErrorKind {
  validation = 1,
  io = 2,
  internal = 3,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
  ErrorKind kind_;
};

class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::validation, what) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace ising_market
