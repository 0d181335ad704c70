#pragma once

#include <stdexcept>
#include <string>

namespace tpi {

enum class ErrorKind {
  Parse,
  Validation,
  NumericalGuard,
  GridMismatch,
  SizeLimit,
  InvalidArgument,
  ZeroNorm,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace tpi
