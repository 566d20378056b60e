#pragma once

#include <stdexcept>
#include <string>

namespace avgsfde {

// Failure categories surfaced to callers and mapped onto CLI exit codes.
enum class ErrorKind {
  invalid_argument,
  domain,
  unsupported,
  overflow,
  stiffness,
  discretization,
  sign_change,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::domain: return "domain";
    case ErrorKind::unsupported: return "unsupported-parameters";
    case ErrorKind::overflow: return "overflow";
    case ErrorKind::stiffness: return "stiffness";
    case ErrorKind::discretization: return "discretization";
    case ErrorKind::sign_change: return "sign-change";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace avgsfde
