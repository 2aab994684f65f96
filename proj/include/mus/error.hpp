#pragma once

#include <stdexcept>
#include <string>

namespace mus {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind {
  input,       // malformed input or configuration (exit 2)
  external,    // embedding service / selector endpoint failure (exit 3)
  degenerate,  // data that cannot support the requested computation (exit 4)
  internal,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message, bool retryable = false)
      : std::runtime_error(message), kind_(kind), retryable_(retryable) {}

  ErrorKind kind() const noexcept { return kind_; }
  bool retryable() const noexcept { return retryable_; }

private:
  ErrorKind kind_;
  bool retryable_;
};

inline Error input_error(const std::string& message) { return Error(ErrorKind::input, message); }

inline Error external_error(const std::string& message, bool retryable = true) {
  return Error(ErrorKind::external, message, retryable);
}

inline Error degenerate_error(const std::string& message) {
  return Error(ErrorKind::degenerate, message);
}

int exit_code_for(ErrorKind kind) noexcept;

}  // namespace mus
