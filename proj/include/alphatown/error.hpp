#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace alphatown {

enum class ErrorKind {
  kInvalidInput,
  kGroundTooSmall,
  kBudgetExhausted,
  kInternal,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers switch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_invalid(const std::string& message) {
  throw Error(ErrorKind::kInvalidInput, message);
}

}  // namespace alphatown
