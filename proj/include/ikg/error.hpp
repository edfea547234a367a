#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ikg {

// Failure taxonomy shared by the library and the CLI. Each category maps to
// a fixed process exit code so scripts can assert on failure modes.
enum class ErrorCategory {
  parse,
  vocab,
  train_diverged,
  unresolved_slot,
  verification_failed,
  io,
  invalid_argument,
};

inline std::string_view to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::vocab: return "vocab";
    case ErrorCategory::train_diverged: return "train-diverged";
    case ErrorCategory::unresolved_slot: return "unresolved-slot";
    case ErrorCategory::verification_failed: return "verification-failed";
    case ErrorCategory::io: return "io";
    case ErrorCategory::invalid_argument: return "invalid-argument";
  }
  return "unknown";
}

inline int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::parse: return 2;
    case ErrorCategory::vocab: return 3;
    case ErrorCategory::train_diverged: return 4;
    case ErrorCategory::unresolved_slot: return 5;
    case ErrorCategory::verification_failed: return 6;
    case ErrorCategory::io: return 7;
    case ErrorCategory::invalid_argument: return 8;
  }
  return 1;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

// Parse failure carrying a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : Error(ErrorCategory::parse, "line " + std::to_string(line) + ", column " +
                                        std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace ikg
