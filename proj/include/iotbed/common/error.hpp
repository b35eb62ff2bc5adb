#pragma once

#include <stdexcept>
#include <string>

namespace iotbed {

enum class ErrorCode {
  invalid_argument,
  parse,
  validation,
  not_found,
  duplicate,
  storage,
  runtime,
};

// Single exception type for the core library. The C API maps `code()` onto
// its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& message)
      : Error(ErrorCode::parse, "line " + std::to_string(line) + ", column " +
                                    std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace iotbed
