#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mtax {

/// Base class for every failure raised by the toolkit.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input text or file content that does not follow its grammar.
class ParseError : public Error {
public:
  ParseError(const std::string &what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  /// 1-based line number, 0 when not tied to a line.
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Arguments that violate an operation's preconditions.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Filesystem failures (missing input, unwritable output).
class IoError : public Error {
public:
  using Error::Error;
};

} // namespace mtax
