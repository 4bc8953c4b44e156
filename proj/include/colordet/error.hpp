#pragma once

#include <stdexcept>
#include <string>

namespace colordet {

/// Thrown when an argument violates an operation's precondition
/// (bad shape, out-of-range parameter, mismatched lengths).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown for problems with external data: unreadable files, malformed
/// records. Carries the source name and, when known, the 1-based line.
class DataError : public std::runtime_error {
 public:
  DataError(std::string source, std::size_t line, const std::string& what)
      : std::runtime_error(format(source, line, what)),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& source, std::size_t line,
                            const std::string& what) {
    if (line == 0) return source + ": " + what;
    return source + ":" + std::to_string(line) + ": " + what;
  }

  std::string source_;
  std::size_t line_;
};

}  // namespace colordet
