#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hcse {

// Malformed input text (edge lists, tree documents, config files).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what
                                     : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Arguments outside an operation's domain (bad vertex ids, self-loops, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Structural corruption of a cluster tree (cycles, orphans, bad leaf map).
class IntegrityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace hcse
