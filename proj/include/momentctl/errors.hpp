#pragma once

#include <stdexcept>
#include <string>

namespace momentctl {

// Rejected input: dimension mismatches, out-of-range arguments, malformed
// problem data. The CLI maps this to exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Text that could not be parsed. `line` is 1-based, 0 when unknown.
class ParseError : public InputError {
 public:
  ParseError(const std::string& what, int line = 0)
      : InputError(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Numerical or backend failure. The CLI maps this to exit code 3.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace momentctl
