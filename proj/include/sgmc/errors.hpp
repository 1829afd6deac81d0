#pragma once

#include <stdexcept>
#include <string>

namespace sgmc {

// Raised when a graph or stratified graph is outside the decomposable class
// the scoring machinery supports.
class UnsupportedModelError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Raised for category values, cardinalities or shapes that do not match.
class DataValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File-level parse failure. Line and field are 1-based; 0 means unknown.
class ParseError : public DataValidationError {
 public:
  ParseError(const std::string& message, int line = 0, int field = 0)
      : DataValidationError(format(message, line, field)), line_(line), field_(field) {}

  int line() const { return line_; }
  int field() const { return field_; }

 private:
  static std::string format(const std::string& message, int line, int field) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (field > 0) out += "field " + std::to_string(field) + ": ";
    return out + message;
  }

  int line_;
  int field_;
};

}  // namespace sgmc
