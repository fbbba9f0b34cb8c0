#pragma once

#include <stdexcept>
#include <string>

namespace tcg {

// Invalid arguments or invalid file contents. Maps to CLI exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed file content; the message names the offending field.
class ParseError : public InputError {
 public:
  ParseError(const std::string& field, const std::string& what)
      : InputError(field + ": " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Filesystem failures. Maps to CLI exit code 1.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// NaN/inf during training or evaluation. Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tcg
