#pragma once

#include <stdexcept>
#include <string>

namespace mwrc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed data: a distribution that does not sum to one, a symbol outside
// its alphabet, a channel table with the wrong shape.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// The caller broke an operation's precondition (overlapping axis sets,
// mismatched lengths, wrong arity).
class UsageError : public Error {
 public:
  using Error::Error;
};

// The request is well formed but exceeds the enumeration cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string key, int line = 0)
      : Error(what), key_(std::move(key)), line_(line) {}
  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

}  // namespace mwrc
