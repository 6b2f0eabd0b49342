#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qmll {

// Base class for every error raised by the library. Each subclass maps to a
// distinct CLI exit code (see tools/qmll.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text: formulas, proofs, contexts, circuit or register JSON.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t position)
      : Error(what + " at offset " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

// A domain operation was called outside its precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// An internal bound (step bound, legal-state bound) was exceeded. Never
// expected; signals an implementation bug.
class BoundExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace qmll
