#pragma once

#include <stdexcept>

namespace isopref {

// Raised when caller-supplied data or parameters violate a documented precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a computation reaches a state its inputs should have ruled out.
class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace isopref
