#pragma once

#include <stdexcept>
#include <string>

namespace stenfuse {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A point or stencil footprint fell outside the box it indexes.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Operator, vector, or patch dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A nonlinear operator reached a linear-only code path.
class NonlinearError : public Error {
 public:
  using Error::Error;
};

class LoweringError : public Error {
 public:
  using Error::Error;
};

class FusionError : public Error {
 public:
  using Error::Error;
};

class EmitError : public Error {
 public:
  using Error::Error;
};

}  // namespace stenfuse
