#pragma once

#include <stdexcept>
#include <string>

namespace zetaflow {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// evaluation
struct PoleAtOne : Error {
  using Error::Error;
};
struct ToleranceUnreachable : Error {
  using Error::Error;
};

// construction
struct NotPrime : Error {
  using Error::Error;
};
struct NotSymmetric : Error {
  using Error::Error;
};
struct NotInNullSpace : Error {
  using Error::Error;
};
struct ConstructionUnvalidated : Error {
  using Error::Error;
};
struct NoFlowParameter : Error {
  using Error::Error;
};

// zero finding
struct BoundaryZero : Error {
  using Error::Error;
};
struct PoleInside : Error {
  using Error::Error;
};
struct NewtonDiverged : Error {
  using Error::Error;
};

// tracking
struct LostZero : Error {
  using Error::Error;
};
struct WrongFlow : Error {
  using Error::Error;
};
struct CoefficientPole : Error {
  using Error::Error;
};

// argument validation (bad alpha range, malformed rectangles, ...)
struct InvalidArgument : Error {
  using Error::Error;
};

}  // namespace zetaflow
