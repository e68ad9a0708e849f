#pragma once

#include <complex>

namespace zetaflow {

using ComplexPoint = std::complex<double>;

struct EvalResult {
  ComplexPoint value;
  double est_abs_error;
};

// Tolerance is enforced as est_abs_error <= tol * (1 + |value|); flat
// absolute bounds are not representable in doubles once |value| is large.
inline constexpr double kDefaultTolerance = 1e-12;

// |s - 1| below this radius raises PoleAtOne for pole-carrying evaluations.
inline constexpr double kPoleExclusionRadius = 1e-6;

inline constexpr double kAlphaMin = 1e-10;

}  // namespace zetaflow
