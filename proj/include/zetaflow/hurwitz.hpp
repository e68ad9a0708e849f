#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>

#include "zetaflow/errors.hpp"
#include "zetaflow/types.hpp"

namespace zetaflow {

namespace detail {

// B_{2k}/(2k)! for k = 1..16; the entry past the active correction count
// feeds the tail bound.
inline constexpr std::array<double, 16> kBernoulliFactorial = {
    8.333333333333333333e-02,  -1.388888888888888889e-03,
    3.306878306878306878e-05,  -8.267195767195767196e-07,
    2.087675698786809898e-08,  -5.284190138687493185e-10,
    1.338253653068467883e-11,  -3.389680296322582867e-13,
    8.586062056277844564e-15,  -2.174868698558061873e-16,
    5.509002828360229515e-18,  -1.395446468581252334e-19,
    3.534707039629467472e-21,  -8.953517427037546850e-23,
    2.267952452337683060e-24,  -5.744790668872202445e-26,
};

inline constexpr int kDefaultBernoulliPairs = 12;
inline constexpr int kMaxBernoulliPairs = 15;
inline constexpr int kMaxPartialTerms = 200000;

// The remainder bound needs sigma + 2K + 1 comfortably positive; K adapts
// toward kMaxBernoulliPairs for negative sigma and gives up below the
// representable window.
inline int bernoulli_pairs_for(double sigma) {
  const int need = static_cast<int>(std::ceil((2.5 - sigma) / 2.0));
  return std::clamp(need, kDefaultBernoulliPairs, kMaxBernoulliPairs);
}

// Value and first two s-derivatives of one analytic evaluation.
struct Jet {
  ComplexPoint f{0.0, 0.0};
  ComplexPoint d1{0.0, 0.0};
  ComplexPoint d2{0.0, 0.0};
  double e0 = 0.0;
  double e1 = 0.0;
  double e2 = 0.0;
};

struct SeriesAccumulator {
  ComplexPoint f{0.0, 0.0}, d1{0.0, 0.0}, d2{0.0, 0.0};
  double r0 = 0.0, r1 = 0.0, r2 = 0.0;  // rounding mass per order

  // w = x^{-s} with L = log x; derivative pieces are -Lw and L^2 w.
  // cond is the relative conditioning of the piece, 1 + |s||L|.
  void add(ComplexPoint w, ComplexPoint L, double cond) {
    const ComplexPoint dw = -L * w;
    const ComplexPoint d2w = L * (L * w);
    f += w;
    d1 += dw;
    d2 += d2w;
    r0 += std::abs(w) * cond;
    r1 += std::abs(dw) * cond;
    r2 += std::abs(d2w) * cond;
  }
};

inline ComplexPoint log_shift(double n, ComplexPoint a, bool real_a) {
  if (real_a) return {std::log(n + a.real()), 0.0};
  return std::log(ComplexPoint(n, 0.0) + a);
}

// x^{-z} for x = n + a given L = log(n + a). Real-shift path avoids the
// complex exponential and hands back the modulus for free.
inline ComplexPoint power_term(ComplexPoint z, ComplexPoint L, bool real_L) {
  if (real_L) {
    const double mag = std::exp(-z.real() * L.real());
    const double ph = -z.imag() * L.real();
    return {mag * std::cos(ph), mag * std::sin(ph)};
  }
  return std::exp(-z * L);
}

// One Euler-Maclaurin pass at fixed N. Outputs the jet of zeta(s,a), or of
// (s-1)*zeta(s,a) when pole_removed, plus tail/rounding components per order.
struct PassResult {
  Jet jet;
  double tail0 = 0.0, tail1 = 0.0, tail2 = 0.0;
  double round0 = 0.0, round1 = 0.0, round2 = 0.0;
};

inline PassResult euler_maclaurin_pass(ComplexPoint s, ComplexPoint a, int N,
                                       int K, bool pole_removed) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const bool real_a = (a.imag() == 0.0);
  const double smod = std::abs(s);

  SeriesAccumulator A;  // everything except the integral term
  for (int n = 0; n < N; ++n) {
    const ComplexPoint L = log_shift(static_cast<double>(n), a, real_a);
    const double Lmod = real_a ? std::abs(L.real()) : std::abs(L);
    const ComplexPoint w = power_term(s, L, real_a);
    A.add(w, L, 1.0 + smod * Lmod);
  }

  const ComplexPoint LX = log_shift(static_cast<double>(N), a, real_a);
  const double LXmod = real_a ? LX.real() : std::abs(LX);
  const double condX = 1.0 + smod * LXmod;

  const ComplexPoint W = power_term(s, LX, real_a);  // X^{-s}
  A.add(0.5 * W, LX, condX);

  // Bernoulli corrections: C_k * P_k * Q_k with P_k = s(s+1)...(s+2k-2),
  // Q_k = X^{-s-2k+1}; P/Q jets advance incrementally.
  ComplexPoint P = s, dP = 1.0, d2P = 0.0;
  ComplexPoint Q = power_term(s + 1.0, LX, real_a);
  const ComplexPoint invX2 = power_term(ComplexPoint(2.0, 0.0), LX, real_a);
  for (int k = 1; k <= K; ++k) {
    const double C = kBernoulliFactorial[k - 1];
    const ComplexPoint T = C * P * Q;
    const ComplexPoint dT = C * (dP - LX * P) * Q;
    const ComplexPoint d2T = C * (d2P - 2.0 * LX * dP + LX * (LX * P)) * Q;
    A.f += T;
    A.d1 += dT;
    A.d2 += d2T;
    A.r0 += std::abs(T) * condX;
    A.r1 += std::abs(dT) * condX;
    A.r2 += std::abs(d2T) * condX;

    const ComplexPoint u = (s + (2.0 * k - 1.0)) * (s + (2.0 * k));
    const ComplexPoint du = 2.0 * s + (4.0 * k - 1.0);
    d2P = d2P * u + 2.0 * dP * du + 2.0 * P;
    dP = dP * u + P * du;
    P = P * u;
    Q *= invX2;
  }

  PassResult out;

  // Twice the first omitted correction term, inflated by
  // |s+2K+1|/(sigma+2K+1), bounds the truncation error. Requires
  // sigma + 2K + 1 > 1, which bernoulli_pairs_for guarantees.
  {
    const double C = 2.0 * std::abs(kBernoulliFactorial[K]);
    const double denom = s.real() + 2.0 * K + 1.0;
    const double infl = std::abs(s + (2.0 * K + 1.0)) / denom;
    out.tail0 = C * std::abs(P) * std::abs(Q) * infl;
    out.tail1 = C * std::abs(dP - LX * P) * std::abs(Q) * infl;
    out.tail2 =
        C * std::abs(d2P - 2.0 * LX * dP + LX * (LX * P)) * std::abs(Q) * infl;
  }

  const ComplexPoint V = power_term(s - 1.0, LX, real_a);  // X^{1-s}
  const double errV = std::abs(V) * condX;

  Jet& J = out.jet;
  if (!pole_removed) {
    const ComplexPoint inv = 1.0 / (s - 1.0);
    const ComplexPoint I = V * inv;
    const ComplexPoint dI = -LX * I - I * inv;
    const ComplexPoint d2I = LX * (LX * I) + 2.0 * LX * I * inv +
                             2.0 * I * (inv * inv);
    J.f = A.f + I;
    J.d1 = A.d1 + dI;
    J.d2 = A.d2 + d2I;
    const double invmod = std::abs(inv);
    const double condI = condX + invmod;  // division conditioning near the pole
    out.round0 = eps * (A.r0 + std::abs(I) * condI);
    out.round1 = eps * (A.r1 + std::abs(dI) * condI);
    out.round2 = eps * (A.r2 + std::abs(d2I) * condI);
  } else {
    const ComplexPoint sm1 = s - 1.0;
    const double m = std::abs(sm1);
    J.f = sm1 * A.f + V;
    J.d1 = A.f + sm1 * A.d1 - LX * V;
    J.d2 = 2.0 * A.d1 + sm1 * A.d2 + LX * (LX * V);
    out.round0 = eps * (m * A.r0 + errV);
    out.round1 = eps * (A.r0 + m * A.r1 + LXmod * errV);
    out.round2 = eps * (2.0 * A.r1 + m * A.r2 + LXmod * LXmod * errV);
    out.tail2 = 2.0 * out.tail1 + m * out.tail2;
    out.tail1 = out.tail0 + m * out.tail1;
    out.tail0 = m * out.tail0;
  }
  J.e0 = out.tail0 + out.round0;
  J.e1 = out.tail1 + out.round1;
  J.e2 = out.tail2 + out.round2;
  return out;
}

// Adaptive-N driver. order selects how many derivatives the truncation tail
// must satisfy at tol; the rounding floor is reported through the error
// estimates but never blocks (fixed precision cannot be bought back by more
// terms). ToleranceUnreachable is tail-driven only.
inline Jet hurwitz_jet(ComplexPoint s, ComplexPoint a, double tol, int order,
                       bool pole_removed) {
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
    throw InvalidArgument("non-finite s");
  const int K = bernoulli_pairs_for(s.real());
  if (s.real() + 2.0 * K + 1.0 <= 1.5)
    throw ToleranceUnreachable(
        "correction series divergent this far left of the critical strip");
  int N = std::max(10, static_cast<int>(std::ceil(std::abs(s.imag()) / M_PI)));
  for (;;) {
    const PassResult pr = euler_maclaurin_pass(s, a, N, K, pole_removed);
    const Jet& J = pr.jet;
    if (!std::isfinite(J.f.real()) || !std::isfinite(J.f.imag()))
      throw Error("overflow in series evaluation");
    const double tails[3] = {pr.tail0, pr.tail1, pr.tail2};
    const double mags[3] = {std::abs(J.f), std::abs(J.d1), std::abs(J.d2)};
    bool tail_ok = true;
    for (int k = 0; k <= order; ++k)
      if (tails[k] > tol * (1.0 + mags[k])) tail_ok = false;
    if (tail_ok) return J;
    if (N >= kMaxPartialTerms)
      throw ToleranceUnreachable("truncation tail cannot meet tolerance");
    N = std::min(2 * N, kMaxPartialTerms);
  }
}

inline void check_alpha(double alpha) {
  if (!(alpha >= kAlphaMin && alpha <= 1.0))
    throw InvalidArgument("alpha must lie in [1e-10, 1]");
}

}  // namespace detail

// zeta(s, alpha), analytically continued.
inline EvalResult hurwitz_zeta(ComplexPoint s, double alpha,
                               double tol = kDefaultTolerance) {
  detail::check_alpha(alpha);
  if (std::abs(s - 1.0) < kPoleExclusionRadius)
    throw PoleAtOne("s within pole-exclusion radius of 1");
  const detail::Jet J = detail::hurwitz_jet(s, alpha, tol, 0, false);
  return {J.f, J.e0};
}

// d/ds zeta(s, alpha).
inline EvalResult hurwitz_zeta_s_derivative(ComplexPoint s, double alpha,
                                            double tol = kDefaultTolerance) {
  detail::check_alpha(alpha);
  if (std::abs(s - 1.0) < kPoleExclusionRadius)
    throw PoleAtOne("s within pole-exclusion radius of 1");
  const detail::Jet J = detail::hurwitz_jet(s, alpha, tol, 1, false);
  return {J.d1, J.e1};
}

// d/dalpha zeta(s, alpha) = -s * zeta(s+1, alpha). Near s = 0 the shifted
// argument s+1 falls inside the pole-exclusion radius, so that case (which
// also covers the 0*inf limit at s = 0 exactly) raises PoleAtOne.
inline EvalResult hurwitz_zeta_alpha_derivative(ComplexPoint s, double alpha,
                                                double tol = kDefaultTolerance) {
  detail::check_alpha(alpha);
  if (std::abs(s) < kPoleExclusionRadius)
    throw PoleAtOne("s+1 within pole-exclusion radius of 1");
  const detail::Jet J = detail::hurwitz_jet(s + 1.0, alpha, tol, 0, false);
  const double smod = std::abs(s);
  return {-s * J.f, smod * J.e0 +
                        std::numeric_limits<double>::epsilon() * smod *
                            std::abs(J.f)};
}

inline EvalResult riemann_zeta(ComplexPoint s, double tol = kDefaultTolerance) {
  return hurwitz_zeta(s, 1.0, tol);
}

// (s-1) * zeta(s, alpha): entire in s, safe across s = 1. Callers needing
// values inside the pole-exclusion radius use this form.
inline EvalResult hurwitz_zeta_pole_removed(ComplexPoint s, double alpha,
                                            double tol = kDefaultTolerance) {
  detail::check_alpha(alpha);
  const detail::Jet J = detail::hurwitz_jet(s, alpha, tol, 0, true);
  return {J.f, J.e0};
}

}  // namespace zetaflow
