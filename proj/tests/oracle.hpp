#pragma once

// Independent reference implementations used only by the tests. Nothing in
// here shares code or tables with the library: summation runs in long double
// with a fixed truncation and its own Bernoulli quotients, the winding walk
// is a plain dense boundary sweep, and the zero enumerator is a grid of
// vanilla Newton starts.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

using CL = std::complex<long double>;
using CD = std::complex<double>;

struct RefValue {
  CL value{0.0L, 0.0L};
  long double err = 0.0L;  // rounding + truncation bound
};

// Euler-Maclaurin with fixed N partial terms and K correction pairs.
inline RefValue hurwitz_ref(CL s, long double a, int N = 400, int K = 15) {
  static const long double kB2k[16] = {
      0.0L,
      1.0L / 6.0L,
      -1.0L / 30.0L,
      1.0L / 42.0L,
      -1.0L / 30.0L,
      5.0L / 66.0L,
      -691.0L / 2730.0L,
      7.0L / 6.0L,
      -3617.0L / 510.0L,
      43867.0L / 798.0L,
      -174611.0L / 330.0L,
      854513.0L / 138.0L,
      -236364091.0L / 2730.0L,
      8553103.0L / 6.0L,
      -23749461029.0L / 870.0L,
      8615841276005.0L / 14322.0L};
  const long double eps = std::numeric_limits<long double>::epsilon();
  CL sum{0.0L, 0.0L};
  long double maxmag = 0.0L;
  for (int n = 0; n < N; ++n) {
    const CL term = std::exp(-s * std::log(static_cast<long double>(n) + a));
    sum += term;
    maxmag = std::max(maxmag, std::abs(term));
  }
  const long double x = static_cast<long double>(N) + a;
  const long double lx = std::log(x);
  const CL integral = std::exp((1.0L - s) * lx) / (s - 1.0L);
  const CL half = std::exp(-s * lx) / 2.0L;
  sum += integral + half;
  maxmag = std::max({maxmag, std::abs(integral), std::abs(half)});

  CL rising = s;                       // s(s+1)...(s+2k-2)
  long double fact = 2.0L;             // (2k)!
  CL xpow = std::exp((-s - 1.0L) * lx);
  CL last{0.0L, 0.0L};
  for (int k = 1; k <= K; ++k) {
    last = kB2k[k] / fact * rising * xpow;
    sum += last;
    maxmag = std::max(maxmag, std::abs(last));
    rising *= (s + static_cast<long double>(2 * k - 1)) *
              (s + static_cast<long double>(2 * k));
    fact *= (2.0L * k + 1.0L) * (2.0L * k + 2.0L);
    xpow *= std::exp(-2.0L * lx);
  }
  RefValue out;
  out.value = sum;
  out.err = 4.0L * std::abs(last) +
            eps * maxmag * static_cast<long double>(N + 2 * K + 4);
  return out;
}

inline CD hurwitz_ref_d(CD s, double a, int N = 400, int K = 15) {
  const RefValue r = hurwitz_ref(CL(s.real(), s.imag()),
                                 static_cast<long double>(a), N, K);
  return {static_cast<double>(r.value.real()),
          static_cast<double>(r.value.imag())};
}

// Dense fixed-resolution boundary sweep; returns accumulated turns.
inline double winding_dense(const std::function<CD(CD)>& f, double s0,
                            double s1, double t0, double t1,
                            int per_side = 20000) {
  const CD corners[5] = {{s0, t0}, {s1, t0}, {s1, t1}, {s0, t1}, {s0, t0}};
  double total = 0.0;
  for (int e = 0; e < 4; ++e) {
    CD prev = f(corners[e]);
    for (int k = 1; k <= per_side; ++k) {
      const double u = static_cast<double>(k) / per_side;
      const CD z = corners[e] + u * (corners[e + 1] - corners[e]);
      const CD cur = f(z);
      total += std::arg(cur / prev);
      prev = cur;
    }
  }
  return total / (2.0 * M_PI);
}

// Newton from every grid point; converged interior zeros, deduplicated.
inline std::vector<CD> newton_sweep(const std::function<CD(CD)>& f,
                                    const std::function<CD(CD)>& df,
                                    double s0, double s1, double t0, double t1,
                                    int nx = 12, int ny = 60) {
  std::vector<CD> found;
  for (int i = 0; i <= nx; ++i) {
    for (int j = 0; j <= ny; ++j) {
      CD z{s0 + (s1 - s0) * i / nx, t0 + (t1 - t0) * j / ny};
      bool ok = false;
      for (int it = 0; it < 80; ++it) {
        const CD dv = df(z);
        if (!(std::abs(dv) > 1e-18)) break;
        const CD step = f(z) / dv;
        z -= step;
        if (!(std::abs(z.real()) < 1e3 && std::abs(z.imag()) < 1e6)) break;
        if (std::abs(step) < 1e-12) {
          ok = std::abs(f(z)) < 1e-8;
          break;
        }
      }
      if (!ok) continue;
      if (!(z.real() > s0 && z.real() < s1 && z.imag() > t0 &&
            z.imag() < t1))
        continue;
      bool dup = false;
      for (const auto& w : found)
        if (std::abs(w - z) < 1e-6) {
          dup = true;
          break;
        }
      if (!dup) found.push_back(z);
    }
  }
  std::sort(found.begin(), found.end(), [](CD a, CD b) {
    if (a.imag() != b.imag()) return a.imag() < b.imag();
    return a.real() < b.real();
  });
  return found;
}

}  // namespace oracle
