#pragma once

#include <cmath>
#include <vector>

#include "zetaflow/errors.hpp"
#include "zetaflow/types.hpp"

namespace zetaflow {

namespace detail {

inline bool is_prime(long n) {
  if (n < 2) return false;
  if (n < 4) return true;
  if (n % 2 == 0) return false;
  for (long d = 3; d * d <= n; d += 2)
    if (n % d == 0) return false;
  return true;
}

inline long pow_mod(long base, long exp, long mod) {
  long r = 1, b = base % mod;
  while (exp > 0) {
    if (exp & 1) r = r * b % mod;
    b = b * b % mod;
    exp >>= 1;
  }
  return r;
}

// smallest primitive root mod prime p
inline long primitive_root(long p) {
  if (p == 2) return 1;
  std::vector<long> prime_factors;
  long m = p - 1;
  for (long d = 2; d * d <= m; ++d) {
    if (m % d == 0) {
      prime_factors.push_back(d);
      while (m % d == 0) m /= d;
    }
  }
  if (m > 1) prime_factors.push_back(m);
  for (long g = 2; g < p; ++g) {
    bool ok = true;
    for (long q : prime_factors)
      if (pow_mod(g, (p - 1) / q, p) == 1) {
        ok = false;
        break;
      }
    if (ok) return g;
  }
  throw Error("no primitive root found");
}

}  // namespace detail

// All p-1 Dirichlet characters mod prime p, indexed j = 0..p-2 with
// chi_j(g^k) = e^{2*pi*i*j*k/(p-1)} for the smallest primitive root g.
// j = 0 is the principal character; chi_j(p-1) = (-1)^j fixes parity.
struct CharacterTable {
  int modulus;
  int primitive_root;
  // characters[j][l-1] = chi_j(l) for l = 1..p; chi(p) = 0.
  std::vector<std::vector<ComplexPoint>> characters;
  std::vector<bool> odd;
};

inline CharacterTable dirichlet_characters(int p) {
  if (!detail::is_prime(p)) throw NotPrime("modulus must be prime");
  if (p < 3 || p > 1000) throw InvalidArgument("modulus must lie in [3, 1000]");
  const long g = detail::primitive_root(p);

  // discrete log of l base g
  std::vector<int> dlog(p, 0);
  long pw = 1;
  for (int k = 0; k < p - 1; ++k) {
    dlog[pw] = k;
    pw = pw * g % p;
  }

  CharacterTable table;
  table.modulus = p;
  table.primitive_root = static_cast<int>(g);
  table.characters.assign(p - 1, std::vector<ComplexPoint>(p));
  table.odd.assign(p - 1, false);
  const int order = p - 1;
  for (int j = 0; j < order; ++j) {
    for (int l = 1; l < p; ++l) {
      const int e = static_cast<int>(static_cast<long>(j) * dlog[l] % order);
      const double arg = 2.0 * M_PI * e / order;
      table.characters[j][l - 1] = {std::cos(arg), std::sin(arg)};
    }
    table.characters[j][p - 1] = {0.0, 0.0};
    table.odd[j] = (j % 2 == 1);
  }
  return table;
}

}  // namespace zetaflow
