#pragma once

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "zetaflow/errors.hpp"
#include "zetaflow/types.hpp"

namespace zetaflow {

// Canonical float formatting for every artifact output: %.15g.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

inline std::string format_complex(ComplexPoint z) {
  return format_double(z.real()) + (z.imag() < 0 ? "" : "+") +
         format_double(z.imag()) + "i";
}

// Strict "a+bi" parser: optional real part, optional imaginary part with
// mandatory trailing 'i'; no interior whitespace. Accepts "2", "2+0i",
// "-1.5e-3-2i", "3i", "i", "-i".
inline ComplexPoint parse_complex(const std::string& text) {
  const char* s = text.c_str();
  if (*s == '\0') throw InvalidArgument("empty complex literal");
  for (const char* q = s; *q; ++q)
    if (std::isspace(static_cast<unsigned char>(*q)))
      throw InvalidArgument("whitespace in complex literal: " + text);

  auto read_number = [&](const char* from, const char** end) -> double {
    // bare sign followed by 'i' means +-1
    if ((from[0] == '+' || from[0] == '-') && from[1] == 'i') {
      *end = from + 1;
      return from[0] == '-' ? -1.0 : 1.0;
    }
    if (from[0] == 'i') {
      *end = from;
      return 1.0;
    }
    char* e = nullptr;
    const double v = std::strtod(from, &e);
    if (e == from) throw InvalidArgument("bad complex literal: " + text);
    *end = e;
    return v;
  };

  const char* pos = s;
  const double first = read_number(pos, &pos);
  if (*pos == '\0') return {first, 0.0};
  if (*pos == 'i') {
    if (pos[1] != '\0') throw InvalidArgument("bad complex literal: " + text);
    return {0.0, first};
  }
  if (*pos != '+' && *pos != '-')
    throw InvalidArgument("bad complex literal: " + text);
  const double second = read_number(pos, &pos);
  if (*pos != 'i' || pos[1] != '\0')
    throw InvalidArgument("bad complex literal: " + text);
  return {first, second};
}

}  // namespace zetaflow
