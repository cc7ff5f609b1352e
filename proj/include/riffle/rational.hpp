#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace riffle {

/// Arbitrary precision rational. All measure structure (gap endpoints, atom
/// masses, CDF values) and every oracle probability lives in this type.
using Rational = mpq_class;

/// Parses "p/q", an integer, or a finite decimal such as "0.3" exactly.
/// Throws Error(InvalidSpec) on anything else.
Rational parse_rational(std::string_view text);

/// Canonical "p/q" (or "p" when q = 1).
std::string to_string(const Rational& r);

/// Exact value of a double (every finite double is a dyadic rational).
Rational exact(double x);

/// Sign of (x - r), computed exactly.
int compare_exact(double x, const Rational& r);

}  // namespace riffle
