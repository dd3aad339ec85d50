#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace rampo {

using Rational = mpq_class;

// Parses a decimal literal ("12", "-0.001", "1.5e3") exactly.
Rational parse_decimal(std::string_view text);

// Exact conversion; every finite double is a dyadic rational.
Rational from_double(double v);

// Nearest double (round-half-even through mpq -> mpfr-free path).
double to_double(const Rational& q);

// Shortest decimal if the value terminates, else "num/den".
std::string to_decimal_string(const Rational& q);

}  // namespace rampo
