#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

namespace dsmv {

using Rational = mpq_class;
using Integer = mpz_class;

/// Parses "7", "-3", "6/13", "0.25", "-70.6" exactly. Throws std::invalid_argument.
Rational parse_rational(std::string_view text);

/// Canonical text form: "p/q" or "p" for integers.
std::string to_string(const Rational& value);

/// Decimal rendering with at most `digits` fractional digits (for reports only).
std::string to_decimal(const Rational& value, int digits = 6);

double to_double(const Rational& value);

Rational floor(const Rational& value);
Rational ceil(const Rational& value);
bool is_integer(const Rational& value);

/// Exact conversion; throws std::overflow_error if the value does not fit.
std::int64_t to_int64(const Rational& value);

}  // namespace dsmv
