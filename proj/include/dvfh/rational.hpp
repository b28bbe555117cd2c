#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

namespace dvfh {

/// Exact rational number. Values are kept canonical (lowest terms,
/// positive denominator) by every helper in this header.
using Rational = mpq_class;
using Integer = mpz_class;

/// 2^exp as an exact rational.
Rational pow2(std::int64_t exp);

/// Canonical "num/den" form, e.g. "3/4", "0/1", "1/1".
std::string to_string(const Rational& r);

/// Accepts "num/den", integers and plain decimals ("0.33").
/// Throws std::invalid_argument on anything else.
Rational parse_rational(std::string_view text);

/// Nearest double; for analysis output only.
double to_double(const Rational& r);

/// log2(r) for r > 0 without overflowing on huge numerators/denominators.
double log2_of(const Rational& r);

}  // namespace dvfh
