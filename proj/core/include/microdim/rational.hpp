#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace microdim {

/// Exact rational arithmetic. Densities, targets and dimension values are kept exact
/// everywhere a bound is asserted; doubles only appear in reporting and Monte Carlo.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Parses "p/q", "p", or a finite decimal such as "0.375" (exactly).
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& value);
double to_double(const Rational& value);

/// Exact `|x| <= c / sqrt(n)` for n >= 1, decided as `n * x^2 <= c^2`.
bool abs_le_over_sqrt(const Rational& x, const Rational& c, std::int64_t n);

/// floor(sqrt(v)) for v >= 0.
std::uint64_t isqrt(std::uint64_t v);
/// ceil(sqrt(v)) for v >= 0.
std::uint64_t ceil_sqrt(std::uint64_t v);

/// log2 of a positive big integer, accurate to double precision.
double log2_big(const BigInt& value);

/// Nearest multiple of 2^-bits (ties toward +infinity).
Rational round_to_dyadic(const Rational& value, int bits);

/// Numerator/denominator as 64-bit integers; throws InvalidArgument when they do not fit.
std::int64_t small_numerator(const Rational& value);
std::int64_t small_denominator(const Rational& value);

}  // namespace microdim
