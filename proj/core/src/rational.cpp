#include "microdim/rational.hpp"

#include <cmath>
#include <limits>

#include "microdim/errors.hpp"

namespace microdim {

namespace {

BigInt parse_integer(std::string_view digits, std::string_view whole) {
  if (digits.empty()) throw InvalidArgument("empty number in '" + std::string(whole) + "'");
  BigInt out = 0;
  for (char ch : digits) {
    if (ch < '0' || ch > '9') {
      throw InvalidArgument("not a rational literal: '" + std::string(whole) + "'");
    }
    out = out * 10 + (ch - '0');
  }
  return out;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const std::string_view whole = text;
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  Rational value;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    BigInt num = parse_integer(text.substr(0, slash), whole);
    BigInt den = parse_integer(text.substr(slash + 1), whole);
    if (den == 0) throw InvalidArgument("zero denominator in '" + std::string(whole) + "'");
    value = Rational(num, den);
  } else if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view int_part = text.substr(0, dot);
    std::string_view frac_part = text.substr(dot + 1);
    BigInt num = int_part.empty() ? BigInt(0) : parse_integer(int_part, whole);
    BigInt scale = 1;
    if (!frac_part.empty()) {
      BigInt frac = parse_integer(frac_part, whole);
      for (std::size_t i = 0; i < frac_part.size(); ++i) scale *= 10;
      num = num * scale + frac;
    } else if (int_part.empty()) {
      throw InvalidArgument("not a rational literal: '" + std::string(whole) + "'");
    }
    value = Rational(num, scale);
  } else {
    value = Rational(parse_integer(text, whole));
  }
  return negative ? Rational(-value) : value;
}

std::string to_string(const Rational& value) {
  const BigInt num = boost::multiprecision::numerator(value);
  const BigInt den = boost::multiprecision::denominator(value);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

bool abs_le_over_sqrt(const Rational& x, const Rational& c, std::int64_t n) {
  if (n < 1) throw InvalidArgument("abs_le_over_sqrt: n must be >= 1");
  if (c < 0) return false;
  return Rational(n) * x * x <= c * c;
}

std::uint64_t isqrt(std::uint64_t v) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(v)));
  while (r > 0 && static_cast<unsigned __int128>(r) * r > v) --r;
  while (static_cast<unsigned __int128>(r + 1) * (r + 1) <= v) ++r;
  return r;
}

std::uint64_t ceil_sqrt(std::uint64_t v) {
  const std::uint64_t r = isqrt(v);
  return r * r == v ? r : r + 1;
}

double log2_big(const BigInt& value) {
  if (value <= 0) throw InvalidArgument("log2 of a non-positive count");
  const std::size_t msb = boost::multiprecision::msb(value);
  if (msb < 53) return std::log2(value.convert_to<double>());
  const std::size_t shift = msb - 52;
  const BigInt top = value >> shift;
  return std::log2(top.convert_to<double>()) + static_cast<double>(shift);
}

Rational round_to_dyadic(const Rational& value, int bits) {
  BigInt scale = BigInt(1) << bits;
  const Rational scaled = value * scale + Rational(1, 2);
  BigInt num = boost::multiprecision::numerator(scaled);
  BigInt den = boost::multiprecision::denominator(scaled);
  BigInt q = num / den;
  if (num < 0 && q * den != num) q -= 1;  // floor for negatives
  return Rational(q, scale);
}

std::int64_t small_numerator(const Rational& value) {
  const BigInt num = boost::multiprecision::numerator(value);
  if (num > std::numeric_limits<std::int64_t>::max() ||
      num < std::numeric_limits<std::int64_t>::min()) {
    throw InvalidArgument("rational numerator exceeds 64 bits: " + to_string(value));
  }
  return num.convert_to<std::int64_t>();
}

std::int64_t small_denominator(const Rational& value) {
  const BigInt den = boost::multiprecision::denominator(value);
  if (den > std::numeric_limits<std::int64_t>::max()) {
    throw InvalidArgument("rational denominator exceeds 64 bits: " + to_string(value));
  }
  return den.convert_to<std::int64_t>();
}

}  // namespace microdim
