#pragma once

// Exact rational arithmetic. GMP's mpq_class is the value type; this header
// adds the parsing and formatting conventions used across the library.

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

#include "ballsbins/errors.hpp"

namespace ballsbins {

using Rational = mpq_class;
using BigInt = mpz_class;

namespace detail {
inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}
}  // namespace detail

/// Parses "p/q", "-p/q" or an integer "p". Result is in lowest terms.
inline Rational parse_rational(std::string_view text) {
  std::string_view body = text;
  if (!body.empty() && body.front() == '-') body.remove_prefix(1);
  const auto slash = body.find('/');
  const std::string_view num = body.substr(0, slash);
  const std::string_view den =
      slash == std::string_view::npos ? std::string_view{"1"} : body.substr(slash + 1);
  if (!detail::all_digits(num) || !detail::all_digits(den))
    fail_malformed("fraction '" + std::string(text) + "'");
  BigInt d(std::string(den), 10);
  if (d == 0) fail_malformed("zero denominator in '" + std::string(text) + "'");
  Rational q(BigInt(std::string(num), 10), d);
  q.canonicalize();
  if (text.front() == '-') q = -q;
  return q;
}

/// Canonical text form: "p/q" in lowest terms, or "p" when q == 1.
inline std::string to_string(Rational q) {
  q.canonicalize();
  return q.get_str(10);
}

/// Decimal rendering rounded half-to-even at `digits` places after the point.
inline std::string to_decimal(const Rational& q, unsigned digits = 6) {
  BigInt scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, digits);
  const Rational scaled = q * scale;
  const bool negative = scaled < 0;
  const Rational mag = negative ? Rational(-scaled) : scaled;

  BigInt whole = mag.get_num() / mag.get_den();  // floor for non-negative
  const Rational frac = mag - Rational(whole);
  const int cmp_half = cmp(frac, Rational(1, 2));
  if (cmp_half > 0 || (cmp_half == 0 && mpz_odd_p(whole.get_mpz_t()))) ++whole;

  std::string s = whole.get_str(10);
  if (digits > 0) {
    if (s.size() <= digits) s.insert(0, digits + 1 - s.size(), '0');
    s.insert(s.size() - digits, ".");
  }
  if (negative && whole != 0) s.insert(0, "-");
  return s;
}

inline double to_double(const Rational& q) { return q.get_d(); }

/// q^e for a non-negative integer exponent.
inline Rational pow(const Rational& q, unsigned long e) {
  Rational r;
  mpz_pow_ui(r.get_num_mpz_t(), q.get_num_mpz_t(), e);
  mpz_pow_ui(r.get_den_mpz_t(), q.get_den_mpz_t(), e);
  return r;
}

}  // namespace ballsbins
