#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

namespace circorb {

// Exact rational in lowest terms; every arithmetic result is canonicalized.
using Rational = mpq_class;
using Integer = mpz_class;

// num/den in lowest terms; mpq_class(num, den) alone does not reduce.
Rational make_rational(long num, long den);

Rational parse_rational(std::string_view text);
std::string to_string(const Rational& q);
double to_double(const Rational& q);

// Number of bits in numerator plus denominator, a proxy for arithmetic cost.
std::size_t bit_size(const Rational& q);

// Approximate log2 |q|, finite for q != 0 even when q underflows a double.
double approx_log2(const Rational& q);

Integer floor_int(const Rational& q);
Integer ceil_int(const Rational& q);

// Largest / smallest multiple of 2^-bits below / above q.
Rational floor_dyadic(const Rational& q, long bits);
Rational ceil_dyadic(const Rational& q, long bits);

// Smallest k >= 0 with 2^-k <= eps (eps > 0).
long bits_for(const Rational& eps);

Rational pow_int(const Rational& base, long exponent);
Rational pow2(long exponent);
Rational pow3(long exponent);

// Floor of the integer q-th root together with an exactness flag.
struct RootResult {
  Integer root;
  bool exact;
};
RootResult int_root(const Integer& value, unsigned long degree);

}  // namespace circorb
