#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

namespace slowavg {

using Integer = mpz_class;
using Rational = mpq_class;

/// Canonical "p/q" text (q printed even when it is 1).
std::string format_rational(const Rational& value);

/// Accepts "p/q", "p", or "num/2^exp". Throws Error{Parse} otherwise.
Rational parse_rational(std::string_view text);

inline Rational pow2_rational(int exponent) {
  Rational r(1);
  if (exponent >= 0) {
    mpz_mul_2exp(r.get_num_mpz_t(), r.get_num_mpz_t(), static_cast<mp_bitcnt_t>(exponent));
  } else {
    mpz_mul_2exp(r.get_den_mpz_t(), r.get_den_mpz_t(), static_cast<mp_bitcnt_t>(-exponent));
  }
  return r;
}

inline Integer integer_from_u64(std::uint64_t v) {
  Integer z;
  mpz_import(z.get_mpz_t(), 1, 1, sizeof(v), 0, 0, &v);
  return z;
}

inline std::uint64_t integer_to_u64(const Integer& z) {
  std::uint64_t v = 0;
  std::size_t count = 0;
  mpz_export(&v, &count, 1, sizeof(v), 0, 0, z.get_mpz_t());
  return count == 0 ? 0 : v;
}

}  // namespace slowavg
