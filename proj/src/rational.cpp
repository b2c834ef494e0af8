#include "slowavg/rational.hpp"

#include <cctype>

#include "slowavg/error.hpp"

namespace slowavg {

std::string format_rational(const Rational& value) {
  return value.get_num().get_str() + "/" + value.get_den().get_str();
}

namespace {

bool parse_integer(std::string_view text, Integer& out) {
  if (text.empty()) return false;
  std::size_t start = (text[0] == '-' || text[0] == '+') ? 1 : 0;
  if (start == text.size()) return false;
  for (std::size_t i = start; i < text.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
  }
  std::string s(text[0] == '+' ? text.substr(1) : text);
  return out.set_str(s, 10) == 0;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  text = trim(text);
  auto slash = text.find('/');
  Integer num;
  if (slash == std::string_view::npos) {
    if (!parse_integer(text, num)) throw Error(ErrorKind::Parse, "bad rational '" + std::string(text) + "'");
    return Rational(num);
  }
  if (!parse_integer(trim(text.substr(0, slash)), num)) {
    throw Error(ErrorKind::Parse, "bad rational '" + std::string(text) + "'");
  }
  auto den_text = trim(text.substr(slash + 1));
  Integer den;
  if (den_text.starts_with("2^")) {
    Integer e;
    if (!parse_integer(den_text.substr(2), e) || e < 0 || e > 4096) {
      throw Error(ErrorKind::Parse, "bad exponent in '" + std::string(text) + "'");
    }
    den = 1;
    mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), e.get_ui());
  } else if (!parse_integer(den_text, den)) {
    throw Error(ErrorKind::Parse, "bad rational '" + std::string(text) + "'");
  }
  if (den <= 0) throw Error(ErrorKind::Parse, "non-positive denominator in '" + std::string(text) + "'");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

}  // namespace slowavg
