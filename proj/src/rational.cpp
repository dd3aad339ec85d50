#include "rampo/rational.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>

namespace rampo {

Rational parse_decimal(std::string_view text) {
  std::size_t i = 0;
  bool neg = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
    neg = text[i] == '-';
    ++i;
  }
  std::string digits;
  long frac_digits = 0;
  bool seen_dot = false;
  bool any = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c >= '0' && c <= '9') {
      digits.push_back(c);
      any = true;
      if (seen_dot) ++frac_digits;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else {
      break;
    }
  }
  if (!any) throw std::invalid_argument("not a decimal literal: " + std::string(text));
  long exponent = 0;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    std::string exp_text(text.substr(i));
    std::size_t used = 0;
    exponent = std::stol(exp_text, &used);
    i += used;
  }
  if (i != text.size()) throw std::invalid_argument("not a decimal literal: " + std::string(text));

  mpz_class num(digits, 10);
  long shift = exponent - frac_digits;
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(shift)));
  Rational q = shift >= 0 ? Rational(num * scale) : Rational(num, scale);
  q.canonicalize();
  return neg ? Rational(-q) : q;
}

Rational from_double(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("non-finite value has no rational form");
  Rational q;
  mpq_set_d(q.get_mpq_t(), v);
  return q;
}

double to_double(const Rational& q) {
  // mpq_get_d truncates toward zero; fix up to round-to-nearest-even.
  double t = mpq_get_d(q.get_mpq_t());
  if (!std::isfinite(t)) return t;
  Rational tq = from_double(t);
  if (tq == q) return t;
  double away = std::nextafter(t, q > tq ? HUGE_VAL : -HUGE_VAL);
  if (!std::isfinite(away)) return t;
  Rational aq = from_double(away);
  Rational dt = abs(q - tq);
  Rational da = abs(q - aq);
  if (da < dt) return away;
  if (dt < da) return t;
  std::uint64_t bits = 0;
  std::memcpy(&bits, &t, sizeof bits);
  return (bits & 1U) == 0 ? t : away;
}

std::string to_decimal_string(const Rational& q) {
  mpz_class den = q.get_den();
  unsigned long twos = 0;
  unsigned long fives = 0;
  while (mpz_divisible_ui_p(den.get_mpz_t(), 2)) {
    den /= 2;
    ++twos;
  }
  while (mpz_divisible_ui_p(den.get_mpz_t(), 5)) {
    den /= 5;
    ++fives;
  }
  if (den != 1) return q.get_str();

  unsigned long places = std::max(twos, fives);
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, places);
  mpz_class scaled = q.get_num() * scale / q.get_den();
  bool neg = scaled < 0;
  std::string digits = mpz_class(abs(scaled)).get_str();
  if (places > 0) {
    if (digits.size() <= places) digits.insert(0, places - digits.size() + 1, '0');
    digits.insert(digits.size() - places, ".");
  }
  return neg ? "-" + digits : digits;
}

}  // namespace rampo
