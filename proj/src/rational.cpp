#include "dvfh/rational.hpp"

#include <cmath>
#include <stdexcept>

namespace dvfh {

Rational pow2(std::int64_t exp) {
  Integer p = 1;
  if (exp >= 0) {
    mpz_mul_2exp(p.get_mpz_t(), p.get_mpz_t(), static_cast<mp_bitcnt_t>(exp));
    return Rational(p);
  }
  mpz_mul_2exp(p.get_mpz_t(), p.get_mpz_t(), static_cast<mp_bitcnt_t>(-exp));
  return Rational(Integer(1), p);
}

std::string to_string(const Rational& r) {
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

Integer parse_integer(std::string_view s) {
  bool neg = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    neg = s.front() == '-';
    s.remove_prefix(1);
  }
  if (!all_digits(s)) throw std::invalid_argument("not an integer");
  Integer v(std::string(s), 10);
  return neg ? Integer(-v) : v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const std::string_view s = trim(text);
  try {
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
      Integer num = parse_integer(trim(s.substr(0, slash)));
      Integer den = parse_integer(trim(s.substr(slash + 1)));
      if (den == 0) throw std::invalid_argument("zero denominator");
      Rational r(num, den);
      r.canonicalize();
      return r;
    }
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
      std::string_view whole = s.substr(0, dot);
      std::string_view frac = s.substr(dot + 1);
      bool neg = !whole.empty() && whole.front() == '-';
      if (!whole.empty() && (whole.front() == '-' || whole.front() == '+')) whole.remove_prefix(1);
      if (whole.empty()) whole = "0";
      if (!all_digits(whole) || (!frac.empty() && !all_digits(frac))) {
        throw std::invalid_argument("bad decimal");
      }
      Integer scale;
      mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
      Integer num = Integer(std::string(whole), 10) * scale;
      if (!frac.empty()) num += Integer(std::string(frac), 10);
      if (neg) num = -num;
      Rational r(num, scale);
      r.canonicalize();
      return r;
    }
    return Rational(parse_integer(s));
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("cannot parse rational: '" + std::string(text) + "'");
  }
}

double to_double(const Rational& r) { return r.get_d(); }

double log2_of(const Rational& r) {
  if (sgn(r) <= 0) throw std::domain_error("log2 of non-positive rational");
  long num_exp = 0;
  long den_exp = 0;
  double num_mant = mpz_get_d_2exp(&num_exp, r.get_num_mpz_t());
  double den_mant = mpz_get_d_2exp(&den_exp, r.get_den_mpz_t());
  return std::log2(num_mant) - std::log2(den_mant) + static_cast<double>(num_exp - den_exp);
}

}  // namespace dvfh
