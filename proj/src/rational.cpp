#include "dsmv/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace dsmv {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char ch : s) {
    if (!std::isdigit(static_cast<unsigned char>(ch))) return false;
  }
  return true;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  Rational result;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto num = s.substr(0, slash);
    auto den = s.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) {
      throw std::invalid_argument("malformed rational: " + std::string(text));
    }
    Integer d{std::string(den)};
    if (d == 0) throw std::invalid_argument("zero denominator: " + std::string(text));
    result = Rational(Integer(std::string(num)), d);
  } else if (auto dot = s.find('.'); dot != std::string_view::npos) {
    auto whole = s.substr(0, dot);
    auto frac = s.substr(dot + 1);
    if ((!whole.empty() && !all_digits(whole)) || !all_digits(frac)) {
      throw std::invalid_argument("malformed decimal: " + std::string(text));
    }
    Integer scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    Integer w = whole.empty() ? Integer(0) : Integer(std::string(whole));
    result = Rational(w * scale + Integer(std::string(frac)), scale);
  } else {
    if (!all_digits(s)) throw std::invalid_argument("malformed number: " + std::string(text));
    result = Rational(Integer(std::string(s)));
  }
  result.canonicalize();
  return negative ? Rational(-result) : result;
}

std::string to_string(const Rational& value) { return value.get_str(); }

std::string to_decimal(const Rational& value, int digits) {
  if (is_integer(value)) return value.get_num().get_str();
  Integer scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  Rational scaled = value * scale;
  Integer rounded = floor(scaled + Rational(1, 2)).get_num();
  bool negative = rounded < 0;
  if (negative) rounded = -rounded;
  std::string digits_str = rounded.get_str();
  if (static_cast<int>(digits_str.size()) <= digits) {
    digits_str.insert(0, static_cast<std::size_t>(digits) + 1 - digits_str.size(), '0');
  }
  std::string out = digits_str.substr(0, digits_str.size() - static_cast<std::size_t>(digits)) + "." +
                    digits_str.substr(digits_str.size() - static_cast<std::size_t>(digits));
  while (out.back() == '0') out.pop_back();
  if (out.back() == '.') out.pop_back();
  return negative ? "-" + out : out;
}

double to_double(const Rational& value) { return value.get_d(); }

Rational floor(const Rational& value) {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), value.get_num_mpz_t(), value.get_den_mpz_t());
  return Rational(q);
}

Rational ceil(const Rational& value) {
  Integer q;
  mpz_cdiv_q(q.get_mpz_t(), value.get_num_mpz_t(), value.get_den_mpz_t());
  return Rational(q);
}

bool is_integer(const Rational& value) { return value.get_den() == 1; }

std::int64_t to_int64(const Rational& value) {
  if (!is_integer(value) || !mpz_fits_slong_p(value.get_num_mpz_t())) {
    throw std::overflow_error("value does not fit in a 64-bit integer: " + to_string(value));
  }
  return static_cast<std::int64_t>(mpz_get_si(value.get_num_mpz_t()));
}

}  // namespace dsmv
