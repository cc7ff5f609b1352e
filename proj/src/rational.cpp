#include "riffle/rational.hpp"

#include <cctype>
#include <cmath>

#include "riffle/error.hpp"

namespace riffle {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view s = trim(text);
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  Rational out;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto num = trim(s.substr(0, slash));
    auto den = trim(s.substr(slash + 1));
    if (!all_digits(num) || !all_digits(den)) throw Error(ErrorKind::InvalidSpec, "bad rational '" + std::string(text) + "'");
    mpz_class q{std::string(den), 10};
    if (q == 0) throw Error(ErrorKind::InvalidSpec, "zero denominator in '" + std::string(text) + "'");
    out = Rational(mpz_class{std::string(num), 10}, q);
  } else if (auto dot = s.find('.'); dot != std::string_view::npos) {
    auto whole = s.substr(0, dot);
    auto frac = s.substr(dot + 1);
    if ((!whole.empty() && !all_digits(whole)) || (!frac.empty() && !all_digits(frac)) ||
        (whole.empty() && frac.empty()))
      throw Error(ErrorKind::InvalidSpec, "bad decimal '" + std::string(text) + "'");
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
    mpz_class digits{std::string(whole.empty() ? "0" : whole) + std::string(frac), 10};
    out = Rational(digits, scale);
  } else {
    if (!all_digits(s)) throw Error(ErrorKind::InvalidSpec, "bad rational '" + std::string(text) + "'");
    out = Rational(mpz_class{std::string(s), 10});
  }
  out.canonicalize();
  return negative ? Rational(-out) : out;
}

std::string to_string(const Rational& r) { return r.get_str(); }

Rational exact(double x) {
  if (!std::isfinite(x)) throw Error(ErrorKind::OutOfRange, "non-finite value");
  return Rational(x);
}

int compare_exact(double x, const Rational& r) {
  int c = cmp(exact(x), r);
  return (c > 0) - (c < 0);
}

}  // namespace riffle
