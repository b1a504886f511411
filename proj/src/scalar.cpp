#include "jetlab/scalar.hpp"

#include <cctype>
#include <stdexcept>

#include "jetlab/error.hpp"

namespace jetlab {

Rational parse_rational(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  require(!s.empty(), "parse", "empty rational literal");
  const auto dot = s.find('.');
  const auto exp = s.find_first_of("eE");
  if (dot != std::string::npos || exp != std::string::npos) {
    // Decimal literal: exact value of the decimal string, not of its double.
    std::string mant = exp == std::string::npos ? s : s.substr(0, exp);
    long e10 = 0;
    if (exp != std::string::npos) {
      try {
        e10 = std::stol(s.substr(exp + 1));
      } catch (const std::exception&) {
        throw Error("parse", "invalid rational literal '" + text + "'");
      }
    }
    std::string digits;
    long frac = 0;
    bool seen_dot = false;
    for (char c : mant) {
      if (c == '.') {
        require(!seen_dot, "parse", "invalid rational literal '" + text + "'");
        seen_dot = true;
      } else {
        digits += c;
        if (seen_dot) ++frac;
      }
    }
    Rational num;
    if (num.set_str(digits, 10) != 0) throw Error("parse", "invalid rational literal '" + text + "'");
    long shift = e10 - frac;
    mpz_class p10;
    mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(shift < 0 ? -shift : shift));
    Rational out = shift < 0 ? Rational(num / Rational(p10)) : Rational(num * Rational(p10));
    out.canonicalize();
    return out;
  }
  Rational out;
  if (out.set_str(s, 10) != 0) throw Error("parse", "invalid rational literal '" + text + "'");
  require(sgn(out.get_den()) != 0, "parse", "zero denominator in '" + text + "'");
  out.canonicalize();
  return out;
}

std::string format_rational(const Rational& x) { return x.get_str(); }

}  // namespace jetlab
