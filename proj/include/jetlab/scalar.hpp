#pragma once

#include <gmpxx.h>

#include <cmath>
#include <concepts>
#include <string>

namespace jetlab {

using Rational = mpq_class;

template <class S>
concept Scalar = std::same_as<S, double> || std::same_as<S, Rational>;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.get_d(); }

inline bool is_zero(double x) { return x == 0.0; }
inline bool is_zero(const Rational& x) { return sgn(x) == 0; }

inline double abs_value(double x) { return std::fabs(x); }
inline double abs_value(const Rational& x) { return std::fabs(x.get_d()); }

// Exact conversion: every finite double is a dyadic rational.
template <Scalar S>
S from_double(double x) {
  if constexpr (std::same_as<S, double>) {
    return x;
  } else {
    return Rational(x);
  }
}

template <Scalar S>
S ratio(long p, long q) {
  if constexpr (std::same_as<S, double>) {
    return static_cast<double>(p) / static_cast<double>(q);
  } else {
    Rational out(p, q);
    out.canonicalize();
    return out;
  }
}

// Accepts "p/q", "p", or a decimal literal like "0.25" (converted exactly).
Rational parse_rational(const std::string& text);
std::string format_rational(const Rational& x);

}  // namespace jetlab
