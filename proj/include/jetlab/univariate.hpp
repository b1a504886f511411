#pragma once

#include <cmath>
#include <vector>

#include "jetlab/error.hpp"
#include "jetlab/scalar.hpp"

namespace jetlab {

inline std::vector<double> sin_derivatives(double c, int order) {
  std::vector<double> d(order + 1);
  const double s = std::sin(c), co = std::cos(c);
  const double cycle[4] = {s, co, -s, -co};
  for (int k = 0; k <= order; ++k) d[k] = cycle[k % 4];
  return d;
}

inline std::vector<double> cos_derivatives(double c, int order) {
  std::vector<double> d(order + 1);
  const double s = std::sin(c), co = std::cos(c);
  const double cycle[4] = {co, -s, -co, s};
  for (int k = 0; k <= order; ++k) d[k] = cycle[k % 4];
  return d;
}

inline std::vector<double> exp_derivatives(double c, int order) { return std::vector<double>(order + 1, std::exp(c)); }

// d^k/dt^k t^e at t = c for real e (c > 0 required unless e is an integer).
inline std::vector<double> real_power_derivatives(double c, double e, int order) {
  std::vector<double> d(order + 1);
  double falling = 1.0;
  for (int k = 0; k <= order; ++k) {
    d[k] = falling * std::pow(c, e - k);
    falling *= (e - k);
  }
  return d;
}

// Integer exponent, exact in either scalar mode; c != 0 when e < 0.
template <Scalar S>
std::vector<S> integer_power_derivatives(const S& c, long e, int order) {
  std::vector<S> d(order + 1);
  for (int k = 0; k <= order; ++k) {
    long p = e - k;
    S falling(1);
    for (int j = 0; j < k; ++j) falling *= S(e - j);
    if (is_zero(falling)) {
      d[k] = S(0);
      continue;
    }
    S powv(1);
    if (p >= 0) {
      for (long j = 0; j < p; ++j) powv *= c;
    } else {
      require(!is_zero(c), "domain", "negative power evaluated at zero");
      S inv = S(1) / c;
      for (long j = 0; j < -p; ++j) powv *= inv;
    }
    d[k] = falling * powv;
  }
  return d;
}

}  // namespace jetlab
