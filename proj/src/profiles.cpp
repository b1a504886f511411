#include "jetlab/profiles.hpp"

#include <cmath>

#include "jetlab/error.hpp"
#include "jetlab/multi_index.hpp"

namespace jetlab {

namespace {

double horner(const std::vector<double>& c, double t) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * t + *it;
  return v;
}

double sup_on_unit_interval(const std::vector<double>& c) {
  const int samples = 4000;
  double best = 0.0;
  int best_i = 0;
  for (int i = 0; i <= samples; ++i) {
    double v = std::fabs(horner(c, static_cast<double>(i) / samples));
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  // Golden-section polish around the best sample.
  double lo = std::max(0.0, (best_i - 1.0) / samples), hi = std::min(1.0, (best_i + 1.0) / samples);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 60; ++it) {
    double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
    if (std::fabs(horner(c, a)) > std::fabs(horner(c, b)))
      hi = b;
    else
      lo = a;
  }
  return std::max(best, std::fabs(horner(c, 0.5 * (lo + hi))));
}

}  // namespace

Smoothstep::Smoothstep(int K) : K_(K) {
  require(K >= 0 && K <= 20, "precondition", "smoothstep order must lie in [0, 20]");
  std::vector<double> c(2 * K + 2, 0.0);
  for (int n = 0; n <= K; ++n) {
    double coeff = static_cast<double>(binomial(K + n, n)) * static_cast<double>(binomial(2 * K + 1, K - n));
    c[K + 1 + n] = (n % 2 == 0) ? coeff : -coeff;
  }
  derivative_coeffs_.push_back(c);
  for (int k = 1; k <= 2 * K + 1; ++k) {
    const auto& prev = derivative_coeffs_.back();
    std::vector<double> d(prev.size() > 1 ? prev.size() - 1 : 1, 0.0);
    for (std::size_t i = 1; i < prev.size(); ++i) d[i - 1] = prev[i] * static_cast<double>(i);
    derivative_coeffs_.push_back(d);
  }
  for (const auto& d : derivative_coeffs_) sup_.push_back(sup_on_unit_interval(d));
}

double Smoothstep::value(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return horner(derivative_coeffs_[0], t);
}

std::vector<double> Smoothstep::derivatives(double t, int order) const {
  std::vector<double> d(order + 1, 0.0);
  if (t <= 0.0) return d;
  if (t >= 1.0) {
    d[0] = 1.0;
    return d;
  }
  for (int k = 0; k <= order && k < static_cast<int>(derivative_coeffs_.size()); ++k)
    d[k] = horner(derivative_coeffs_[k], t);
  return d;
}

double Smoothstep::sup_derivative(int k) const {
  if (k < 0) return 0.0;
  if (k >= static_cast<int>(sup_.size())) return 0.0;
  return sup_[k];
}

Profile::Profile(ProfileKind kind, double inner, double outer, int smoothness)
    : kind_(kind), inner_(inner), outer_(outer), step_(smoothness) {
  if (kind != ProfileKind::Step)
    require(inner >= 0.0 && outer > inner, "precondition", "profile needs 0 <= inner < outer");
}

Profile Profile::plateau(double inner, double outer, int smoothness) {
  return Profile(ProfileKind::Plateau, inner, outer, smoothness);
}
Profile Profile::transition(double inner, double outer, int smoothness) {
  return Profile(ProfileKind::Transition, inner, outer, smoothness);
}
Profile Profile::step(int smoothness) { return Profile(ProfileKind::Step, -1.0, 1.0, smoothness); }

double Profile::value(double t) const { return derivatives(t, 0)[0]; }

std::vector<double> Profile::derivatives(double t, int order) const {
  if (kind_ == ProfileKind::Step) {
    auto d = step_.derivatives(0.5 * (t + 1.0), order);
    double scale = 2.0;
    for (int k = 0; k <= order; ++k) {
      d[k] *= scale;
      scale *= 0.5;
    }
    d[0] -= 1.0;
    return d;
  }
  const double w = outer_ - inner_;
  const double sign = t < 0.0 ? -1.0 : 1.0;
  auto d = step_.derivatives((std::fabs(t) - inner_) / w, order);
  double scale = 1.0;
  for (int k = 1; k <= order; ++k) {
    scale *= sign / w;
    d[k] *= scale;
  }
  if (kind_ == ProfileKind::Plateau) {
    d[0] = 1.0 - d[0];
    for (int k = 1; k <= order; ++k) d[k] = -d[k];
  }
  return d;
}

double Profile::sup_derivative(int k) const {
  if (k == 0) return 1.0;
  const double w = kind_ == ProfileKind::Step ? 2.0 : outer_ - inner_;
  const double factor = kind_ == ProfileKind::Step ? 2.0 : 1.0;
  return factor * step_.sup_derivative(k) / std::pow(w, k);
}

}  // namespace jetlab
