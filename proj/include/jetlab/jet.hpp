#pragma once

#include <optional>
#include <span>
#include <vector>

#include "jetlab/truncated_poly.hpp"

namespace jetlab {

// r-jet of a map R^m -> R^n at `base`: one Taylor polynomial per output
// component, written in the offset variables X = y - base.
template <Scalar S>
struct Jet {
  std::vector<S> base;
  std::vector<TruncatedPoly<S>> components;

  int m() const { return static_cast<int>(base.size()); }
  int n() const { return static_cast<int>(components.size()); }
  int r() const { return components.empty() ? 0 : components[0].order(); }

  static Jet zero(std::vector<S> base, int n, int r) {
    Jet j;
    LayoutPtr lay = Layout::get(static_cast<int>(base.size()), r);
    j.base = std::move(base);
    j.components.assign(n, TruncatedPoly<S>(lay));
    return j;
  }

  // D_alpha = alpha! * coefficient.
  S derivative(int component, std::size_t slot) const {
    const auto& p = components.at(component);
    return p[slot] * from_double<S>(p.layout().alpha_factorial(slot));
  }
  S derivative(int component, const MultiIndex& alpha) const {
    int slot = components.at(component).layout().find(alpha);
    return slot < 0 ? S(0) : derivative(component, static_cast<std::size_t>(slot));
  }

  std::vector<S> values() const {
    std::vector<S> v;
    v.reserve(components.size());
    for (const auto& p : components) v.push_back(p.constant_term());
    return v;
  }

  bool is_zero() const {
    for (const auto& p : components)
      if (!p.is_zero()) return false;
    return true;
  }

  void validate() const {
    for (const auto& p : components) {
      require(p.dim() == m(), "shape_mismatch", "jet component dimension differs from base dimension");
      require(p.layout_ptr() == components[0].layout_ptr(), "shape_mismatch", "jet components differ in order");
    }
  }
};

template <Scalar S>
Jet<S> jet_combine(const Jet<S>& a, const Jet<S>& b, const S& lambda, const S& mu) {
  require(a.base == b.base, "shape_mismatch", "jet_combine needs a common base point");
  require(a.n() == b.n() && a.m() == b.m() && a.r() == b.r(), "shape_mismatch", "jet_combine needs matching (m, n, r)");
  Jet<S> out;
  out.base = a.base;
  out.components.reserve(a.n());
  for (int c = 0; c < a.n(); ++c) out.components.push_back(a.components[c] * lambda + b.components[c] * mu);
  return out;
}

template <Scalar S>
Jet<S> jet_project(const Jet<S>& s, int l) {
  require(l >= 0 && l <= s.r(), "precondition", "jet_project needs 0 <= l <= r");
  Jet<S> out;
  out.base = s.base;
  for (const auto& p : s.components) out.components.push_back(p.truncated(l));
  return out;
}

namespace detail {
inline bool base_matches(double a, double b, double tol) { return std::fabs(a - b) <= tol * (1.0 + std::fabs(a)); }
inline bool base_matches(const Rational& a, const Rational& b, double) { return a == b; }
}  // namespace detail

// j^r(h o F)(x) from outer = j^r h(F(x)) and inner = j^r F(x), one inner jet
// per outer variable (either given as separate scalar jets or as the
// components of one map jet).
template <Scalar S>
Jet<S> jet_compose(const Jet<S>& outer, const Jet<S>& inner, double tol = 1e-9) {
  require(inner.n() == outer.m(), "shape_mismatch", "outer jet dimension must equal number of inner components");
  require(inner.r() == outer.r(), "shape_mismatch", "outer and inner jets must share the order");
  for (int j = 0; j < inner.n(); ++j) {
    if (!detail::base_matches(inner.components[j].constant_term(), outer.base[j], tol))
      throw Error("shape_mismatch", "outer base does not match the inner value at component " + std::to_string(j));
  }
  std::vector<TruncatedPoly<S>> offsets = inner.components;
  for (auto& q : offsets) q[0] = S(0);
  auto mono = substitute_monomials<S>(outer.components.empty() ? *Layout::get(outer.m(), outer.r())
                                                                : outer.components[0].layout(),
                                      std::span<const TruncatedPoly<S>>(offsets));
  Jet<S> out;
  out.base = inner.base;
  for (const auto& oc : outer.components) {
    TruncatedPoly<S> acc(inner.components[0].layout_ptr());
    for (std::size_t i = 0; i < mono.size(); ++i) {
      if (is_zero(oc[i])) continue;
      for (std::size_t k = 0; k < acc.size(); ++k)
        if (!is_zero(mono[i][k])) acc[k] += oc[i] * mono[i][k];
    }
    out.components.push_back(std::move(acc));
  }
  return out;
}

template <Scalar S>
Jet<S> jet_compose(const Jet<S>& outer, std::span<const Jet<S>> inner, double tol = 1e-9) {
  require(!inner.empty(), "shape_mismatch", "jet_compose needs at least one inner jet");
  Jet<S> stacked;
  stacked.base = inner[0].base;
  for (const auto& j : inner) {
    require(j.base == stacked.base, "shape_mismatch", "inner jets must share a base point");
    for (const auto& c : j.components) stacked.components.push_back(c);
  }
  return jet_compose(outer, stacked, tol);
}

// Jet at y = F(x) of F^{-1}, given the map jet j^r F(x) (n == m).
// Fixed-derivative Newton on the truncated series; each sweep fixes one more
// degree, so r sweeps reach the full order.
template <Scalar S>
Jet<S> jet_inverse(const Jet<S>& map_jet);

struct JetNorms {
  double c0 = 0.0;
  std::optional<double> perp;
};

// c0 = max_alpha |D_alpha| (Euclidean across components); perp = max over
// |alpha| < r of the spectral norm of the gradient block restricted to u^perp.
JetNorms jet_norms(const Jet<double>& s, std::optional<std::span<const double>> u = std::nullopt,
                   double unit_tolerance = 1e-9);
JetNorms jet_norms(const Jet<Rational>& s, std::optional<std::span<const double>> u = std::nullopt,
                   double unit_tolerance = 1e-9);

Jet<double> to_double(const Jet<Rational>& s);

}  // namespace jetlab
