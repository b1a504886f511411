#pragma once

#include <span>
#include <string>
#include <vector>

#include "jetlab/error.hpp"
#include "jetlab/multi_index.hpp"
#include "jetlab/scalar.hpp"

namespace jetlab {

// Dense polynomial in m variables truncated at total degree r. Coefficients
// are stored in the Layout's graded-lex order.
template <Scalar S>
class TruncatedPoly {
 public:
  TruncatedPoly() = default;
  TruncatedPoly(int m, int r) : TruncatedPoly(Layout::get(m, r)) {}
  explicit TruncatedPoly(LayoutPtr layout) : layout_(std::move(layout)), c_(layout_->size(), S(0)) {}

  static TruncatedPoly constant(LayoutPtr layout, const S& value) {
    TruncatedPoly p(std::move(layout));
    p.c_[0] = value;
    return p;
  }
  static TruncatedPoly constant(int m, int r, const S& value) { return constant(Layout::get(m, r), value); }

  // center + X_var
  static TruncatedPoly variable(LayoutPtr layout, int var, const S& center) {
    TruncatedPoly p(std::move(layout));
    require(var >= 0 && var < p.dim(), "precondition", "variable index out of range");
    p.c_[0] = center;
    if (p.order() >= 1) p.c_[1 + var] = S(1);
    return p;
  }
  static TruncatedPoly variable(int m, int r, int var, const S& center) {
    return variable(Layout::get(m, r), var, center);
  }

  int dim() const { return layout_->dim(); }
  int order() const { return layout_->order(); }
  std::size_t size() const { return c_.size(); }
  const Layout& layout() const { return *layout_; }
  const LayoutPtr& layout_ptr() const { return layout_; }
  bool empty() const { return !layout_; }

  const S& operator[](std::size_t i) const { return c_[i]; }
  S& operator[](std::size_t i) { return c_[i]; }
  const std::vector<S>& coeffs() const { return c_; }
  const S& constant_term() const { return c_[0]; }

  S coeff(const MultiIndex& alpha) const {
    int i = layout_->find(alpha);
    return i < 0 ? S(0) : c_[i];
  }
  void set_coeff(const MultiIndex& alpha, const S& value) {
    int i = layout_->find(alpha);
    require(i >= 0, "shape_mismatch", "multi-index outside the truncation");
    c_[i] = value;
  }

  bool is_zero() const {
    for (const S& x : c_)
      if (!jetlab::is_zero(x)) return false;
    return true;
  }

  TruncatedPoly& operator+=(const TruncatedPoly& o) {
    check_same(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  TruncatedPoly& operator-=(const TruncatedPoly& o) {
    check_same(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  TruncatedPoly& operator*=(const S& s) {
    for (S& x : c_) x *= s;
    return *this;
  }
  TruncatedPoly& operator*=(const TruncatedPoly& o) {
    *this = *this * o;
    return *this;
  }
  TruncatedPoly& add_constant(const S& s) {
    c_[0] += s;
    return *this;
  }

  friend TruncatedPoly operator+(TruncatedPoly a, const TruncatedPoly& b) { return a += b; }
  friend TruncatedPoly operator-(TruncatedPoly a, const TruncatedPoly& b) { return a -= b; }
  friend TruncatedPoly operator*(TruncatedPoly a, const S& s) { return a *= s; }
  friend TruncatedPoly operator*(const S& s, TruncatedPoly a) { return a *= s; }
  friend TruncatedPoly operator-(TruncatedPoly a) {
    for (S& x : a.c_) x = -x;
    return a;
  }

  friend TruncatedPoly operator*(const TruncatedPoly& a, const TruncatedPoly& b) {
    a.check_same(b);
    TruncatedPoly out(a.layout_);
    const auto& prods = a.layout_->products();
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
      if (jetlab::is_zero(a.c_[i])) continue;
      const S& ai = a.c_[i];
      for (std::size_t p = a.layout_->products_begin(i); p < a.layout_->products_end(i); ++p) {
        const auto& pr = prods[p];
        if (jetlab::is_zero(b.c_[pr.rhs])) continue;
        out.c_[pr.out] += ai * b.c_[pr.rhs];
      }
    }
    return out;
  }

  friend bool operator==(const TruncatedPoly& a, const TruncatedPoly& b) {
    return a.layout_ == b.layout_ && a.c_ == b.c_;
  }

  // Same polynomial with degrees > l dropped, as an order-l object.
  TruncatedPoly truncated(int l) const {
    require(l >= 0 && l <= order(), "precondition", "projection order must satisfy 0 <= l <= r");
    TruncatedPoly out(Layout::get(dim(), l));
    for (std::size_t i = 0; i < out.size(); ++i) out.c_[i] = c_[i];
    return out;
  }

  // Re-embed into a larger truncation order (new slots zero).
  TruncatedPoly extended(int r) const {
    require(r >= order(), "precondition", "extension must not lower the order");
    TruncatedPoly out(Layout::get(dim(), r));
    for (std::size_t i = 0; i < size(); ++i) out.c_[i] = c_[i];
    return out;
  }

  TruncatedPoly homogeneous_part(int d) const {
    TruncatedPoly out(layout_);
    if (d < 0 || d > order()) return out;
    for (std::size_t i = layout_->degree_begin(d); i < layout_->degree_begin(d + 1); ++i) out.c_[i] = c_[i];
    return out;
  }

  // Value of the polynomial at offset X.
  S evaluate(std::span<const S> X) const {
    require(static_cast<int>(X.size()) == dim(), "shape_mismatch", "evaluation point has wrong dimension");
    S total(0);
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (jetlab::is_zero(c_[i])) continue;
      S term = c_[i];
      const MultiIndex& a = layout_->index(i);
      for (int v = 0; v < dim(); ++v)
        for (int e = 0; e < a[v]; ++e) term *= X[v];
      total += term;
    }
    return total;
  }

  // Partial derivative d/dX_var, kept at the same (m, r) with the top degree zero.
  TruncatedPoly derivative(int var) const {
    TruncatedPoly out(layout_);
    for (std::size_t i = 0; i < c_.size(); ++i) {
      int up = layout_->raise(i, var);
      if (up < 0) continue;
      S k(layout_->index(up)[var]);
      out.c_[i] = c_[up] * k;
    }
    return out;
  }

 private:
  void check_same(const TruncatedPoly& o) const {
    if (layout_ != o.layout_) throw Error("shape_mismatch", "truncated polynomials have different (m, r)");
  }

  LayoutPtr layout_;
  std::vector<S> c_;
};

// sum_k derivs[k]/k! * (arg - arg(0))^k, i.e. the jet of f(arg) when derivs
// holds f, f', f'', ... evaluated at arg's constant term.
template <Scalar S>
TruncatedPoly<S> compose_univariate(std::span<const S> derivs, const TruncatedPoly<S>& arg) {
  const int r = arg.order();
  require(static_cast<int>(derivs.size()) >= r + 1, "precondition", "not enough derivatives for composition");
  TruncatedPoly<S> q = arg;
  q[0] = S(0);
  S fact(1);
  std::vector<S> t(r + 1);
  for (int k = 0; k <= r; ++k) {
    if (k > 0) fact *= S(k);
    t[k] = derivs[k] / fact;
  }
  TruncatedPoly<S> res = TruncatedPoly<S>::constant(arg.layout_ptr(), t[r]);
  for (int k = r - 1; k >= 0; --k) {
    res = res * q;
    res.add_constant(t[k]);
  }
  return res;
}

template <Scalar S>
TruncatedPoly<S> pow(const TruncatedPoly<S>& base, int e) {
  require(e >= 0, "precondition", "pow expects a non-negative integer exponent");
  TruncatedPoly<S> result = TruncatedPoly<S>::constant(base.layout_ptr(), S(1));
  TruncatedPoly<S> b = base;
  while (e > 0) {
    if (e & 1) result = result * b;
    e >>= 1;
    if (e) b = b * b;
  }
  return result;
}

// outer(Z_0..Z_{k-1}) with Z_j := offsets[j]. Offsets must have zero constant
// term; outer is a polynomial in k variables of the same order as the offsets.
template <Scalar S>
std::vector<TruncatedPoly<S>> substitute_monomials(const Layout& outer_layout,
                                                   std::span<const TruncatedPoly<S>> offsets) {
  require(static_cast<int>(offsets.size()) == outer_layout.dim(), "shape_mismatch",
          "substitution needs one polynomial per outer variable");
  require(!offsets.empty(), "shape_mismatch", "substitution needs at least one variable");
  const LayoutPtr& lay = offsets[0].layout_ptr();
  std::vector<TruncatedPoly<S>> mono(outer_layout.size());
  mono[0] = TruncatedPoly<S>::constant(lay, S(1));
  for (std::size_t i = 1; i < outer_layout.size(); ++i) {
    const MultiIndex& a = outer_layout.index(i);
    int v = 0;
    while (a[v] == 0) ++v;
    int parent = outer_layout.lower(i, v);
    mono[i] = mono[parent] * offsets[v];
  }
  return mono;
}

template <Scalar S>
TruncatedPoly<S> substitute(const TruncatedPoly<S>& outer, std::span<const TruncatedPoly<S>> offsets) {
  require(!offsets.empty(), "shape_mismatch", "substitution needs at least one variable");
  const int r = offsets[0].order();
  require(outer.order() >= r, "shape_mismatch", "outer polynomial order below the target order");
  for (const auto& q : offsets) {
    require(q.layout_ptr() == offsets[0].layout_ptr(), "shape_mismatch", "offset polynomials differ in shape");
    require(is_zero(q.constant_term()), "precondition", "substitution offsets must vanish at the base point");
  }
  const Layout& lay = outer.layout();
  // Only monomials of degree <= r can contribute.
  LayoutPtr used = Layout::get(lay.dim(), r);
  auto mono = substitute_monomials<S>(*used, offsets);
  TruncatedPoly<S> out(offsets[0].layout_ptr());
  for (std::size_t i = 0; i < used->size(); ++i) {
    const S& c = outer[i];
    if (is_zero(c)) continue;
    const auto& mi = mono[i];
    for (std::size_t k = 0; k < out.size(); ++k)
      if (!is_zero(mi[k])) out[k] += c * mi[k];
  }
  return out;
}

TruncatedPoly<double> to_double(const TruncatedPoly<Rational>& p);

template <Scalar S>
std::string to_string(const TruncatedPoly<S>& p);

}  // namespace jetlab
