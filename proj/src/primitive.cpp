#include "jetlab/primitive.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace jetlab {

namespace {

Field scale_exact(const Field& f, const Rational& w) {
  if (f.expressions()) {
    std::vector<Expr> comps;
    for (const auto& e : *f.expressions()) comps.push_back(Expr::mul({Expr::constant(w), e}));
    return Field::from_expressions(std::move(comps), f.in_dim());
  }
  return f.scaled(w.get_d());
}

// sum of w * f over the terms, skipping literal-zero fields.
Field linear_combination(const std::vector<std::pair<Rational, Field>>& terms, int m, int n) {
  std::vector<std::pair<Rational, Field>> live;
  bool all_expr = true;
  for (const auto& [w, f] : terms) {
    if (w == 0 || f.is_literal_zero()) continue;
    live.emplace_back(w, f);
    all_expr = all_expr && f.expressions().has_value();
  }
  if (live.empty()) return Field::zero(m, n);
  if (all_expr) {
    std::vector<Expr> comps;
    for (int c = 0; c < n; ++c) {
      std::vector<Expr> sum;
      for (const auto& [w, f] : live) sum.push_back(Expr::mul({Expr::constant(w), (*f.expressions())[c]}));
      comps.push_back(sum.size() == 1 ? sum[0] : Expr::add(sum));
    }
    return Field::from_expressions(std::move(comps), m);
  }
  std::vector<std::pair<double, Field>> dl;
  for (const auto& [w, f] : live) dl.emplace_back(w.get_d(), f);
  return Field(m, n, [dl](std::span<const double> x, int order) {
    auto out = dl[0].second.jet_components(x, order);
    for (auto& p : out) p *= dl[0].first;
    for (std::size_t t = 1; t < dl.size(); ++t) {
      auto q = dl[t].second.jet_components(x, order);
      for (std::size_t c = 0; c < out.size(); ++c) out[c] += q[c] * dl[t].first;
    }
    return out;
  });
}

template <Scalar S>
TruncatedPoly<S> linear_form(const LayoutPtr& lay, std::span<const S> u) {
  TruncatedPoly<S> p(lay);
  if (lay->order() >= 1)
    for (int i = 0; i < lay->dim(); ++i) p[1 + i] = u[i];
  return p;
}

}  // namespace

PrimitiveSection PrimitiveSection::with_constant_conormal(Field v, std::vector<double> u, int r) {
  require(static_cast<int>(u.size()) == v.in_dim(), "shape_mismatch", "co-normal dimension differs from m");
  require(r >= 0, "precondition", "order must be >= 0");
  PrimitiveSection s;
  s.m = v.in_dim();
  s.n = v.out_dim();
  s.r = r;
  s.v = std::move(v);
  s.conormal = HyperplaneField::constant(u);
  std::vector<Rational> q;
  for (double x : u) q.emplace_back(x);
  s.exact_conormal = std::move(q);
  return s;
}

PrimitiveSection PrimitiveSection::with_constant_conormal(Field v, const std::vector<Rational>& u, int r) {
  std::vector<double> d;
  for (const auto& q : u) d.push_back(q.get_d());
  PrimitiveSection s = with_constant_conormal(std::move(v), d, r);
  s.exact_conormal = u;
  return s;
}

PrimitiveSection PrimitiveSection::with_conormal_field(Field v, HyperplaneField u, int r) {
  require(u.dim() == v.in_dim(), "shape_mismatch", "co-normal dimension differs from m");
  require(r >= 0, "precondition", "order must be >= 0");
  PrimitiveSection s;
  s.m = v.in_dim();
  s.n = v.out_dim();
  s.r = r;
  s.v = std::move(v);
  s.conormal = std::move(u);
  return s;
}

Jet<double> PrimitiveSection::jet(std::span<const double> x) const {
  auto u = conormal.raw(x);
  double nrm = 0.0;
  for (double c : u) nrm += c * c;
  require(nrm > 0.0, "domain", "co-normal vanishes at the evaluation point");
  LayoutPtr lay = Layout::get(m, r);
  TruncatedPoly<double> P = pow(linear_form<double>(lay, u), r);
  auto val = v.value(x);
  Jet<double> j;
  j.base.assign(x.begin(), x.end());
  for (int c = 0; c < n; ++c) j.components.push_back(P * val[c]);
  return j;
}

Jet<Rational> PrimitiveSection::jet_exact(std::span<const Rational> x) const {
  require(exact_conormal.has_value(), "domain", "exact evaluation needs a constant rational co-normal");
  LayoutPtr lay = Layout::get(m, r);
  TruncatedPoly<Rational> P = pow(linear_form<Rational>(lay, *exact_conormal), r);
  auto val = v.jet_exact(x, 0).values();
  Jet<Rational> j;
  j.base.assign(x.begin(), x.end());
  for (int c = 0; c < n; ++c) j.components.push_back(P * val[c]);
  return j;
}

Jet<double> primitive_section_jet(const PrimitiveSection& sigma, std::span<const double> x) { return sigma.jet(x); }

JetSection PrimitiveSection::section() const {
  PrimitiveSection self = *this;
  return JetSection(m, n, r, [self](std::span<const double> x) { return self.jet(x); });
}

TwoPointGerm PrimitiveSection::germ() const {
  PrimitiveSection self = *this;
  return [self](std::span<const double> x, std::span<const double> y, int order) {
    const int m = self.m;
    LayoutPtr L = Layout::get(2 * m, order);
    std::vector<TruncatedPoly<double>> X, Y;
    for (int i = 0; i < m; ++i) {
      X.push_back(TruncatedPoly<double>::variable(L, i, 0.0));
      Y.push_back(TruncatedPoly<double>::variable(L, m + i, 0.0));
    }
    std::vector<TruncatedPoly<double>> U;
    if (self.conormal.is_constant()) {
      for (double c : *self.conormal.constant_value()) U.push_back(TruncatedPoly<double>::constant(L, c));
    } else {
      for (const auto& p : self.conormal.generator().jet_components(x, order)) U.push_back(substitute<double>(p, X));
    }
    TruncatedPoly<double> lin(L);
    for (int i = 0; i < m; ++i) {
      TruncatedPoly<double> d = Y[i] - X[i];
      d.add_constant(y[i] - x[i]);
      lin += d * U[i];
    }
    TruncatedPoly<double> P = pow(lin, self.r);
    std::vector<TruncatedPoly<double>> out;
    for (const auto& p : self.v.jet_components(x, order)) out.push_back(P * substitute<double>(p, X));
    return out;
  };
}

double PrimitiveSection::cr_norm(const GridSpec& grid) const { return section_cr_norm(germ(), m, r, grid); }

TopOrderSection TopOrderSection::zero(int m, int n, int r) {
  TopOrderSection s{m, n, r, {}};
  s.a.assign(s.monomial_count(), Field::zero(m, n));
  return s;
}

TopOrderSection TopOrderSection::from_polynomial(const TruncatedPoly<Rational>& poly, const Field& amplitude) {
  const int m = poly.dim(), r = poly.order();
  require(amplitude.in_dim() == m, "shape_mismatch", "amplitude field lives on a different R^m");
  for (std::size_t i = 0; i < poly.layout().degree_begin(r); ++i)
    require(poly[i] == 0, "precondition", "top-order section needs a homogeneous degree-r polynomial");
  TopOrderSection s{m, amplitude.out_dim(), r, {}};
  const std::size_t b = poly.layout().degree_begin(r);
  for (std::size_t i = b; i < poly.size(); ++i)
    s.a.push_back(poly[i] == 0 ? Field::zero(m, s.n) : scale_exact(amplitude, poly[i]));
  return s;
}

std::size_t TopOrderSection::monomial_count() const {
  LayoutPtr lay = Layout::get(m, r);
  return lay->size() - lay->degree_begin(r);
}

const MultiIndex& TopOrderSection::monomial(std::size_t i) const {
  LayoutPtr lay = Layout::get(m, r);
  return lay->index(lay->degree_begin(r) + i);
}

void TopOrderSection::validate() const {
  require(m >= 1 && n >= 0 && r >= 1, "precondition", "top-order section needs m >= 1, r >= 1");
  require(a.size() == monomial_count(), "shape_mismatch", "one coefficient field per degree-r monomial is required");
  for (const auto& f : a)
    require(f.in_dim() == m && f.out_dim() == n, "shape_mismatch", "coefficient field has the wrong shape");
}

Jet<double> TopOrderSection::at(std::span<const double> x) const {
  LayoutPtr lay = Layout::get(m, r);
  const std::size_t b = lay->degree_begin(r);
  Jet<double> j = Jet<double>::zero(std::vector<double>(x.begin(), x.end()), n, r);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].is_literal_zero()) continue;
    auto val = a[i].value(x);
    for (int c = 0; c < n; ++c) j.components[c][b + i] = val[c];
  }
  return j;
}

Jet<Rational> TopOrderSection::at_exact(std::span<const Rational> x) const {
  LayoutPtr lay = Layout::get(m, r);
  const std::size_t b = lay->degree_begin(r);
  Jet<Rational> j = Jet<Rational>::zero(std::vector<Rational>(x.begin(), x.end()), n, r);
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto val = a[i].jet_exact(x, 0).values();
    for (int c = 0; c < n; ++c) j.components[c][b + i] = val[c];
  }
  return j;
}

JetSection TopOrderSection::section() const {
  TopOrderSection self = *this;
  return JetSection(m, n, r, [self](std::span<const double> x) { return self.at(x); });
}

TruncatedPoly<Rational> power_sum_expand(const std::vector<int>& beta, int m, int r) {
  LayoutPtr lay = Layout::get(m, r);
  TruncatedPoly<Rational> s(lay);
  if (r >= 1)
    for (int b : beta) {
      require(b >= 0 && b < m, "precondition", "power-sum index out of range");
      s[1 + b] += 1;
    }
  return pow(s, r);
}

std::vector<DecompositionTerm> decomposition_terms(int m, int r) {
  require(m >= 1 && r >= 1, "precondition", "decomposition needs m >= 1 and r >= 1");
  require(r <= 12, "precondition", "decomposition enumerates 2^r subsets; r <= 12 supported");
  LayoutPtr lay = Layout::get(m, r);
  const std::size_t b = lay->degree_begin(r);
  // counts[beta slot][monomial position] = #{U : multiset(alpha_U) = beta}
  std::map<std::size_t, std::map<std::size_t, long>> counts;
  for (std::size_t i = b; i < lay->size(); ++i) {
    const MultiIndex& alpha = lay->index(i);
    std::vector<int> pos;
    for (int v = 0; v < m; ++v)
      for (int e = 0; e < alpha[v]; ++e) pos.push_back(v);
    for (unsigned mask = 1; mask < (1u << r); ++mask) {
      MultiIndex beta(m, 0);
      for (int u = 0; u < r; ++u)
        if (mask & (1u << u)) ++beta[pos[u]];
      ++counts[static_cast<std::size_t>(lay->find(beta))][i - b];
    }
  }
  Rational rfact(1);
  for (int k = 2; k <= r; ++k) rfact *= k;
  std::vector<DecompositionTerm> out;
  for (std::size_t s = 1; s < lay->size(); ++s) {
    DecompositionTerm t;
    t.beta = lay->index(s);
    t.conormal.assign(t.beta.begin(), t.beta.end());
    const int k = order(t.beta);
    const Rational sign = ((r + k) % 2 == 0) ? Rational(1) : Rational(-1);
    for (const auto& [pos, cnt] : counts[s]) t.weights.emplace_back(pos, sign * Rational(cnt) / rfact);
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<DecompositionTerm> merge_decomposition_terms(const std::vector<DecompositionTerm>& terms, int r) {
  std::vector<DecompositionTerm> out;
  std::vector<std::map<std::size_t, Rational>> acc;
  for (const auto& t : terms) {
    int g = 0;
    for (int w : t.conormal) g = std::gcd(g, std::abs(w));
    require(g > 0, "precondition", "decomposition term with zero co-normal");
    std::vector<int> d = t.conormal;
    for (int& w : d) w /= g;
    int c = g;
    auto first = std::find_if(d.begin(), d.end(), [](int w) { return w != 0; });
    if (*first < 0) {
      for (int& w : d) w = -w;
      c = -c;
    }
    Rational scale(1);
    for (int e = 0; e < r; ++e) scale *= c;
    std::size_t slot = out.size();
    for (std::size_t j = 0; j < out.size(); ++j)
      if (out[j].conormal == d) slot = j;
    if (slot == out.size()) {
      DecompositionTerm nt;
      nt.beta.assign(d.begin(), d.end());
      nt.conormal = d;
      out.push_back(nt);
      acc.emplace_back();
    }
    for (const auto& [pos, w] : t.weights) acc[slot][pos] += w * scale;
  }
  std::vector<DecompositionTerm> kept;
  for (std::size_t j = 0; j < out.size(); ++j) {
    for (const auto& [pos, w] : acc[j])
      if (w != 0) out[j].weights.emplace_back(pos, w);
    if (!out[j].weights.empty()) kept.push_back(std::move(out[j]));
  }
  return kept;
}

std::vector<PrimitiveTerm> decompose_top_order(const TopOrderSection& sigma, bool merge) {
  sigma.validate();
  auto terms = decomposition_terms(sigma.m, sigma.r);
  if (merge) terms = merge_decomposition_terms(terms, sigma.r);
  std::vector<PrimitiveTerm> out;
  for (auto& t : terms) {
    std::vector<std::pair<Rational, Field>> lc;
    for (const auto& [pos, w] : t.weights) lc.emplace_back(w, sigma.a[pos]);
    Field v = linear_combination(lc, sigma.m, sigma.n);
    if (merge && v.is_literal_zero()) continue;
    std::vector<Rational> u(t.conormal.begin(), t.conormal.end());
    out.push_back(PrimitiveTerm{t, PrimitiveSection::with_constant_conormal(v, u, sigma.r)});
  }
  return out;
}

JetSection pullback_section(const Diffeo& F, const JetSection& sigma) {
  require(F.dim() == sigma.m(), "shape_mismatch", "diffeomorphism and section differ in dimension");
  return JetSection(sigma.m(), sigma.n(), sigma.r(), [F, sigma](std::span<const double> x) {
    Jet<double> inner = F.jet(x, sigma.r());
    return jet_compose(sigma.at(inner.values()), inner);
  });
}

JetSection pushforward_section(const Diffeo& F, const JetSection& sigma) {
  require(F.dim() == sigma.m(), "shape_mismatch", "diffeomorphism and section differ in dimension");
  return JetSection(sigma.m(), sigma.n(), sigma.r(), [F, sigma](std::span<const double> y) {
    Jet<double> inner = F.inverse_jet(y, sigma.r());
    return jet_compose(sigma.at(inner.values()), inner);
  });
}

PrimitiveSection pullback_primitive(const Diffeo& F, const PrimitiveSection& sigma) {
  require(F.dim() == sigma.m, "shape_mismatch", "diffeomorphism and section differ in dimension");
  Field v = sigma.v.after(F.forward());
  Field uF = sigma.conormal.generator().after(F.forward());
  const int m = sigma.m;
  Field fwd = F.forward();
  Field u(m, m, [fwd, uF, m](std::span<const double> x, int order) {
    auto Fj = fwd.jet_components(x, order + 1);
    auto U = uF.jet_components(x, order);
    std::vector<TruncatedPoly<double>> out(m, TruncatedPoly<double>(Layout::get(m, order)));
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < m; ++i) out[k] += Fj[i].derivative(k).truncated(order) * U[i];
    return out;
  });
  return PrimitiveSection::with_conormal_field(v, HyperplaneField::from_field(u), sigma.r);
}

}  // namespace jetlab
