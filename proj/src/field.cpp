#include "jetlab/field.hpp"

namespace jetlab {

Field::Field(int in_dim, int out_dim, JetFn fn) : in_dim_(in_dim), out_dim_(out_dim), fn_(std::move(fn)) {
  require(in_dim >= 1 && out_dim >= 0, "precondition", "field needs in_dim >= 1 and out_dim >= 0");
}

Field Field::from_expressions(std::vector<Expr> components, int in_dim) {
  for (const auto& e : components)
    if (e.arity() > in_dim)
      throw Error("shape_mismatch", "expression references axis " + std::to_string(e.arity() - 1) +
                                        " in a field on R^" + std::to_string(in_dim));
  auto shared = std::make_shared<const std::vector<Expr>>(components);
  Field f(in_dim, static_cast<int>(components.size()),
          [shared, in_dim](std::span<const double> x, int order) {
            LayoutPtr lay = Layout::get(in_dim, order);
            std::vector<TruncatedPoly<double>> coords;
            coords.reserve(in_dim);
            for (int i = 0; i < in_dim; ++i) coords.push_back(TruncatedPoly<double>::variable(lay, i, x[i]));
            std::vector<TruncatedPoly<double>> out;
            out.reserve(shared->size());
            for (const auto& e : *shared) out.push_back(e.evaluate<double>(coords));
            return out;
          });
  f.expressions_ = std::move(components);
  return f;
}

Field Field::constant(int in_dim, std::vector<double> value) {
  std::vector<Expr> comps;
  for (double v : value) comps.push_back(Expr::constant(v));
  return from_expressions(std::move(comps), in_dim);
}

Field Field::zero(int in_dim, int out_dim) { return constant(in_dim, std::vector<double>(out_dim, 0.0)); }

std::vector<TruncatedPoly<double>> Field::jet_components(std::span<const double> x, int order) const {
  require(valid(), "precondition", "field is empty");
  require(static_cast<int>(x.size()) == in_dim_, "shape_mismatch",
          "field on R^" + std::to_string(in_dim_) + " evaluated at a point of dimension " + std::to_string(x.size()));
  auto out = fn_(x, order);
  require(static_cast<int>(out.size()) == out_dim_, "internal", "field callback returned the wrong number of components");
  return out;
}

Jet<double> Field::jet(std::span<const double> x, int order) const {
  Jet<double> j;
  j.base.assign(x.begin(), x.end());
  j.components = jet_components(x, order);
  return j;
}

std::vector<double> Field::value(std::span<const double> x) const {
  auto comps = jet_components(x, 0);
  std::vector<double> v;
  v.reserve(comps.size());
  for (const auto& p : comps) v.push_back(p.constant_term());
  return v;
}

Jet<Rational> Field::jet_exact(std::span<const Rational> x, int order) const {
  require(expressions_.has_value(), "domain", "exact evaluation needs an expression-backed field");
  require(static_cast<int>(x.size()) == in_dim_, "shape_mismatch", "point has the wrong dimension");
  return taylor_evaluate(std::span<const Expr>(*expressions_), x, order);
}

namespace {

Field combine(const Field& a, const Field& b, double sb) {
  require(a.in_dim() == b.in_dim() && a.out_dim() == b.out_dim(), "shape_mismatch", "field shapes differ");
  if (a.expressions() && b.expressions()) {
    std::vector<Expr> comps;
    for (int i = 0; i < a.out_dim(); ++i) {
      const Expr& eb = (*b.expressions())[i];
      comps.push_back(sb == 1.0 ? (*a.expressions())[i] + eb : (*a.expressions())[i] - eb);
    }
    return Field::from_expressions(std::move(comps), a.in_dim());
  }
  return Field(a.in_dim(), a.out_dim(), [a, b, sb](std::span<const double> x, int order) {
    auto pa = a.jet_components(x, order);
    auto pb = b.jet_components(x, order);
    for (std::size_t i = 0; i < pa.size(); ++i) pa[i] += pb[i] * sb;
    return pa;
  });
}

}  // namespace

Field operator+(const Field& a, const Field& b) { return combine(a, b, 1.0); }
Field operator-(const Field& a, const Field& b) { return combine(a, b, -1.0); }

Field Field::scaled(double s) const {
  if (expressions_) {
    std::vector<Expr> comps;
    for (const auto& e : *expressions_) comps.push_back(Expr::mul({Expr::constant(s), e}));
    return from_expressions(std::move(comps), in_dim_);
  }
  Field self = *this;
  return Field(in_dim_, out_dim_, [self, s](std::span<const double> x, int order) {
    auto p = self.jet_components(x, order);
    for (auto& c : p) c *= s;
    return p;
  });
}

Field Field::after(const Field& inner) const {
  require(inner.out_dim() == in_dim_, "shape_mismatch", "composition needs inner output dimension == outer input dimension");
  if (expressions_ && inner.expressions()) {
    std::vector<Expr> comps;
    for (const auto& e : *expressions_) comps.push_back(Expr::compose(e, *inner.expressions()));
    return from_expressions(std::move(comps), inner.in_dim());
  }
  Field outer = *this;
  return Field(inner.in_dim(), out_dim_, [outer, inner](std::span<const double> x, int order) {
    Jet<double> ij = inner.jet(x, order);
    Jet<double> oj = outer.jet(ij.values(), order);
    return jet_compose(oj, ij).components;
  });
}

bool Field::is_literal_zero() const {
  if (!expressions_) return false;
  for (const auto& e : *expressions_)
    if (e.kind() != ExprKind::Const || e.node().exact_value != 0) return false;
  return true;
}

}  // namespace jetlab
