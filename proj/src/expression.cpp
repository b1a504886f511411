#include "jetlab/expression.hpp"

#include <algorithm>
#include <cmath>

#include "jetlab/univariate.hpp"

namespace jetlab {

namespace {

std::shared_ptr<Expr::Node> make(ExprKind k) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = k;
  return n;
}

void absorb_children(Expr::Node& n) {
  n.arity = 0;
  n.exact = true;
  for (const auto& c : n.children) {
    n.arity = std::max(n.arity, c.arity());
    n.exact = n.exact && c.exact_capable();
  }
}

bool is_integer(double e) { return std::isfinite(e) && std::floor(e) == e && std::fabs(e) < 1e9; }

}  // namespace

Expr::Expr() : Expr(constant(0.0)) {}

Expr Expr::constant(double value) {
  require(std::isfinite(value), "parse", "constant must be finite");
  auto n = make(ExprKind::Const);
  n->value = value;
  n->exact_value = Rational(value);
  return Expr(n);
}

Expr Expr::constant(const Rational& value) {
  auto n = make(ExprKind::Const);
  n->exact_value = value;
  n->value = value.get_d();
  n->literal_is_string = true;
  return Expr(n);
}

Expr Expr::coord(int axis) {
  require(axis >= 0, "parse", "coordinate axis must be non-negative");
  auto n = make(ExprKind::Coord);
  n->axis = axis;
  n->arity = axis + 1;
  return Expr(n);
}

Expr Expr::add(std::vector<Expr> terms) {
  require(!terms.empty(), "parse", "add needs at least one term");
  auto n = make(ExprKind::Add);
  n->children = std::move(terms);
  absorb_children(*n);
  return Expr(n);
}

Expr Expr::mul(std::vector<Expr> factors) {
  require(!factors.empty(), "parse", "mul needs at least one factor");
  auto n = make(ExprKind::Mul);
  n->children = std::move(factors);
  absorb_children(*n);
  return Expr(n);
}

Expr Expr::pow(Expr base, double exponent) {
  require(std::isfinite(exponent), "parse", "pow exponent must be finite");
  auto n = make(ExprKind::Pow);
  n->children = {std::move(base)};
  n->exponent = exponent;
  absorb_children(*n);
  n->exact = n->exact && is_integer(exponent);
  return Expr(n);
}

Expr Expr::sin(Expr arg) {
  auto n = make(ExprKind::Sin);
  n->children = {std::move(arg)};
  absorb_children(*n);
  n->exact = false;
  return Expr(n);
}

Expr Expr::cos(Expr arg) {
  auto n = make(ExprKind::Cos);
  n->children = {std::move(arg)};
  absorb_children(*n);
  n->exact = false;
  return Expr(n);
}

Expr Expr::exp(Expr arg) {
  auto n = make(ExprKind::Exp);
  n->children = {std::move(arg)};
  absorb_children(*n);
  n->exact = false;
  return Expr(n);
}

Expr Expr::plateau(Expr arg, double inner, double outer, int smoothness) {
  auto n = make(ExprKind::Plateau);
  n->children = {std::move(arg)};
  n->profile = std::make_shared<const Profile>(Profile::plateau(inner, outer, smoothness));
  absorb_children(*n);
  n->exact = false;
  return Expr(n);
}

Expr Expr::transition(Expr arg, double inner, double outer, int smoothness) {
  auto n = make(ExprKind::Transition);
  n->children = {std::move(arg)};
  n->profile = std::make_shared<const Profile>(Profile::transition(inner, outer, smoothness));
  absorb_children(*n);
  n->exact = false;
  return Expr(n);
}

Expr Expr::compose(Expr outer, std::vector<Expr> inner) {
  require(outer.arity() <= static_cast<int>(inner.size()), "parse",
          "compose: outer expression references more coordinates than inner expressions supplied");
  auto n = make(ExprKind::Compose);
  n->children.reserve(inner.size() + 1);
  n->children.push_back(std::move(outer));
  for (auto& e : inner) n->children.push_back(std::move(e));
  n->arity = 0;
  n->exact = n->children[0].exact_capable();
  for (std::size_t i = 1; i < n->children.size(); ++i) {
    n->arity = std::max(n->arity, n->children[i].arity());
    n->exact = n->exact && n->children[i].exact_capable();
  }
  return Expr(n);
}

ExprKind Expr::kind() const { return node_->kind; }
int Expr::arity() const { return node_->arity; }
bool Expr::exact_capable() const { return node_->exact; }

namespace {

const char* kind_name(ExprKind k) {
  switch (k) {
    case ExprKind::Sin: return "sin";
    case ExprKind::Cos: return "cos";
    case ExprKind::Exp: return "exp";
    case ExprKind::Plateau: return "plateau";
    case ExprKind::Transition: return "transition";
    case ExprKind::Pow: return "pow";
    default: return "node";
  }
}

}  // namespace

template <Scalar S>
TruncatedPoly<S> Expr::evaluate(std::span<const TruncatedPoly<S>> coords) const {
  require(!coords.empty(), "shape_mismatch", "expression evaluation needs at least one coordinate");
  const Node& n = *node_;
  const LayoutPtr& lay = coords[0].layout_ptr();
  const int r = coords[0].order();
  switch (n.kind) {
    case ExprKind::Const:
      if constexpr (std::same_as<S, double>) {
        return TruncatedPoly<S>::constant(lay, n.value);
      } else {
        return TruncatedPoly<S>::constant(lay, n.exact_value);
      }
    case ExprKind::Coord:
      if (n.axis >= static_cast<int>(coords.size()))
        throw Error("shape_mismatch", "coordinate axis " + std::to_string(n.axis) + " out of range for a " +
                                          std::to_string(coords.size()) + "-dimensional point");
      return coords[n.axis];
    case ExprKind::Add: {
      TruncatedPoly<S> acc = n.children[0].evaluate(coords);
      for (std::size_t i = 1; i < n.children.size(); ++i) acc += n.children[i].evaluate(coords);
      return acc;
    }
    case ExprKind::Mul: {
      TruncatedPoly<S> acc = n.children[0].evaluate(coords);
      for (std::size_t i = 1; i < n.children.size(); ++i) acc = acc * n.children[i].evaluate(coords);
      return acc;
    }
    case ExprKind::Pow: {
      TruncatedPoly<S> base = n.children[0].evaluate(coords);
      if (is_integer(n.exponent)) {
        long e = static_cast<long>(n.exponent);
        if (e >= 0) return jetlab::pow(base, static_cast<int>(e));
        auto d = integer_power_derivatives<S>(base.constant_term(), e, r);
        return compose_univariate<S>(d, base);
      }
      if constexpr (std::same_as<S, double>) {
        const double c = base.constant_term();
        if (!(c > 0.0))
          throw Error("domain", "real power with non-integer exponent needs a positive base (got " +
                                    std::to_string(c) + ")");
        auto d = real_power_derivatives(c, n.exponent, r);
        return compose_univariate<double>(d, base);
      } else {
        throw Error("domain", "non-integer power is not available in exact mode");
      }
    }
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Exp:
    case ExprKind::Plateau:
    case ExprKind::Transition: {
      if constexpr (std::same_as<S, double>) {
        TruncatedPoly<double> arg = n.children[0].evaluate(coords);
        const double c = arg.constant_term();
        std::vector<double> d;
        if (n.kind == ExprKind::Sin)
          d = sin_derivatives(c, r);
        else if (n.kind == ExprKind::Cos)
          d = cos_derivatives(c, r);
        else if (n.kind == ExprKind::Exp)
          d = exp_derivatives(c, r);
        else
          d = n.profile->derivatives(c, r);
        return compose_univariate<double>(d, arg);
      } else {
        throw Error("domain", std::string(kind_name(n.kind)) + " is not available in exact mode");
      }
    }
    case ExprKind::Compose: {
      std::vector<TruncatedPoly<S>> inner;
      inner.reserve(n.children.size() - 1);
      for (std::size_t i = 1; i < n.children.size(); ++i) inner.push_back(n.children[i].evaluate(coords));
      return n.children[0].evaluate(std::span<const TruncatedPoly<S>>(inner));
    }
  }
  (void)lay;
  throw Error("internal", "unknown expression node");
}

template TruncatedPoly<double> Expr::evaluate<double>(std::span<const TruncatedPoly<double>>) const;
template TruncatedPoly<Rational> Expr::evaluate<Rational>(std::span<const TruncatedPoly<Rational>>) const;

double Expr::value(std::span<const double> x) const {
  std::vector<TruncatedPoly<double>> coords;
  LayoutPtr lay = Layout::get(std::max<int>(1, static_cast<int>(x.size())), 0);
  if (x.empty()) {
    coords.push_back(TruncatedPoly<double>::constant(lay, 0.0));
  } else {
    for (double xi : x) coords.push_back(TruncatedPoly<double>::constant(lay, xi));
  }
  return evaluate<double>(coords).constant_term();
}

namespace {

template <Scalar S>
Jet<S> taylor_evaluate_impl(std::span<const Expr> f, std::span<const S> x, int r) {
  require(!x.empty(), "precondition", "taylor_evaluate needs a point of dimension >= 1");
  require(r >= 0, "precondition", "taylor_evaluate needs r >= 0");
  const int m = static_cast<int>(x.size());
  LayoutPtr lay = Layout::get(m, r);
  std::vector<TruncatedPoly<S>> coords;
  coords.reserve(m);
  for (int i = 0; i < m; ++i) coords.push_back(TruncatedPoly<S>::variable(lay, i, x[i]));
  Jet<S> out;
  out.base.assign(x.begin(), x.end());
  for (const auto& e : f) {
    if (e.arity() > m)
      throw Error("shape_mismatch", "expression references axis " + std::to_string(e.arity() - 1) +
                                        " but the point has dimension " + std::to_string(m));
    out.components.push_back(e.evaluate<S>(coords));
  }
  return out;
}

}  // namespace

Jet<double> taylor_evaluate(std::span<const Expr> f, std::span<const double> x, int r) {
  return taylor_evaluate_impl<double>(f, x, r);
}

Jet<Rational> taylor_evaluate(std::span<const Expr> f, std::span<const Rational> x, int r) {
  for (const auto& e : f)
    if (!e.exact_capable()) throw Error("domain", "expression uses primitives that are not available in exact mode");
  return taylor_evaluate_impl<Rational>(f, x, r);
}

}  // namespace jetlab
