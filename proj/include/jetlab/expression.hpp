#pragma once

#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "jetlab/jet.hpp"
#include "jetlab/profiles.hpp"

namespace jetlab {

enum class ExprKind { Const, Coord, Add, Mul, Pow, Sin, Cos, Exp, Plateau, Transition, Compose };

// Immutable expression tree for smooth scalar fields. Evaluation over
// TruncatedPoly coordinates yields the Taylor jet of the field.
class Expr {
 public:
  struct Node;

  Expr();  // the constant 0

  static Expr constant(double value);
  static Expr constant(const Rational& value);
  static Expr coord(int axis);
  static Expr add(std::vector<Expr> terms);
  static Expr mul(std::vector<Expr> factors);
  static Expr pow(Expr base, double exponent);
  static Expr sin(Expr arg);
  static Expr cos(Expr arg);
  static Expr exp(Expr arg);
  static Expr plateau(Expr arg, double inner = 0.5, double outer = 1.0, int smoothness = 4);
  static Expr transition(Expr arg, double inner = 0.5, double outer = 0.75, int smoothness = 4);
  // outer(inner_0, ..., inner_{k-1}); the outer's coord(j) refers to inner_j.
  static Expr compose(Expr outer, std::vector<Expr> inner);

  ExprKind kind() const;
  // 1 + largest coordinate axis referenced (0 for constants).
  int arity() const;
  // True when evaluation needs no transcendental or profile primitive and
  // every power has an integer exponent.
  bool exact_capable() const;

  // Taylor polynomial of the field at the point encoded by coords
  // (coords[i] = x_i + X_i). All coords share one (m, r).
  template <Scalar S>
  TruncatedPoly<S> evaluate(std::span<const TruncatedPoly<S>> coords) const;

  double value(std::span<const double> x) const;

  friend Expr operator+(const Expr& a, const Expr& b) { return add({a, b}); }
  friend Expr operator*(const Expr& a, const Expr& b) { return mul({a, b}); }
  friend Expr operator-(const Expr& a, const Expr& b) { return add({a, mul({constant(-1.0), b})}); }

  const Node& node() const { return *node_; }

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Expr::Node {
  ExprKind kind = ExprKind::Const;
  // Const: exact value plus its double image; `literal` keeps the source
  // spelling ("p/q" strings are re-emitted as strings).
  Rational exact_value;
  double value = 0.0;
  bool literal_is_string = false;
  int axis = 0;
  double exponent = 0.0;
  std::vector<Expr> children;  // Add/Mul terms; unary arg; Pow base; Compose: [outer, inner...]
  std::shared_ptr<const Profile> profile;
  int arity = 0;
  bool exact = true;
};

using ExpressionField = Expr;

// j^r f(x) for a vector of scalar expressions.
Jet<double> taylor_evaluate(std::span<const Expr> f, std::span<const double> x, int r);
Jet<Rational> taylor_evaluate(std::span<const Expr> f, std::span<const Rational> x, int r);
inline Jet<double> taylor_evaluate(const Expr& f, std::span<const double> x, int r) {
  return taylor_evaluate(std::span<const Expr>(&f, 1), x, r);
}

extern template TruncatedPoly<double> Expr::evaluate<double>(std::span<const TruncatedPoly<double>>) const;
extern template TruncatedPoly<Rational> Expr::evaluate<Rational>(std::span<const TruncatedPoly<Rational>>) const;

}  // namespace jetlab
