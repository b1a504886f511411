#pragma once

// Independent reference implementations used only by the tests.

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "jetlab/expression.hpp"

namespace jetlab::oracle {

// Sparse exact polynomial with no truncation.
struct SymPoly {
  int m = 1;
  std::map<std::vector<int>, Rational> terms;

  static SymPoly constant(int m, const Rational& c) {
    SymPoly p;
    p.m = m;
    if (sgn(c) != 0) p.terms[std::vector<int>(m, 0)] = c;
    return p;
  }
  static SymPoly var(int m, int i) {
    SymPoly p;
    p.m = m;
    std::vector<int> e(m, 0);
    e[i] = 1;
    p.terms[e] = 1;
    return p;
  }

  SymPoly& operator+=(const SymPoly& o) {
    for (const auto& [e, c] : o.terms) {
      Rational& slot = terms[e];
      slot += c;
      if (sgn(slot) == 0) terms.erase(e);
    }
    return *this;
  }
  friend SymPoly operator+(SymPoly a, const SymPoly& b) { return a += b; }
  friend SymPoly operator*(const SymPoly& a, const SymPoly& b) {
    SymPoly out;
    out.m = a.m;
    for (const auto& [ea, ca] : a.terms)
      for (const auto& [eb, cb] : b.terms) {
        std::vector<int> e(a.m);
        for (int i = 0; i < a.m; ++i) e[i] = ea[i] + eb[i];
        Rational& slot = out.terms[e];
        slot += ca * cb;
      }
    for (auto it = out.terms.begin(); it != out.terms.end();)
      it = sgn(it->second) == 0 ? out.terms.erase(it) : std::next(it);
    return out;
  }
  friend SymPoly operator*(const Rational& s, const SymPoly& a) { return constant(a.m, s) * a; }

  SymPoly derivative(int v) const {
    SymPoly out;
    out.m = m;
    for (const auto& [e, c] : terms) {
      if (e[v] == 0) continue;
      std::vector<int> d = e;
      d[v] -= 1;
      out.terms[d] += c * e[v];
    }
    return out;
  }

  SymPoly derivative(const std::vector<int>& alpha) const {
    SymPoly out = *this;
    for (int v = 0; v < m; ++v)
      for (int k = 0; k < alpha[v]; ++k) out = out.derivative(v);
    return out;
  }

  Rational eval(const std::vector<Rational>& x) const {
    Rational total = 0;
    for (const auto& [e, c] : terms) {
      Rational t = c;
      for (int v = 0; v < m; ++v)
        for (int k = 0; k < e[v]; ++k) t *= x[v];
      total += t;
    }
    return total;
  }

  // this(vals_0, ..., vals_{m-1}); all vals share one dimension.
  SymPoly substitute(const std::vector<SymPoly>& vals) const {
    const int md = vals.at(0).m;
    SymPoly out = constant(md, 0);
    for (const auto& [e, c] : terms) {
      SymPoly t = constant(md, c);
      for (int v = 0; v < m; ++v)
        for (int k = 0; k < e[v]; ++k) t = t * vals[v];
      out += t;
    }
    return out;
  }

  int degree() const {
    int d = 0;
    for (const auto& [e, c] : terms) {
      int s = 0;
      for (int x : e) s += x;
      d = std::max(d, s);
    }
    return d;
  }

  Expr to_expr() const {
    std::vector<Expr> summands;
    for (const auto& [e, c] : terms) {
      std::vector<Expr> f{Expr::constant(c)};
      for (int v = 0; v < m; ++v)
        if (e[v] > 0) f.push_back(Expr::pow(Expr::coord(v), e[v]));
      summands.push_back(Expr::mul(std::move(f)));
    }
    if (summands.empty()) return Expr::constant(Rational(0));
    return Expr::add(std::move(summands));
  }
};

inline Rational random_rational(std::mt19937_64& rng, int span = 9, int den = 7) {
  std::uniform_int_distribution<int> num(-span, span), d(1, den);
  Rational q(num(rng), d(rng));
  q.canonicalize();
  return q;
}

inline SymPoly random_poly(std::mt19937_64& rng, int m, int degree, int nterms) {
  SymPoly p = SymPoly::constant(m, 0);
  std::uniform_int_distribution<int> var(0, m - 1), deg(0, degree);
  for (int t = 0; t < nterms; ++t) {
    std::vector<int> e(m, 0);
    int d = deg(rng);
    for (int k = 0; k < d; ++k) e[var(rng)] += 1;
    SymPoly term;
    term.m = m;
    term.terms[e] = random_rational(rng);
    p += term;
  }
  return p;
}

// Direct double evaluation of an expression tree (no jet arithmetic).
inline double eval_double(const Expr& e, std::span<const double> x) {
  const Expr::Node& n = e.node();
  switch (n.kind) {
    case ExprKind::Const: return n.value;
    case ExprKind::Coord: return x[n.axis];
    case ExprKind::Add: {
      double s = 0;
      for (const auto& c : n.children) s += eval_double(c, x);
      return s;
    }
    case ExprKind::Mul: {
      double s = 1;
      for (const auto& c : n.children) s *= eval_double(c, x);
      return s;
    }
    case ExprKind::Pow: return std::pow(eval_double(n.children[0], x), n.exponent);
    case ExprKind::Sin: return std::sin(eval_double(n.children[0], x));
    case ExprKind::Cos: return std::cos(eval_double(n.children[0], x));
    case ExprKind::Exp: return std::exp(eval_double(n.children[0], x));
    case ExprKind::Plateau:
    case ExprKind::Transition: return n.profile->value(eval_double(n.children[0], x));
    case ExprKind::Compose: {
      std::vector<double> inner;
      for (std::size_t i = 1; i < n.children.size(); ++i) inner.push_back(eval_double(n.children[i], x));
      return eval_double(n.children[0], inner);
    }
  }
  return NAN;
}

// Random smooth expression in m variables whose values stay moderate on
// [-1, 1]^m (arguments of exp are damped, powers with real exponents get a
// positive base).
inline Expr random_smooth_expr(std::mt19937_64& rng, int m, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 8);
  std::uniform_real_distribution<double> coef(-1.5, 1.5);
  switch (pick(rng)) {
    case 0: return Expr::coord(std::uniform_int_distribution<int>(0, m - 1)(rng));
    case 1: return Expr::add({Expr::constant(coef(rng)), Expr::coord(std::uniform_int_distribution<int>(0, m - 1)(rng))});
    case 2: return Expr::add({random_smooth_expr(rng, m, depth - 1), random_smooth_expr(rng, m, depth - 1)});
    case 3: return Expr::mul({random_smooth_expr(rng, m, depth - 1), random_smooth_expr(rng, m, depth - 1)});
    case 4: return Expr::sin(Expr::mul({Expr::constant(coef(rng)), random_smooth_expr(rng, m, depth - 1)}));
    case 5: return Expr::cos(random_smooth_expr(rng, m, depth - 1));
    case 6: return Expr::exp(Expr::mul({Expr::constant(0.3), Expr::sin(random_smooth_expr(rng, m, depth - 1))}));
    case 7: {
      // (2 + sin(.)) ^ p with a real exponent
      double p = std::uniform_real_distribution<double>(-1.5, 2.5)(rng);
      return Expr::pow(Expr::add({Expr::constant(2.0), Expr::sin(random_smooth_expr(rng, m, depth - 1))}), p);
    }
    default: {
      Expr outer = Expr::mul({Expr::sin(Expr::coord(0)), Expr::add({Expr::constant(1.0), Expr::coord(1)})});
      return Expr::compose(outer, {random_smooth_expr(rng, m, depth - 1), random_smooth_expr(rng, m, depth - 1)});
    }
  }
}

// Tensor-product central difference of f for multi-index alpha (|alpha_i| <= 3).
inline double fd_derivative_raw(const std::function<double(std::span<const double>)>& f, std::vector<double> x,
                            const std::vector<int>& alpha, double h) {
  static const std::vector<std::vector<std::pair<int, double>>> stencils = {
      {{0, 1.0}},
      {{1, 0.5}, {-1, -0.5}},
      {{1, 1.0}, {0, -2.0}, {-1, 1.0}},
      {{2, 0.5}, {1, -1.0}, {-1, 1.0}, {-2, -0.5}},
  };
  std::function<double(std::size_t, std::vector<double>&)> rec = [&](std::size_t axis, std::vector<double>& p) {
    if (axis == alpha.size()) return f(p);
    double acc = 0.0;
    const double x0 = p[axis];
    for (const auto& [off, w] : stencils[alpha[axis]]) {
      p[axis] = x0 + off * h;
      acc += w * rec(axis + 1, p);
    }
    p[axis] = x0;
    return acc / std::pow(h, alpha[axis]);
  };
  return rec(0, x);
}

// Central difference at step h with one Richardson step (h, h/2), so the
// truncation error is O(h^4).
inline double fd_derivative(const std::function<double(std::span<const double>)>& f, std::vector<double> x,
                            const std::vector<int>& alpha, double h) {
  const double coarse = fd_derivative_raw(f, x, alpha, h);
  const double fine = fd_derivative_raw(f, x, alpha, 0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace jetlab::oracle
