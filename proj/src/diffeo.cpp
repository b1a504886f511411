#include "jetlab/diffeo.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace jetlab {

namespace {

constexpr double kSingular = 1e-12;

Eigen::MatrixXd jacobian(const Jet<double>& j) {
  const int m = j.m();
  Eigen::MatrixXd J(j.n(), m);
  for (int i = 0; i < j.n(); ++i)
    for (int k = 0; k < m; ++k) J(i, k) = j.r() >= 1 ? j.components[i][1 + k] : 0.0;
  return J;
}

void require_nonsingular(const Jet<double>& j) {
  Eigen::MatrixXd J = jacobian(j);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv.minCoeff() <= kSingular * std::max(1.0, sv.maxCoeff()))
    throw Error("singular", "Jacobian is singular at the evaluation point");
}

// Gaussian elimination over Q; throws on a singular system.
std::vector<Rational> solve_exact(std::vector<std::vector<Rational>> A, std::vector<Rational> b) {
  const int n = static_cast<int>(A.size());
  for (int c = 0; c < n; ++c) {
    int p = c;
    while (p < n && A[p][c] == 0) ++p;
    if (p == n) throw Error("singular", "Jacobian is singular at the evaluation point");
    std::swap(A[p], A[c]);
    std::swap(b[p], b[c]);
    for (int i = 0; i < n; ++i) {
      if (i == c || A[i][c] == 0) continue;
      Rational f = A[i][c] / A[c][c];
      for (int k = c; k < n; ++k) A[i][k] -= f * A[c][k];
      b[i] -= f * b[c];
    }
  }
  for (int i = 0; i < n; ++i) b[i] /= A[i][i];
  return b;
}

}  // namespace

Diffeo::Diffeo(Field forward, std::optional<Field> inverse, PointInverse point_inverse)
    : forward_(std::move(forward)), inverse_(std::move(inverse)), point_inverse_(std::move(point_inverse)) {
  require(forward_.valid(), "precondition", "diffeomorphism needs a coordinate map");
  require(forward_.in_dim() == forward_.out_dim(), "shape_mismatch", "diffeomorphism must map R^m to R^m");
  if (inverse_)
    require(inverse_->in_dim() == dim() && inverse_->out_dim() == dim(), "shape_mismatch",
            "inverse map has the wrong shape");
}

Diffeo Diffeo::identity(int m) {
  std::vector<Expr> id;
  for (int i = 0; i < m; ++i) id.push_back(Expr::coord(i));
  Field f = Field::from_expressions(id, m);
  return Diffeo(f, f);
}

Diffeo Diffeo::affine(const std::vector<std::vector<Rational>>& A, const std::vector<Rational>& b) {
  const int m = static_cast<int>(b.size());
  require(static_cast<int>(A.size()) == m, "shape_mismatch", "affine map needs a square matrix");
  // Inverse matrix column by column.
  std::vector<std::vector<Rational>> Ainv(m, std::vector<Rational>(m));
  for (int c = 0; c < m; ++c) {
    std::vector<Rational> e(m, Rational(0));
    e[c] = 1;
    auto col = solve_exact(A, e);
    for (int i = 0; i < m; ++i) Ainv[i][c] = col[i];
  }
  auto build = [m](const std::vector<std::vector<Rational>>& M, const std::vector<Rational>& t) {
    std::vector<Expr> comps;
    for (int i = 0; i < m; ++i) {
      std::vector<Expr> terms{Expr::constant(t[i])};
      for (int j = 0; j < m; ++j)
        if (M[i][j] != 0) terms.push_back(Expr::mul({Expr::constant(M[i][j]), Expr::coord(j)}));
      comps.push_back(Expr::add(terms));
    }
    return Field::from_expressions(comps, m);
  };
  std::vector<Rational> binv(m, Rational(0));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) binv[i] -= Ainv[i][j] * b[j];
  return Diffeo(build(A, b), build(Ainv, binv));
}

std::vector<double> Diffeo::apply(std::span<const double> x) const { return forward_.value(x); }

std::vector<double> Diffeo::invert(std::span<const double> y) const {
  require(static_cast<int>(y.size()) == dim(), "shape_mismatch", "point has the wrong dimension");
  if (inverse_) return inverse_->value(y);
  if (point_inverse_) return point_inverse_(y);
  std::vector<double> x(y.begin(), y.end());
  Eigen::Map<const Eigen::VectorXd> Y(y.data(), dim());
  for (int it = 0; it < 100; ++it) {
    Jet<double> j = forward_.jet(x, 1);
    require_nonsingular(j);
    Eigen::VectorXd Fx = Eigen::Map<const Eigen::VectorXd>(j.values().data(), dim());
    Eigen::VectorXd res = Fx - Y;
    if (res.norm() <= 1e-14 * (1.0 + Y.norm())) return x;
    Eigen::VectorXd dx = jacobian(j).partialPivLu().solve(res);
    for (int i = 0; i < dim(); ++i) x[i] -= dx(i);
    if (dx.norm() <= 1e-15 * (1.0 + Eigen::Map<Eigen::VectorXd>(x.data(), dim()).norm())) return x;
  }
  throw Error("no_convergence", "Newton inversion of the diffeomorphism did not converge");
}

std::vector<Rational> Diffeo::apply_exact(std::span<const Rational> x) const {
  return forward_.jet_exact(x, 0).values();
}

std::vector<Rational> Diffeo::invert_exact(std::span<const Rational> y) const {
  require(static_cast<int>(y.size()) == dim(), "shape_mismatch", "point has the wrong dimension");
  if (inverse_ && inverse_->expressions()) return inverse_->jet_exact(y, 0).values();
  // Newton over Q; exact after one step for affine maps.
  std::vector<Rational> x(y.begin(), y.end());
  for (int it = 0; it < 4; ++it) {
    Jet<Rational> j = forward_.jet_exact(x, 1);
    std::vector<Rational> res(dim());
    bool done = true;
    for (int i = 0; i < dim(); ++i) {
      res[i] = j.components[i][0] - y[i];
      if (res[i] != 0) done = false;
    }
    if (done) return x;
    std::vector<std::vector<Rational>> J(dim(), std::vector<Rational>(dim()));
    for (int i = 0; i < dim(); ++i)
      for (int k = 0; k < dim(); ++k) J[i][k] = j.components[i][1 + k];
    auto dx = solve_exact(J, res);
    for (int i = 0; i < dim(); ++i) x[i] -= dx[i];
  }
  throw Error("domain", "no exact rational preimage found; exact inversion needs an affine map or an inverse expression");
}

Jet<double> Diffeo::jet(std::span<const double> x, int r) const { return forward_.jet(x, r); }

Jet<double> Diffeo::inverse_jet(std::span<const double> y, int r) const {
  if (inverse_) return inverse_->jet(y, r);
  auto x = invert(y);
  Jet<double> fj = forward_.jet(x, std::max(r, 1));
  require_nonsingular(fj);
  Jet<double> inv = jet_inverse(fj);
  inv.base.assign(y.begin(), y.end());
  return r >= 1 ? inv : jet_project(inv, 0);
}

Jet<Rational> Diffeo::jet_exact(std::span<const Rational> x, int r) const { return forward_.jet_exact(x, r); }

Jet<Rational> Diffeo::inverse_jet_exact(std::span<const Rational> y, int r) const {
  if (inverse_ && inverse_->expressions()) return inverse_->jet_exact(y, r);
  auto x = invert_exact(y);
  Jet<Rational> inv = jet_inverse(forward_.jet_exact(x, std::max(r, 1)));
  return r >= 1 ? inv : jet_project(inv, 0);
}

Diffeo Diffeo::inverse() const {
  if (inverse_) return Diffeo(*inverse_, forward_);
  Diffeo self = *this;
  Field inv(dim(), dim(), [self](std::span<const double> y, int order) { return self.inverse_jet(y, order).components; });
  return Diffeo(inv, forward_);
}

Diffeo compose(const Diffeo& outer, const Diffeo& inner) {
  require(outer.dim() == inner.dim(), "shape_mismatch", "composed diffeomorphisms differ in dimension");
  Field fwd = outer.forward_.after(inner.forward_);
  if (outer.inverse_ && inner.inverse_) return Diffeo(fwd, inner.inverse_->after(*outer.inverse_));
  return Diffeo(fwd, std::nullopt, [outer, inner](std::span<const double> y) {
    auto z = outer.invert(y);
    return inner.invert(z);
  });
}

void Diffeo::check(std::span<const std::vector<double>> samples, double tol) const {
  for (const auto& y : samples) {
    auto x = invert(y);
    Jet<double> j = forward_.jet(x, 1);
    require_nonsingular(j);
    auto back = j.values();
    for (int i = 0; i < dim(); ++i)
      if (std::fabs(back[i] - y[i]) > tol * (1.0 + std::fabs(y[i])))
        throw Error("precondition", "F(F^{-1}(y)) differs from y beyond tolerance");
  }
}

Jet<double> jet_pullback(const Diffeo& F, const Jet<double>& s) {
  auto x = F.invert(s.base);
  Jet<double> inner = F.jet(x, s.r());
  if (s.r() >= 1) require_nonsingular(inner);
  return jet_compose(s, inner);
}

Jet<Rational> jet_pullback(const Diffeo& F, const Jet<Rational>& s) {
  auto x = F.invert_exact(s.base);
  Jet<Rational> inner = F.jet_exact(x, s.r());
  if (s.r() >= 1) require_nonsingular(to_double(inner));
  return jet_compose(s, inner);
}

Jet<double> jet_pushforward(const Diffeo& F, const Jet<double>& s) {
  auto y = F.apply(s.base);
  Jet<double> inner = F.inverse_jet(y, s.r());
  return jet_compose(s, inner);
}

Jet<Rational> jet_pushforward(const Diffeo& F, const Jet<Rational>& s) {
  auto y = F.apply_exact(s.base);
  Jet<Rational> inner = F.inverse_jet_exact(y, s.r());
  return jet_compose(s, inner);
}

}  // namespace jetlab
