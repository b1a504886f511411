#include "jetlab/jet.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace jetlab {

namespace {

// Gauss-Jordan inverse with partial pivoting (exact for Rational).
template <Scalar S>
std::vector<std::vector<S>> invert(std::vector<std::vector<S>> a) {
  const int n = static_cast<int>(a.size());
  double biggest = 0.0;
  for (const auto& row : a)
    for (const auto& x : row) biggest = std::max(biggest, abs_value(x));
  std::vector<std::vector<S>> inv(n, std::vector<S>(n, S(0)));
  for (int i = 0; i < n; ++i) inv[i][i] = S(1);
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    double best = 0.0;
    for (int row = col; row < n; ++row) {
      double mag = abs_value(a[row][col]);
      if (mag > best) {
        best = mag;
        piv = row;
      }
    }
    const bool singular = std::same_as<S, double> ? best <= 1e-13 * biggest : best == 0.0;
    if (piv < 0 || singular) throw Error("domain", "Jacobian is singular at the jet base point");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    S d = a[col][col];
    for (int k = 0; k < n; ++k) {
      a[col][k] /= d;
      inv[col][k] /= d;
    }
    for (int row = 0; row < n; ++row) {
      if (row == col || is_zero(a[row][col])) continue;
      S f = a[row][col];
      for (int k = 0; k < n; ++k) {
        a[row][k] -= f * a[col][k];
        inv[row][k] -= f * inv[col][k];
      }
    }
  }
  return inv;
}

}  // namespace

template <Scalar S>
Jet<S> jet_inverse(const Jet<S>& F) {
  const int m = F.m();
  require(F.n() == m, "shape_mismatch", "jet_inverse needs a square map jet");
  const int r = F.r();
  LayoutPtr lay = Layout::get(m, r);
  if (r == 0) {
    Jet<S> out;
    out.base = F.values();
    for (int i = 0; i < m; ++i) out.components.push_back(TruncatedPoly<S>::constant(lay, F.base[i]));
    return out;
  }
  std::vector<std::vector<S>> A(m, std::vector<S>(m, S(0)));
  for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) A[i][j] = F.components[i][1 + j];
  auto Ainv = invert(A);

  // N(X) = F(x + X) - F(x), a polynomial map with zero constant term.
  std::vector<TruncatedPoly<S>> N = F.components;
  for (auto& p : N) p[0] = S(0);

  std::vector<TruncatedPoly<S>> Z;
  for (int i = 0; i < m; ++i) Z.push_back(TruncatedPoly<S>::variable(lay, i, S(0)));

  auto apply_inverse = [&](const std::vector<TruncatedPoly<S>>& v) {
    std::vector<TruncatedPoly<S>> out(m, TruncatedPoly<S>(lay));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        if (!is_zero(Ainv[i][j])) out[i] += v[j] * Ainv[i][j];
    return out;
  };

  std::vector<TruncatedPoly<S>> G = apply_inverse(Z);
  for (int it = 1; it < r; ++it) {
    auto mono = substitute_monomials<S>(*lay, std::span<const TruncatedPoly<S>>(G));
    std::vector<TruncatedPoly<S>> resid(m, TruncatedPoly<S>(lay));
    for (int i = 0; i < m; ++i) {
      for (std::size_t a = 1; a < lay->size(); ++a) {
        if (is_zero(N[i][a])) continue;
        for (std::size_t k = 0; k < resid[i].size(); ++k)
          if (!is_zero(mono[a][k])) resid[i][k] += N[i][a] * mono[a][k];
      }
      resid[i] -= Z[i];
    }
    auto corr = apply_inverse(resid);
    for (int i = 0; i < m; ++i) G[i] -= corr[i];
  }

  Jet<S> out;
  out.base = F.values();
  for (int i = 0; i < m; ++i) {
    TruncatedPoly<S> p = G[i];
    p[0] = F.base[i];
    out.components.push_back(std::move(p));
  }
  return out;
}

template Jet<double> jet_inverse<double>(const Jet<double>&);
template Jet<Rational> jet_inverse<Rational>(const Jet<Rational>&);

JetNorms jet_norms(const Jet<double>& s, std::optional<std::span<const double>> u, double unit_tolerance) {
  s.validate();
  JetNorms out;
  const int m = s.m(), n = s.n(), r = s.r();
  if (n == 0) {
    if (u) out.perp = 0.0;
    return out;
  }
  const Layout& lay = s.components[0].layout();
  for (std::size_t a = 0; a < lay.size(); ++a) {
    double sq = 0.0;
    for (int c = 0; c < n; ++c) {
      double d = s.derivative(c, a);
      sq += d * d;
    }
    out.c0 = std::max(out.c0, std::sqrt(sq));
  }
  if (!u) return out;
  require(static_cast<int>(u->size()) == m, "shape_mismatch", "co-normal has the wrong dimension");
  Eigen::VectorXd uv(m);
  for (int i = 0; i < m; ++i) uv[i] = (*u)[i];
  require(std::fabs(uv.norm() - 1.0) <= unit_tolerance, "precondition", "co-normal must be a unit vector");
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(m, m) - uv * uv.transpose();
  double perp = 0.0;
  Eigen::MatrixXd G(n, m);
  for (std::size_t a = 0; r >= 1 && a < lay.degree_begin(r); ++a) {
    for (int c = 0; c < n; ++c)
      for (int i = 0; i < m; ++i) G(c, i) = s.derivative(c, static_cast<std::size_t>(lay.raise(a, i)));
    Eigen::MatrixXd GP = G * P;
    double nrm;
    if (n == 1) {
      nrm = GP.norm();
    } else {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(GP);
      nrm = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    }
    perp = std::max(perp, nrm);
  }
  out.perp = perp;
  return out;
}

Jet<double> to_double(const Jet<Rational>& s) {
  Jet<double> out;
  for (const auto& b : s.base) out.base.push_back(b.get_d());
  for (const auto& p : s.components) out.components.push_back(to_double(p));
  return out;
}

JetNorms jet_norms(const Jet<Rational>& s, std::optional<std::span<const double>> u, double unit_tolerance) {
  return jet_norms(to_double(s), u, unit_tolerance);
}

}  // namespace jetlab
