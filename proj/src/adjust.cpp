#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "jetlab/univariate.hpp"
#include "localmodels_internal.hpp"

namespace jetlab {

namespace {

Eigen::VectorXd hyperplane_normal(const Subspace& H) {
  require(H.dim() == H.ambient() - 1, "precondition", "transversality adjustment needs a hyperplane");
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(H.ambient(), H.ambient()) - H.projector();
  Eigen::Index best = 0;
  P.colwise().norm().maxCoeff(&best);
  return P.col(best).normalized();
}

// (s_x |u_x|)^r as a jet, with s_x = sign <u_x, n>.
TruncatedPoly<double> conormal_factor(const HyperplaneField& u, const Eigen::VectorXd& nrm, std::span<const double> x,
                                      int r, int order) {
  const int m = static_cast<int>(x.size());
  LayoutPtr lay = Layout::get(m, order);
  if (u.is_constant()) {
    const auto& c = *u.constant_value();
    double len = 0.0, dot = 0.0;
    for (int i = 0; i < m; ++i) {
      len += c[i] * c[i];
      dot += c[i] * nrm[i];
    }
    double k = std::pow((dot < 0 ? -1.0 : 1.0) * std::sqrt(len), r);
    return TruncatedPoly<double>::constant(lay, k);
  }
  auto U = u.generator().jet_components(x, order);
  TruncatedPoly<double> sq(lay), dot(lay);
  for (int i = 0; i < m; ++i) {
    sq += U[i] * U[i];
    dot += U[i] * nrm[i];
  }
  const double s = dot.constant_term() < 0 ? -1.0 : 1.0;
  auto d = real_power_derivatives(sq.constant_term(), 0.5 * r, order);
  return compose_univariate<double>(d, sq) * std::pow(s, r);
}

}  // namespace

ApproximationResult transversality_adjust(const PrimitiveSection& sigma, double delta, const Subspace& H,
                                          const AdjustOptions& opt) {
  const int m = sigma.m, n = sigma.n, r = sigma.r;
  require(H.ambient() == m, "shape_mismatch", "hyperplane lives in a different dimension");
  require(r >= 1, "precondition", "transversality adjustment needs r >= 1");
  require(delta > 0.0 && delta <= 0.5, "precondition", "transversality adjustment needs 0 < delta <= 1/2");
  const Eigen::VectorXd nrm = hyperplane_normal(H);
  const int K = opt.smoothness > 0 ? opt.smoothness : r + 1;
  const Profile psi = Profile::plateau(0.5, 1.0, K);
  const double gs = opt.grid_scale;

  // Angle between tau and H, sup over samples for a non-constant co-normal.
  double theta = 0.0;
  {
    const int c = sigma.conormal.is_constant() ? 1 : 9;
    GridSpec g = GridSpec::box(std::vector<double>(m, c == 1 ? 0.0 : -1.0), std::vector<double>(m, c == 1 ? 0.0 : 1.0),
                               std::vector<int>(m, c));
    std::vector<double> x;
    for (std::size_t i = 0; i < g.size(); ++i) {
      g.point(i, x);
      theta = std::max(theta, hyperplane_angle(sigma.conormal.unit(x), nrm));
    }
  }
  if (theta >= std::numbers::pi / 4) {
    std::ostringstream os;
    os << "angle(tau, H) = " << theta << " >= pi/4; subdivide or use the transverse path";
    throw Error("precondition", os.str());
  }

  const PrimitiveSection sig = sigma;
  const Eigen::VectorXd nn = nrm;
  Field f(m, n, [sig, nn, psi, delta, r, m, n](std::span<const double> x, int order) {
    LayoutPtr lay = Layout::get(m, order);
    double t0 = 0.0;
    for (int i = 0; i < m; ++i) t0 += x[i] * nn[i];
    std::vector<TruncatedPoly<double>> out(n, TruncatedPoly<double>(lay));
    if (std::fabs(t0) >= delta) return out;
    auto V = sig.v.jet_components(x, order);
    if (detail::jets_exactly_zero(V)) return out;
    TruncatedPoly<double> N = TruncatedPoly<double>::constant(lay, t0);
    if (order >= 1)
      for (int i = 0; i < m; ++i) N[1 + i] = nn[i];
    auto pd = psi.derivatives(t0 / delta, order);
    TruncatedPoly<double> P = compose_univariate<double>(pd, N * (1.0 / delta)) * pow(N, r) *
                              conormal_factor(sig.conormal, nn, x, r, order);
    for (int c = 0; c < n; ++c) out[c] = P * V[c];
    return out;
  });

  ApproximationResult res;
  res.m = m;
  res.n = n;
  res.r = r;
  res.path = "tangent";
  res.f = f;

  // Samples x = sum_j s_j h_j + t n over the slab, inside the cube.
  Eigen::MatrixXd B = H.basis();
  const double R = std::sqrt(static_cast<double>(m));
  const int ns = detail::count_for(2.0 * R, 32.0, gs, 17, m == 2 ? 257 : 65);
  const int nt = std::max(8, static_cast<int>(std::lround(8 * gs)));
  const double cr = sigma.cr_norm(GridSpec::cube(m, m == 2 ? 41 : 17));

  struct Sups {
    double dist = 0.0, dist_h = 0.0, perp = 0.0, lower = 0.0;
  };
  detail::TopK top_val(1);
  auto scan = [&](int ns_, int nt_, bool record) {
    Sups out;
    GridSpec g = GridSpec::cube(m - 1, ns_, -R, R);
    std::vector<double> s, x(m);
    for (std::size_t i = 0; i < g.size(); ++i) {
      g.point(i, s);
      Eigen::VectorXd base = B * Eigen::Map<const Eigen::VectorXd>(s.data(), m - 1);
      for (int kt = -nt_; kt <= nt_; ++kt) {
        const double t = delta * kt / nt_;  // |t| <= delta covers supp h
        bool inside = true;
        for (int a = 0; a < m; ++a) {
          x[a] = base[a] + t * nrm[a];
          inside = inside && std::fabs(x[a]) <= 1.0;
        }
        if (!inside) continue;
        Jet<double> hat = f.jet(x, r);
        auto unit = sigma.conormal.unit(x);
        std::vector<double> uu(unit.data(), unit.data() + m);
        auto nh = jet_norms(hat, std::span<const double>(uu));
        out.perp = std::max(out.perp, *nh.perp);
        out.lower = std::max(out.lower, jet_norms(jet_project(hat, r - 1)).c0);
        if (record) {
          top_val.offer(nh.c0, x);
          res.support_samples.push_back(x);
        }
        if (2 * std::abs(kt) <= nt_) {
          double dd = detail::jet_distance(hat, sigma.jet(x));
          out.dist = std::max(out.dist, dd);
          if (kt == 0) out.dist_h = std::max(out.dist_h, dd);
          if (record) res.closeness_samples.push_back(x);
        }
      }
    }
    return out;
  };
  const Sups coarse = scan(ns, nt, true);
  const Sups fine = scan(2 * ns - 1, 2 * nt, false);
  auto moved = [](double a, double b) { return std::fabs(b - a) > 0.05 * std::max(std::fabs(a), 1e-300) && std::fabs(b - a) > 1e-14; };
  const bool resolved = !moved(coarse.dist, fine.dist) && !moved(coarse.perp, fine.perp);
  const double dist = coarse.dist, dist_h = coarse.dist_h, perp = coarse.perp, lower = coarse.lower;

  const double margin = sigma.support_margin.value_or(0.05);
  detail::attach_boundary_check(res, detail::shell_samples(m, 0.5 * margin, m == 2 ? 81 : 21));

  res.params = {{"m", m}, {"n", n}, {"r", r}, {"delta", delta}, {"angle", theta}, {"smoothness", K},
                {"normal", std::vector<double>(nrm.data(), nrm.data() + m)}};
  res.norms = {{"sigma_cr", cr}};
  res.measurements = {{"dist_c0_closeness", dist},
                      {"dist_at_hyperplane", dist_h},
                      {"perp_sup", perp},
                      {"lower_jet_sup", lower},
                      {"adjust_ratio", cr > 0 ? dist / (cr * (theta + delta)) : 0.0},
                      {"perp_ratio", cr > 0 ? perp / (cr * (theta + delta)) : 0.0},
                      {"dist_refined", fine.dist},
                      {"perp_refined", fine.perp},
                      {"resolved", resolved},
                      {"grid", {{"hyperplane_count", ns}, {"normal_levels", 2 * nt + 1}}}};
  res.in_closeness = [nn, delta, m](std::span<const double> y) {
    double t = 0.0;
    for (int i = 0; i < m; ++i) t += y[i] * nn[i];
    return std::fabs(t) <= 0.5 * delta;
  };
  if (opt.defect_check) {
    std::vector<double> center = top_val.items().empty() ? std::vector<double>(m, 0.0) : top_val.items()[0].second;
    std::vector<double> hw(m, 0.5 * delta);
    detail::attach_defect_check(res, center, hw);
  }
  return res;
}

ApproximationResult approximate_primitive(const PrimitiveSection& sigma, int k, double eps, double delta,
                                          double lambda, const PrimitiveOptions& opt) {
  const int m = sigma.m, r = sigma.r;
  require(sigma.conormal.is_constant(), "precondition", "approximate_primitive needs a constant co-normal");
  require(k >= 0 && k < m, "precondition", "skeleton dimension k must satisfy 0 <= k < m");
  const auto& u = *sigma.conormal.constant_value();
  Eigen::VectorXd uv = Eigen::Map<const Eigen::VectorXd>(u.data(), m);
  const double ulen = uv.norm();
  require(ulen > 0.0, "precondition", "co-normal must be nonzero");
  Eigen::VectorXd uh = uv / ulen;

  double angle = 0.0;
  if (k >= 1) {
    std::vector<int> axes(k);
    for (int i = 0; i < k; ++i) axes[i] = i;
    angle = subspace_angle(Subspace::coordinate(m, axes), Subspace::hyperplane(uh));
  }

  if (angle <= lambda) {
    Eigen::VectorXd nrm = uh;
    for (int i = 0; i < k; ++i) nrm[i] = 0.0;
    require(nrm.norm() > 1e-12, "internal", "co-normal lies in the skeleton directions");
    ApproximationResult res = transversality_adjust(sigma, delta, Subspace::hyperplane(nrm.normalized()), opt.adjust);
    res.params["k"] = k;
    res.params["skeleton_angle"] = angle;
    res.params["lambda"] = lambda;
    return res;
  }

  bool along_e1 = true;
  for (int i = 1; i < m; ++i) along_e1 = along_e1 && u[i] == 0.0;
  if (along_e1) {
    ApproximationResult res = transverse_approximate(sigma, k, eps, delta, opt.transverse);
    res.params["skeleton_angle"] = angle;
    res.params["lambda"] = lambda;
    return res;
  }

  // Shear frame: first row u_hat, last row e_m, middle rows unit vectors
  // skipping a pivot p < m-1 with u_p != 0.
  int p = 0;
  for (int i = 0; i < m - 1; ++i)
    if (std::fabs(uh[i]) > std::fabs(uh[p])) p = i;
  require(uh[p] != 0.0, "internal", "co-normal parallel to e_m on the transverse path");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  A.row(0) = uh.transpose();
  for (int i = 0, row = 1; i < m - 1; ++i)
    if (i != p) A(row++, i) = 1.0;
  A(m - 1, m - 1) = 1.0;
  const double sc = 1.0 / A.cwiseAbs().rowwise().sum().maxCoeff();
  detail::Frame fr{sc * A, A.inverse() / sc};
  const double Linv_norm = fr.Linv.cwiseAbs().rowwise().sum().maxCoeff();

  const double eff = eps + Linv_norm * (2.0 * delta + 0.5 * eps);
  require(eff < 1.0, "precondition", "sheared frame leaves no room for the support margin; reduce eps and delta");
  check_support_margin(sigma.v, m, eff, detail::count_for(2.0, 2.0 / eps, 1.0, 41, 201),
                       "v (margin widened for the sheared frame)");

  const Field v = sigma.v;
  const double kr = std::pow(ulen, r);
  const Eigen::MatrixXd Linv = fr.Linv;
  Field vp(m, sigma.n, [v, Linv, kr, m](std::span<const double> xp, int order) {
    Eigen::VectorXd x = Linv * Eigen::Map<const Eigen::VectorXd>(xp.data(), m);
    LayoutPtr lay = Layout::get(m, order);
    bool inside = true;
    for (int i = 0; i < m; ++i) inside = inside && std::fabs(x[i]) <= 1.0;
    if (!inside) return std::vector<TruncatedPoly<double>>(v.out_dim(), TruncatedPoly<double>(lay));
    std::vector<double> xs(x.data(), x.data() + m);
    auto V = v.jet_components(xs, order);
    auto offs = detail::linear_offsets(Linv, lay);
    for (auto& c : V) c = substitute<double>(c, offs) * kr;
    return V;
  });
  std::vector<double> e1(m, 0.0);
  e1[0] = 1.0 / sc;
  PrimitiveSection model = PrimitiveSection::with_constant_conormal(vp, e1, r);
  ApproximationResult res = detail::transverse_core(model, k, eps, delta, opt.transverse, fr, &sigma);
  res.path = "transverse_sheared";
  res.params["skeleton_angle"] = angle;
  res.params["lambda"] = lambda;
  json Lj = json::array();
  for (int i = 0; i < m; ++i) {
    json row = json::array();
    for (int j = 0; j < m; ++j) row.push_back(fr.L(i, j));
    Lj.push_back(row);
  }
  res.params["frame"] = Lj;
  return res;
}

}  // namespace jetlab
