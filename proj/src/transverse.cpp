#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "localmodels_internal.hpp"

namespace jetlab {

TransverseModel::TransverseModel(const PrimitiveSection& sigma, WiggleIsotopy W)
    : m_(sigma.m), n_(sigma.n), r_(sigma.r), v_(sigma.v), W_(std::move(W)) {
  require(m_ >= 2, "precondition", "transverse model needs m >= 2");
  require(r_ >= 1, "precondition", "transverse model needs r >= 1");
  require(W_.dim() == m_, "shape_mismatch", "wiggle dimension differs from the section dimension");
  require(sigma.conormal.is_constant(), "precondition", "transverse model needs a constant co-normal");
  const auto& u = *sigma.conormal.constant_value();
  require(u[0] != 0.0, "precondition", "transverse model needs a co-normal parallel to e_1");
  for (int i = 1; i < m_; ++i)
    require(std::fabs(u[i]) <= 1e-12 * std::fabs(u[0]), "precondition",
            "transverse model needs a co-normal parallel to e_1");
  scale_ = std::pow(u[0], r_);
}

int TransverseModel::rectangle(double x1) const {
  long j = std::lround(x1 / (2.0 * W_.delta()));
  return static_cast<int>(std::clamp<long>(j, -W_.J(), W_.J()));
}

std::vector<double> TransverseModel::b_derivatives(int j, double u, int order) const {
  const double d = W_.delta();
  const double k = 2.0 / (W_.amplitude() * W_.eps());
  auto e = W_.step().derivatives(k * u, order);
  const double s = parity_sign(j);
  std::vector<double> b(order + 1);
  double kk = 1.0;
  for (int i = 0; i <= order; ++i) {
    b[i] = s * d * e[i] * kk;
    kk *= k;
  }
  b[0] += 2.0 * j * d;
  return b;
}

std::vector<TruncatedPoly<double>> TransverseModel::g_jet(std::span<const double> x, int order, int j) const {
  LayoutPtr lay = Layout::get(m_, order);
  auto bd = b_derivatives(j, x[m_ - 1], order);
  TruncatedPoly<double> B = compose_univariate<double>(bd, TruncatedPoly<double>::variable(lay, m_ - 1, x[m_ - 1]));
  const double b0 = bd[0];
  std::vector<double> p(m_, 0.0);
  p[0] = b0;
  for (int i = 1; i < m_ - 1; ++i) p[i] = x[i];
  auto V = v_.jet_components(p, order);
  std::vector<TruncatedPoly<double>> offsets;
  TruncatedPoly<double> dB = B;
  dB[0] = 0.0;
  offsets.push_back(dB);
  for (int i = 1; i < m_ - 1; ++i) offsets.push_back(TruncatedPoly<double>::variable(lay, i, 0.0));
  offsets.push_back(TruncatedPoly<double>(lay));
  TruncatedPoly<double> D = TruncatedPoly<double>::variable(lay, 0, x[0]) - B;
  TruncatedPoly<double> Dr = pow(D, r_) * scale_;
  std::vector<TruncatedPoly<double>> out;
  out.reserve(n_);
  for (const auto& Vc : V) {
    if (Vc.is_zero()) {
      out.emplace_back(lay);
      continue;
    }
    out.push_back(Dr * substitute<double>(Vc, offsets));
  }
  return out;
}

std::vector<TruncatedPoly<double>> TransverseModel::g_jet(std::span<const double> x, int order) const {
  return g_jet(x, order, rectangle(x[0]));
}

std::vector<TruncatedPoly<double>> TransverseModel::f_jet_at(std::span<const double> x, std::span<const double> y,
                                                             int order) const {
  LayoutPtr lay = Layout::get(m_, order);
  if (2.0 * std::fabs(y[m_ - 1]) / (W_.amplitude() * W_.eps()) >= 0.75)
    return std::vector<TruncatedPoly<double>>(n_, TruncatedPoly<double>(lay));
  auto g = g_jet(x, order);
  if (detail::jets_exactly_zero(g)) return g;
  auto phi = W_.cutoff_jet_at(x, y, order);
  for (auto& c : g) c = phi * c;
  return g;
}

std::vector<TruncatedPoly<double>> TransverseModel::f_jet(std::span<const double> x, int order) const {
  auto y = W_.invert(1.0, x);
  return f_jet_at(x, y, order);
}

Field TransverseModel::f() const {
  auto self = std::make_shared<const TransverseModel>(*this);
  return Field(m_, n_, [self](std::span<const double> x, int order) { return self->f_jet(x, order); });
}

namespace detail {

std::vector<TruncatedPoly<double>> linear_offsets(const Eigen::MatrixXd& M, const LayoutPtr& lay) {
  std::vector<TruncatedPoly<double>> out;
  for (int i = 0; i < M.rows(); ++i) {
    TruncatedPoly<double> p(lay);
    if (lay->order() >= 1)
      for (int j = 0; j < M.cols(); ++j) p[1 + j] = M(i, j);
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

std::vector<double> mat_vec(const Eigen::MatrixXd& M, std::span<const double> x) {
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::VectorXd y = M * xv;
  return std::vector<double>(y.data(), y.data() + y.size());
}

bool inside_cube(std::span<const double> x) {
  for (double xi : x)
    if (std::fabs(xi) > 1.0) return false;
  return true;
}

// All combinations of `count` nodes on [-1, 1] for `dims` axes.
std::vector<std::vector<double>> tensor_nodes(int dims, int count) {
  std::vector<std::vector<double>> out;
  if (dims == 0) return {{}};
  GridSpec g = GridSpec::cube(dims, count);
  for (std::size_t i = 0; i < g.size(); ++i) out.push_back(g.point(i));
  return out;
}

}  // namespace

ApproximationResult transverse_core(const PrimitiveSection& model_sigma, int k, double eps, double delta,
                                    const TransverseOptions& opt, const std::optional<Frame>& frame,
                                    const PrimitiveSection* reference) {
  const int m = model_sigma.m, n = model_sigma.n, r = model_sigma.r;
  require(m >= 2, "precondition", "transverse_approximate needs m >= 2");
  require(k >= 0 && k < m, "precondition", "skeleton dimension k must satisfy 0 <= k < m");
  const PrimitiveSection& ref = reference ? *reference : model_sigma;
  const int K = opt.smoothness > 0 ? opt.smoothness : r + 1;
  const double gs = opt.grid_scale;

  WiggleIsotopy W(m, eps, delta, K, opt.amplitude,
                  frame ? std::optional<Eigen::MatrixXd>(frame->Linv) : std::nullopt);
  const double d = W.delta();
  check_support_margin(model_sigma.v, m, eps, count_for(2.0, 2.0 / eps, 1.0, 41, 201));
  if (frame) check_support_margin(ref.v, m, eps, count_for(2.0, 2.0 / eps, 1.0, 41, 201));
  auto model = std::make_shared<const TransverseModel>(model_sigma, W);

  ApproximationResult res;
  res.m = m;
  res.n = n;
  res.r = r;
  res.path = "transverse";
  if (!frame) {
    res.f = model->f();
    res.isotopy = [W](double t) { return W.diffeo(t); };
  } else {
    const Frame fr = *frame;
    res.f = Field(m, n, [model, fr, m](std::span<const double> x, int order) {
      auto xp = mat_vec(fr.L, x);
      auto jets = model->f_jet(xp, order);
      auto offs = linear_offsets(fr.L, Layout::get(m, order));
      for (auto& c : jets) c = substitute<double>(c, offs);
      return jets;
    });
    res.isotopy = [W, fr, m](double t) {
      Eigen::VectorXd col = fr.Linv.col(m - 1);
      Field fwd(m, m, [W, fr, m, t, col](std::span<const double> x, int order) {
        LayoutPtr lay = Layout::get(m, order);
        auto xp = mat_vec(fr.L, x);
        auto phi = substitute<double>(W.phi_jet(t, xp, order), linear_offsets(fr.L, lay));
        std::vector<TruncatedPoly<double>> out;
        for (int i = 0; i < m; ++i) {
          auto p = TruncatedPoly<double>::variable(lay, i, x[i]);
          if (!phi.is_zero()) p += phi * col[i];
          out.push_back(std::move(p));
        }
        return out;
      });
      return Diffeo(fwd, std::nullopt, [W, fr, m, t, col](std::span<const double> y) {
        auto yp = mat_vec(fr.L, y);
        auto xp = W.invert(t, yp);
        std::vector<double> x(y.begin(), y.end());
        double shift = xp[m - 1] - yp[m - 1];
        if (shift != 0.0)
          for (int i = 0; i < m; ++i) x[i] += shift * col[i];
        return x;
      });
    };
  }

  // Reference quantities in original coordinates.
  auto u_raw = *ref.conormal.constant_value();
  Eigen::VectorXd uvec = Eigen::Map<const Eigen::VectorXd>(u_raw.data(), m).normalized();
  std::vector<double> u_unit(uvec.data(), uvec.data() + m);
  const double cr = ref.cr_norm(GridSpec::cube(m, m == 2 ? 41 : 17));

  // Sampling in model y-coordinates.
  const int n1 = count_for(2.0, 8.0 / d, gs);
  const int nmid = count_for(2.0, 8.0, gs, 5, 65);
  const int Kl = std::max(6, static_cast<int>(std::lround(12 * gs)));
  const double level_step = W.support_halfwidth() / Kl;
  const double close_hw = W.closeness_halfwidth() * (1.0 + 1e-12);
  auto mids = tensor_nodes(m - 2, nmid);
  const double h1 = 2.0 / (n1 - 1);

  struct Eval {
    bool ok = false;
    std::vector<double> x;
    Jet<double> hat, ref;
  };
  auto evaluate = [&](const std::vector<double>& yp) {
    Eval e;
    auto xp = W.apply(1.0, yp);
    e.x = frame ? mat_vec(frame->Linv, xp) : xp;
    if (!inside_cube(e.x) || !inside_cube(xp)) return e;
    e.ok = true;
    if (!frame) {
      e.hat.base = e.x;
      e.hat.components = model->f_jet_at(xp, yp, r);
    } else {
      e.hat = res.f.jet(e.x, r);
    }
    e.ref = ref.jet(e.x);
    return e;
  };

  TopK top_dist, top_perp, top_val(1);
  double lower = 0.0;
  std::size_t n_close = 0, n_supp = 0;
  std::vector<double> yp(m);
  for (int i1 = 0; i1 < n1; ++i1) {
    yp[0] = -1.0 + h1 * i1;
    for (const auto& mid : mids) {
      for (int a = 0; a < m - 2; ++a) yp[1 + a] = mid[a];
      for (int kl = -Kl; kl <= Kl; ++kl) {
        yp[m - 1] = kl * level_step;
        Eval e = evaluate(yp);
        if (!e.ok) continue;
        auto nh = jet_norms(e.hat, std::span<const double>(u_unit));
        top_perp.offer(*nh.perp, yp);
        top_val.offer(nh.c0, e.x);
        lower = std::max(lower, jet_norms(jet_project(e.hat, r - 1)).c0);
        res.support_samples.push_back(e.x);
        ++n_supp;
        if (std::fabs(yp[m - 1]) <= close_hw) {
          top_dist.offer(jet_distance(e.hat, e.ref), yp);
          res.closeness_samples.push_back(e.x);
          ++n_close;
        }
      }
    }
  }

  // Local refinement around the largest values.
  double dist_ref = top_dist.max(), perp_ref = top_perp.max();
  if (opt.resolution_check) {
    for (int which = 0; which < 2; ++which) {
      const TopK& tk = which == 0 ? top_dist : top_perp;
      double& best = which == 0 ? dist_ref : perp_ref;
      for (const auto& item : tk.items()) {
        for (int a = -2; a <= 2; ++a)
          for (int b = -2; b <= 2; ++b) {
            if (a == 0 && b == 0) continue;
            std::vector<double> q = item.second;
            q[0] += 0.5 * a * h1;
            q[m - 1] += 0.5 * b * level_step;
            if (which == 0 && std::fabs(q[m - 1]) > close_hw) continue;
            if (std::fabs(q[m - 1]) > W.support_halfwidth()) continue;
            Eval e = evaluate(q);
            if (!e.ok) continue;
            double val = which == 0 ? jet_distance(e.hat, e.ref) : *jet_norms(e.hat, std::span<const double>(u_unit)).perp;
            best = std::max(best, val);
          }
      }
    }
  }
  auto within = [](double coarse, double fine) { return fine <= coarse * 1.05 + 1e-300 || fine == coarse; };
  const bool resolved = within(top_dist.max(), dist_ref) && within(top_perp.max(), perp_ref);

  // Gluing across rectangle boundaries inside U.
  double glue = 0.0;
  {
    auto gmids = tensor_nodes(m - 2, 5);
    const int nlev = 9;
    for (int j = -W.J(); j < W.J(); ++j) {
      std::vector<double> q(m);
      q[0] = (2 * j + 1) * d;
      for (const auto& mid : gmids) {
        for (int a = 0; a < m - 2; ++a) q[1 + a] = mid[a];
        for (int l = 0; l < nlev; ++l) {
          q[m - 1] = W.region_halfwidth() * (-1.0 + 2.0 * (l + 0.5) / nlev);
          auto xp = W.apply(1.0, q);
          auto ga = model->g_jet(xp, r, j);
          auto gb = model->g_jet(xp, r, j + 1);
          double diff = 0.0, size = 0.0;
          for (int c = 0; c < n; ++c)
            for (std::size_t s = 0; s < ga[c].size(); ++s) {
              diff = std::max(diff, std::fabs(ga[c][s] - gb[c][s]));
              size = std::max(size, std::fabs(ga[c][s]));
            }
          glue = std::max(glue, diff / (1.0 + size));
        }
      }
    }
  }
  if (glue > 1e-9) {
    std::ostringstream os;
    os << "gluing residual " << glue << " across rectangle boundaries exceeds 1e-9";
    throw Error("internal", os.str());
  }
  res.checks.push_back({"gluing", true, glue, "g from adjacent rectangles agrees inside U"});

  // Isotopy contract: C0 smallness, monotonicity, V-invariance.
  double disp = 0.0;
  {
    const int nm = count_for(2.0, 8.0 / eps, gs, 17, 65);
    auto cmids = tensor_nodes(m - 2, 5);
    std::vector<Diffeo> Ft;
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) Ft.push_back(res.isotopy(t));
    std::vector<double> x(m);
    for (int i1 = 0; i1 < n1; ++i1) {
      x[0] = -1.0 + h1 * i1;
      for (const auto& mid : cmids) {
        for (int a = 0; a < m - 2; ++a) x[1 + a] = mid[a];
        for (int l = 0; l < nm; ++l) {
          x[m - 1] = -1.0 + 2.0 * l / (nm - 1);
          for (const auto& F : Ft) {
            auto y = F.apply(x);
            double dd = 0.0;
            for (int i = 0; i < m; ++i) dd += (y[i] - x[i]) * (y[i] - x[i]);
            disp = std::max(disp, std::sqrt(dd));
          }
        }
      }
    }
  }
  res.checks.push_back({"isotopy_c0", disp < eps, disp, "max |F_t(x) - x| over t in {0,1/4,1/2,3/4,1}, must be < eps"});

  double mono = 1.0;
  {
    std::vector<double> lo(m, -1.0), hi(m, 1.0);
    std::vector<int> cnt(m, 5);
    cnt[0] = std::min(n1, 4001);
    for (double side : {-1.0, 1.0}) {
      cnt[m - 1] = 17;
      lo[m - 1] = side > 0 ? 1.0 - 0.75 * eps : -1.0 + 0.5 * eps;
      hi[m - 1] = side > 0 ? 1.0 - 0.5 * eps : -1.0 + 0.75 * eps;
      mono = std::min(mono, W.min_monotonicity(GridSpec::box(lo, hi, cnt)));
    }
    if (frame) mono = std::min(mono, W.min_monotonicity(GridSpec::cube(m, 33)));
  }
  const double cert = W.injectivity_certificate();
  res.checks.push_back({"injectivity", cert < 0.5 && mono > 0.0, mono,
                        "certificate a*kappa*sup|psi'| = " + std::to_string(cert) + ", measured min 1 + dphi/dx_m"});

  {
    // First row of dF_t is (1, 0, ..., 0); with a frame the tested row is u^T dF_t = u^T.
    std::size_t bad = 0, tested = 0;
    double worst = 0.0;
    const std::size_t stride = std::max<std::size_t>(1, res.support_samples.size() / 400);
    for (double t : {0.25, 0.5, 1.0}) {
      Diffeo F = res.isotopy(t);
      for (std::size_t i = 0; i < res.support_samples.size(); i += stride) {
        auto J = F.jet(res.support_samples[i], 1);
        ++tested;
        if (!frame) {
          if (J.components[0][1] != 1.0) ++bad;
          for (int jx = 1; jx < m; ++jx)
            if (J.components[0][1 + jx] != 0.0) ++bad;
        } else {
          for (int jx = 0; jx < m; ++jx) {
            double row = 0.0;
            for (int c = 0; c < m; ++c) row += uvec[c] * J.components[c][1 + jx];
            double dev = std::fabs(row - uvec[jx]);
            worst = std::max(worst, dev);
            if (dev > 1e-12) ++bad;
          }
        }
      }
    }
    res.checks.push_back({"v_invariance", bad == 0, frame ? worst : static_cast<double>(bad),
                          std::to_string(tested) + " Jacobians tested" + (frame ? " (u^T dF_t = u^T)" : " (exact)")});
  }

  // Shell kept strictly inside the zero set of the boundary factors; at the
  // edge itself psi_out is only zero up to rounding of (1 - |x_i|) / eps.
  const double bd = count_for(2.0, 4.0 / eps, 1.0, 21, m == 2 ? 161 : 41);
  detail::attach_boundary_check(res, detail::shell_samples(m, 0.45 * eps, static_cast<int>(bd)));

  const double dist = top_dist.max(), perp = top_perp.max();
  res.params = {{"m", m},
                {"n", n},
                {"r", r},
                {"k", k},
                {"eps", eps},
                {"delta", d},
                {"delta_requested", W.delta_requested()},
                {"J", W.J()},
                {"amplitude", W.amplitude()},
                {"smoothness", K},
                {"injectivity_certificate", cert}};
  res.norms = {{"sigma_cr", cr}};
  res.measurements = {{"dist_c0_closeness", dist},
                      {"perp_sup", perp},
                      {"lower_jet_sup", lower},
                      {"dist_refined", dist_ref},
                      {"perp_refined", perp_ref},
                      {"resolved", resolved},
                      {"c0_ratio", cr > 0 ? dist / (cr * (eps + d / eps)) : 0.0},
                      {"perp_ratio", cr > 0 ? perp / (cr * d / eps) : 0.0},
                      {"max_displacement", disp},
                      {"min_monotonicity", mono},
                      {"gluing_residual", glue},
                      {"closeness_samples", n_close},
                      {"support_samples", n_supp},
                      {"grid", {{"x1_count", n1}, {"mid_count", nmid}, {"levels", 2 * Kl + 1}}}};

  const double hw_c = close_hw;
  std::optional<Frame> frc = frame;
  res.in_closeness = [W, hw_c, frc, m](std::span<const double> x) {
    auto xp = frc ? mat_vec(frc->L, x) : std::vector<double>(x.begin(), x.end());
    if (!inside_cube(xp)) return false;
    auto y = W.invert(1.0, xp);
    return std::fabs(y[m - 1]) <= hw_c;
  };

  if (opt.defect_check) {
    std::vector<double> center = top_val.items().empty() ? std::vector<double>(m, 0.0) : top_val.items()[0].second;
    // Window small enough that 65 nodes resolve the cutoff transition in y_m.
    const double narrow = 0.25 * W.amplitude() * eps;
    std::vector<double> hw(m, d);
    if (frame)
      std::fill(hw.begin(), hw.end(), narrow);
    else
      hw[m - 1] = narrow;
    detail::attach_defect_check(res, center, hw);
  }
  return res;
}

}  // namespace detail

ApproximationResult transverse_approximate(const PrimitiveSection& sigma, int k, double eps, double delta,
                                           const TransverseOptions& opt) {
  return detail::transverse_core(sigma, k, eps, delta, opt, std::nullopt, nullptr);
}

ApproximationResult parametric_transverse_approximate(const Field& v_family, int m, int q, int r, int k, double eps,
                                                      double delta, const ParametricOptions& opt) {
  require(q >= 1, "precondition", "parametric run needs q >= 1");
  require(v_family.in_dim() == m + q, "shape_mismatch", "family must be a field on R^{m+q}");
  const int n = v_family.out_dim();
  const int K = opt.transverse.smoothness > 0 ? opt.transverse.smoothness : r + 1;
  WiggleIsotopy base(m, eps, delta, K, opt.transverse.amplitude);

  auto restrict_to = [&](const std::vector<double>& z) {
    return Field(m, n, [v_family, z, m](std::span<const double> x, int order) {
      std::vector<double> xz(x.begin(), x.end());
      xz.insert(xz.end(), z.begin(), z.end());
      LayoutPtr lay = Layout::get(m, order);
      auto full = v_family.jet_components(xz, order);
      std::vector<TruncatedPoly<double>> offs;
      for (int i = 0; i < m; ++i) offs.push_back(TruncatedPoly<double>::variable(lay, i, 0.0));
      for (std::size_t j = 0; j < z.size(); ++j) offs.emplace_back(lay);
      for (auto& c : full) c = substitute<double>(c, offs);
      return full;
    });
  };

  // Interior z nodes plus boundary-collar nodes.
  std::vector<std::vector<double>> zs;
  {
    GridSpec g = GridSpec::cube(q, std::max(opt.z_count, 2));
    for (std::size_t i = 0; i < g.size(); ++i) zs.push_back(g.point(i));
    for (double lvl : {1.0 - 0.5 * eps, 1.0 - 0.25 * eps})
      for (double s : {-1.0, 1.0}) {
        std::vector<double> z(q, 0.0);
        z[0] = s * lvl;
        zs.push_back(z);
      }
  }

  std::vector<double> e1(m, 0.0);
  e1[0] = 1.0;
  ApproximationResult out;
  out.m = m;
  out.n = n;
  out.r = r;
  out.path = "parametric";
  double dist = 0.0, perp = 0.0, c0r = 0.0, pr = 0.0;
  std::size_t interior_runs = 0, boundary_z = 0, boundary_bad = 0, collar_z = 0;
  bool all_ok = true, resolved = true;
  json per_z = json::array();
  GridSpec xg = GridSpec::cube(m, 17);
  for (const auto& z : zs) {
    WiggleIsotopy Wz = base.with_parameter(z);
    Field vz = restrict_to(z);
    PrimitiveSection sz = PrimitiveSection::with_constant_conormal(vz, e1, r);
    const double c = Wz.parameter_factor();
    json row = {{"z", z}, {"parameter_factor", c}};
    if (c == 1.0) {
      ApproximationResult rz = transverse_approximate(sz, k, eps, delta, opt.transverse);
      dist = std::max(dist, rz.measurements["dist_c0_closeness"].get<double>());
      perp = std::max(perp, rz.measurements["perp_sup"].get<double>());
      c0r = std::max(c0r, rz.measurements["c0_ratio"].get<double>());
      pr = std::max(pr, rz.measurements["perp_ratio"].get<double>());
      resolved = resolved && rz.measurements["resolved"].get<bool>();
      all_ok = all_ok && rz.structural_ok();
      row["dist_c0_closeness"] = rz.measurements["dist_c0_closeness"];
      row["perp_sup"] = rz.measurements["perp_sup"];
      row["structural_ok"] = rz.structural_ok();
      ++interior_runs;
    } else {
      // sigma_z must vanish wherever the parameter factor is below 1.
      TransverseModel mz(sz, Wz);
      std::vector<double> x;
      std::size_t bad = 0;
      const bool boundary = c == 0.0;
      for (std::size_t i = 0; i < xg.size(); ++i) {
        xg.point(i, x);
        auto vv = vz.value(x);
        for (double vvc : vv)
          if (vvc != 0.0) throw Error("precondition", "sigma_z must vanish where the parameter factor is below 1");
        if (!detail::jets_exactly_zero(mz.f_jet(x, r))) ++bad;
        if (boundary && Wz.apply(1.0, x) != x) ++bad;
      }
      if (boundary) {
        ++boundary_z;
        boundary_bad += bad;
      } else {
        ++collar_z;
        all_ok = all_ok && bad == 0;
      }
      row["zero_violations"] = bad;
    }
    per_z.push_back(row);
  }
  out.params = {{"m", m}, {"n", n}, {"r", r}, {"k", k}, {"q", q}, {"eps", eps}, {"delta", base.delta()},
                {"delta_requested", delta}, {"amplitude", base.amplitude()}, {"z_count", opt.z_count}};
  out.measurements = {{"dist_c0_closeness", dist}, {"perp_sup", perp}, {"c0_ratio", c0r}, {"perp_ratio", pr},
                      {"resolved", resolved}, {"interior_runs", interior_runs}, {"per_z", per_z}};
  out.checks.push_back({"boundary_z_zero", boundary_bad == 0 && boundary_z > 0, static_cast<double>(boundary_bad),
                        std::to_string(boundary_z) + " boundary z: F^z = id and sigma_hat_z = 0"});
  out.checks.push_back({"per_z_structural", all_ok, 0.0,
                        std::to_string(interior_runs) + " interior runs, " + std::to_string(collar_z) + " collar z"});
  // f and F_t of the family at z = 0.
  std::vector<double> z0(q, 0.0);
  WiggleIsotopy W0 = base.with_parameter(z0);
  TransverseModel m0(PrimitiveSection::with_constant_conormal(restrict_to(z0), e1, r), W0);
  out.f = m0.f();
  out.isotopy = [W0](double t) { return W0.diffeo(t); };
  return out;
}

}  // namespace jetlab
