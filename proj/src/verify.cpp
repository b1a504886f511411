#include "jetlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace jetlab {

namespace {

const std::map<std::string, BoundKind>& kind_table() {
  static const std::map<std::string, BoundKind> t = {
      {"h_mixed", BoundKind::h_mixed},
      {"dF", BoundKind::dF},
      {"phi", BoundKind::phi},
      {"b", BoundKind::b},
      {"conclusion_c0", BoundKind::conclusion_c0},
      {"conclusion_perp", BoundKind::conclusion_perp},
      {"adjust", BoundKind::adjust}};
  return t;
}

json grid_json(const GridSpec& g) { return {{"lower", g.lower}, {"upper", g.upper}, {"counts", g.counts}}; }

bool moved(double coarse, double fine) {
  const double d = std::fabs(fine - coarse);
  return d > 0.05 * std::fabs(coarse) && d > 1e-14;
}

const WiggleIsotopy& need_wiggle(const BoundInputs& in, BoundKind k) {
  require(in.wiggle != nullptr, "precondition", "bound kind " + to_string(k) + " needs a wiggle isotopy");
  return *in.wiggle;
}

const ApproximationResult& need_result(const BoundInputs& in, BoundKind k) {
  require(in.result != nullptr, "precondition", "bound kind " + to_string(k) + " needs a construction result");
  return *in.result;
}

double cr_of(const BoundInputs& in) {
  if (in.result && in.result->norms.contains("sigma_cr")) return in.result->norms["sigma_cr"].get<double>();
  require(in.sigma != nullptr, "precondition", "the bound needs sigma or a result carrying sigma_cr");
  return in.sigma->cr_norm(GridSpec::cube(in.sigma->m, in.sigma->m == 2 ? 41 : 17));
}

// max over x in the grid, |y_1 - x_1| < delta and |alpha| + |beta| <= r of
// |d_x^alpha d_y^beta h| / delta^{r - M - N}, M, N the first-coordinate counts.
double h_mixed_max(const PrimitiveSection& s, double delta, const GridSpec& g, int offsets) {
  const int m = s.m, r = s.r;
  LayoutPtr lay = Layout::get(2 * m, r);
  TwoPointGerm h = s.germ();
  double best = 0.0;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.point(i, x);
    y = x;
    for (int k = 0; k < offsets; ++k) {
      // Open interval: offsets at (2k + 1 - offsets)/offsets * delta.
      y[0] = x[0] + delta * (2.0 * k + 1.0 - offsets) / offsets;
      auto comps = h(x, y, r);
      for (std::size_t slot = 0; slot < lay->size(); ++slot) {
        const MultiIndex& ab = lay->index(slot);
        const int first = ab[0] + ab[m];
        const double scale = lay->alpha_factorial(slot) / std::pow(delta, r - first);
        for (const auto& p : comps) best = std::max(best, std::fabs(p[slot]) * scale);
      }
    }
  }
  return best;
}

double dF_max(const WiggleIsotopy& W, const GridSpec& g) {
  const int m = W.dim();
  double best = 0.0;
  std::vector<double> x;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.point(i, x);
    auto p = W.phi_jet(1.0, x, 1);
    double sq = 0.0;
    for (int j = 0; j < m; ++j) sq += p[1 + j] * p[1 + j];
    best = std::max(best, std::sqrt(sq));
  }
  return best;
}

double phi_max(const WiggleIsotopy& W, int order, const GridSpec& g) {
  const int m = W.dim();
  LayoutPtr lay = Layout::get(m, order);
  double best = 0.0;
  std::vector<double> x;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.point(i, x);
    auto c = W.cutoff_jet(x, order);
    for (std::size_t slot = 0; slot < lay->size(); ++slot) {
      const MultiIndex& a = lay->index(slot);
      const int M = a[0];
      const int N = lay->degree(slot) - M;
      const double v = std::fabs(c[slot]) * lay->alpha_factorial(slot) * std::pow(W.eps(), N) * std::pow(W.delta(), M);
      best = std::max(best, v);
    }
  }
  return best;
}

double b_max(const WiggleIsotopy& W, int i, int count) {
  const double ae = W.amplitude() * W.eps();
  const double k = 2.0 / ae;
  double best = 0.0;
  for (int s = 0; s < count; ++s) {
    const double u = -0.5 * ae + ae * s / (count - 1);
    auto e = W.step().derivatives(k * u, i);
    best = std::max(best, std::fabs(W.delta() * e[i] * std::pow(k, i)));
  }
  return best;
}

}  // namespace

std::string to_string(BoundKind k) {
  for (const auto& [name, kind] : kind_table())
    if (kind == k) return name;
  return "unknown";
}

BoundKind bound_kind_from_string(const std::string& s) {
  auto it = kind_table().find(s);
  if (it == kind_table().end()) throw Error("config", "unknown bound kind '" + s + "'");
  return it->second;
}

json BoundStats::to_json() const {
  return {{"kind", to_string(kind)}, {"lhs_max", lhs_max},   {"bound_rhs", bound_rhs}, {"ratio", ratio},
          {"lhs_refined", lhs_refined}, {"resolved", resolved}, {"grid", grid},          {"detail", detail}};
}

GridSpec default_bound_grid(BoundKind kind, const BoundInputs& in) {
  switch (kind) {
    case BoundKind::h_mixed: {
      require(in.sigma != nullptr, "precondition", "h_mixed needs sigma");
      return GridSpec::cube(in.sigma->m, in.sigma->m == 2 ? 17 : 9);
    }
    case BoundKind::dF:
    case BoundKind::phi: {
      const WiggleIsotopy& W = need_wiggle(in, kind);
      const int m = W.dim();
      const double d = W.delta();
      std::vector<double> lo(m, 0.0), hi(m, 0.0);
      std::vector<int> counts(m, 1);
      lo[0] = -2 * d;
      hi[0] = 2 * d;
      counts[0] = 33;
      if (kind == BoundKind::dF) {
        lo[m - 1] = -W.eps();
        hi[m - 1] = W.eps();
        counts[m - 1] = 17;
      } else {
        // The cutoff moves from 1 to 0 across |y_m| in [a eps/4, 3 a eps/8].
        const double ae = W.amplitude() * W.eps();
        lo[m - 1] = -1.5 * ae;
        hi[m - 1] = 1.5 * ae;
        counts[m - 1] = 129;
      }
      return GridSpec::box(lo, hi, counts);
    }
    case BoundKind::b:
      return GridSpec::box({-0.5}, {0.5}, {257});
    default:
      return GridSpec::cube(1, 1);
  }
}

BoundStats bound_check(BoundKind kind, const BoundInputs& in, const std::optional<GridSpec>& grid) {
  BoundStats st;
  st.kind = kind;
  switch (kind) {
    case BoundKind::h_mixed: {
      require(in.sigma != nullptr, "precondition", "h_mixed needs sigma");
      const PrimitiveSection& s = *in.sigma;
      require(s.conormal.is_constant(), "precondition", "h_mixed needs a constant co-normal");
      auto u = s.conormal.raw(std::vector<double>(s.m, 0.0));
      for (int i = 1; i < s.m; ++i)
        require(u[i] == 0.0, "precondition", "h_mixed needs a co-normal along e_1 (model coordinates)");
      const double delta = in.delta > 0 ? in.delta : (in.wiggle ? in.wiggle->delta() : 0.0);
      require(delta > 0.0, "precondition", "h_mixed needs delta > 0");
      GridSpec g = grid.value_or(default_bound_grid(kind, in));
      st.lhs_max = h_mixed_max(s, delta, g, 16);
      st.lhs_refined = h_mixed_max(s, delta, g.refined(2), 32);
      st.bound_rhs = cr_of(in);
      st.grid = grid_json(g);
      st.grid["y1_offsets"] = 16;
      st.detail = {{"delta", delta},
                   {"normalization", "max |d_x^a d_y^b h| / delta^(r - M - N); rhs = ||sigma||_{C^r}"}};
      break;
    }
    case BoundKind::dF: {
      const WiggleIsotopy& W = need_wiggle(in, kind);
      GridSpec g = grid.value_or(default_bound_grid(kind, in));
      st.lhs_max = dF_max(W, g);
      st.lhs_refined = dF_max(W, g.refined(2));
      st.bound_rhs = W.eps() / W.delta();
      st.grid = grid_json(g);
      st.detail = {{"eps", W.eps()},
                   {"delta", W.delta()},
                   {"amplitude", W.amplitude()},
                   {"normalization", "max ||dF_1 - I|| / (eps/delta)"}};
      break;
    }
    case BoundKind::phi: {
      const WiggleIsotopy& W = need_wiggle(in, kind);
      GridSpec g = grid.value_or(default_bound_grid(kind, in));
      st.lhs_max = phi_max(W, in.order, g);
      st.lhs_refined = phi_max(W, in.order, g.refined(2));
      st.bound_rhs = 1.0;
      st.grid = grid_json(g);
      st.detail = {{"eps", W.eps()},
                   {"delta", W.delta()},
                   {"order", in.order},
                   {"normalization", "max |d_alpha phi| eps^N delta^M, N non-first and M first indices"}};
      break;
    }
    case BoundKind::b: {
      const WiggleIsotopy& W = need_wiggle(in, kind);
      const int i = in.order;
      require(i >= 1 && i <= W.smoothness(), "precondition", "b bound needs 1 <= i <= profile smoothness");
      GridSpec g = grid.value_or(default_bound_grid(kind, in));
      const int count = g.counts.at(0);
      st.lhs_max = b_max(W, i, count);
      st.lhs_refined = b_max(W, i, 2 * count - 1);
      st.bound_rhs = W.delta() / std::pow(W.eps(), i);
      st.grid = grid_json(g);
      st.detail = {{"i", i},
                   {"exact_ratio", std::pow(2.0 / W.amplitude(), i) * W.step().sup_derivative(i)},
                   {"normalization", "max |b^(i)| / (delta / eps^i)"}};
      break;
    }
    case BoundKind::conclusion_c0:
    case BoundKind::conclusion_perp:
    case BoundKind::adjust: {
      const ApproximationResult& r = need_result(in, kind);
      const double cr = cr_of(in);
      const auto& M = r.measurements;
      const double delta = r.params.value("delta", 0.0);
      if (kind == BoundKind::adjust) {
        const double theta = r.params.value("angle", in.theta);
        st.lhs_max = M.value("dist_c0_closeness", 0.0);
        st.lhs_refined = M.value("dist_refined", st.lhs_max);
        st.bound_rhs = cr * (theta + delta);
        st.detail = {{"angle", theta}, {"delta", delta}, {"sigma_cr", cr}};
      } else {
        const double eps = r.params.value("eps", 0.0);
        require(eps > 0.0, "precondition", "conclusion bounds need a transverse result (eps in params)");
        const bool c0 = kind == BoundKind::conclusion_c0;
        st.lhs_max = M.value(c0 ? "dist_c0_closeness" : "perp_sup", 0.0);
        st.lhs_refined = M.value(c0 ? "dist_refined" : "perp_refined", st.lhs_max);
        st.bound_rhs = c0 ? cr * (eps + delta / eps) : cr * delta / eps;
        st.detail = {{"eps", eps}, {"delta", delta}, {"sigma_cr", cr}};
      }
      st.grid = M.value("grid", json::object());
      st.resolved = M.value("resolved", true);
      st.ratio = st.bound_rhs > 0 ? st.lhs_max / st.bound_rhs : 0.0;
      return st;
    }
  }
  st.ratio = st.bound_rhs > 0 ? st.lhs_max / st.bound_rhs : 0.0;
  st.resolved = !moved(st.lhs_max, st.lhs_refined);
  return st;
}

const KindSummary* SweepReport::summary(const std::string& kind) const {
  for (const auto& s : summaries)
    if (s.kind == kind) return &s;
  return nullptr;
}

std::string SweepReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "eps,delta,ratio_kind,lhs_max,bound_rhs,ratio,fitted_C,resolved_flag\n";
  for (const auto& row : rows) {
    const KindSummary* s = summary(row.kind);
    os << row.point.eps << ',' << row.point.delta << ',' << row.kind << ',';
    if (row.stats)
      os << row.stats->lhs_max << ',' << row.stats->bound_rhs << ',' << row.stats->ratio << ','
         << (s ? s->fitted_C : 0.0) << ',' << (row.stats->resolved ? 1 : 0) << '\n';
    else
      os << "nan,nan,nan," << (s ? s->fitted_C : 0.0) << ",0\n";
  }
  return os.str();
}

json SweepReport::to_json() const {
  json rj = json::array();
  for (const auto& row : rows) {
    json e = {{"eps", row.point.eps}, {"delta", row.point.delta}, {"theta", row.point.theta}, {"kind", row.kind}};
    if (row.stats) e["stats"] = row.stats->to_json();
    if (!row.error.empty()) e["error"] = row.error;
    rj.push_back(e);
  }
  json sj = json::array();
  for (const auto& s : summaries)
    sj.push_back({{"kind", s.kind},
                  {"count", s.count},
                  {"ratio_min", s.ratio_min},
                  {"ratio_max", s.ratio_max},
                  {"band", s.band()},
                  {"fitted_C", s.fitted_C},
                  {"trend_slope", s.trend_slope},
                  {"lhs_decreasing", s.lhs_decreasing},
                  {"all_resolved", s.all_resolved}});
  return {{"rows", rj}, {"summaries", sj}};
}

SweepReport scaling_sweep(const SweepConstruction& construction, const std::vector<SweepPoint>& lattice,
                          const std::vector<std::string>& kinds) {
  SweepReport rep;
  for (const auto& p : lattice) {
    std::vector<BoundStats> stats;
    std::string err;
    try {
      stats = construction(p);
    } catch (const std::exception& e) {
      err = e.what();
    }
    for (const auto& k : kinds) {
      SweepRow row{p, std::nullopt, k, err};
      for (const auto& s : stats)
        if (to_string(s.kind) == k) row.stats = s;
      if (!row.stats && err.empty()) row.error = "construction returned no " + k + " statistics";
      rep.rows.push_back(row);
    }
  }
  for (const auto& k : kinds) {
    KindSummary s;
    s.kind = k;
    std::vector<double> lr, ll, lrhs;
    double prev = -1.0;
    for (const auto& row : rep.rows) {
      if (row.kind != k || !row.stats) continue;
      const BoundStats& b = *row.stats;
      ++s.count;
      s.all_resolved = s.all_resolved && b.resolved;
      if (prev >= 0.0 && !(b.lhs_max < prev)) s.lhs_decreasing = false;
      prev = b.lhs_max;
      if (b.ratio > 0.0) {
        s.ratio_min = lr.empty() ? b.ratio : std::min(s.ratio_min, b.ratio);
        s.ratio_max = std::max(s.ratio_max, b.ratio);
        lr.push_back(std::log(b.ratio));
      }
      if (b.lhs_max > 0.0 && b.bound_rhs > 0.0) {
        ll.push_back(std::log(b.lhs_max));
        lrhs.push_back(std::log(b.bound_rhs));
      }
    }
    if (!lr.empty()) {
      double mean = 0.0;
      for (double v : lr) mean += v;
      s.fitted_C = std::exp(mean / lr.size());
    }
    if (ll.size() >= 2) {
      double mx = 0.0, my = 0.0;
      for (std::size_t i = 0; i < ll.size(); ++i) {
        mx += lrhs[i];
        my += ll[i];
      }
      mx /= ll.size();
      my /= ll.size();
      double sxy = 0.0, sxx = 0.0;
      for (std::size_t i = 0; i < ll.size(); ++i) {
        sxy += (lrhs[i] - mx) * (ll[i] - my);
        sxx += (lrhs[i] - mx) * (lrhs[i] - mx);
      }
      s.trend_slope = sxx > 0 ? sxy / sxx : 0.0;
    }
    rep.summaries.push_back(s);
  }
  return rep;
}

std::vector<SweepPoint> diagonal_lattice(double eps, double delta, int steps) {
  std::vector<SweepPoint> out;
  for (int i = 0; i <= steps; ++i) {
    out.push_back({eps, delta, 0.0});
    eps /= 2;
    delta /= 4;
  }
  return out;
}

std::vector<SweepPoint> product_lattice(const std::vector<double>& eps, const std::vector<double>& ratio) {
  std::vector<SweepPoint> out;
  for (double e : eps)
    for (double q : ratio) out.push_back({e, q * e, 0.0});
  return out;
}

SweepConstruction transverse_construction(const PrimitiveSection& sigma, int k, const TransverseOptions& opt) {
  return [sigma, k, opt](const SweepPoint& p) {
    ApproximationResult res = transverse_approximate(sigma, k, p.eps, p.delta, opt);
    BoundInputs in;
    in.sigma = &sigma;
    in.result = &res;
    std::vector<BoundStats> out{bound_check(BoundKind::conclusion_c0, in), bound_check(BoundKind::conclusion_perp, in)};
    for (auto& st : out) st.detail["structural_ok"] = res.structural_ok();
    return out;
  };
}

SweepConstruction estimate_construction(const PrimitiveSection& sigma, int smoothness) {
  return [sigma, smoothness](const SweepPoint& p) {
    const int K = smoothness > 0 ? smoothness : sigma.r + 1;
    WiggleIsotopy W(sigma.m, p.eps, p.delta, K);
    BoundInputs in;
    in.sigma = &sigma;
    in.wiggle = &W;
    in.delta = W.delta();
    in.order = sigma.r;
    std::vector<BoundStats> out{bound_check(BoundKind::h_mixed, in), bound_check(BoundKind::dF, in),
                                bound_check(BoundKind::phi, in)};
    in.order = 1;
    out.push_back(bound_check(BoundKind::b, in));
    return out;
  };
}

SweepConstruction adjust_construction(const Field& v, int m, int r, const AdjustOptions& opt) {
  return [v, m, r, opt](const SweepPoint& p) {
    std::vector<double> u(m, 0.0);
    u[0] = std::sin(p.theta);
    u[m - 1] = std::cos(p.theta);
    PrimitiveSection s = PrimitiveSection::with_constant_conormal(v, u, r);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
    e[m - 1] = 1.0;
    ApproximationResult res = transversality_adjust(s, p.delta, Subspace::hyperplane(e), opt);
    BoundInputs in;
    in.sigma = &s;
    in.result = &res;
    in.theta = p.theta;
    BoundStats st = bound_check(BoundKind::adjust, in);
    st.detail["structural_ok"] = res.structural_ok();
    return std::vector<BoundStats>{st};
  };
}

}  // namespace jetlab
