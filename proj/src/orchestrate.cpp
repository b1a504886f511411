#include <algorithm>
#include <cmath>
#include <sstream>

#include "localmodels_internal.hpp"

namespace jetlab {

namespace {

template <class T>
std::vector<T> strided(const std::vector<T>& v, std::size_t cap) {
  if (v.size() <= cap) return v;
  std::vector<T> out;
  const double step = static_cast<double>(v.size()) / cap;
  for (std::size_t i = 0; i < cap; ++i) out.push_back(v[static_cast<std::size_t>(i * step)]);
  return out;
}

// Composite t -> F^1_t o F^2_t o ... o F^N_t; identity stages omitted.
std::function<Diffeo(double)> chain_isotopies(const std::vector<std::function<Diffeo(double)>>& stages) {
  if (stages.empty()) return {};
  return [stages](double t) {
    Diffeo F = stages[0](t);
    for (std::size_t i = 1; i < stages.size(); ++i) F = compose(F, stages[i](t));
    return F;
  };
}

// Largest deviation of the unit co-normal from its value at the origin.
double conormal_variation(const HyperplaneField& u, int m, Eigen::VectorXd& u0) {
  std::vector<double> origin(m, 0.0);
  u0 = u.unit(origin);
  double worst = 0.0;
  GridSpec g = GridSpec::cube(m, 9, -0.9, 0.9);
  std::vector<double> x;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.point(i, x);
    worst = std::max(worst, (u.unit(x) - u0).norm());
  }
  return worst;
}

struct Stage {
  ApproximationResult result;
  std::optional<Diffeo> before;  // accumulated F_1 before this stage
  bool tangent = false;
};

// Samples of a stage mapped to original coordinates by the accumulated F_1.
std::vector<std::vector<double>> to_original(const Stage& st, const std::vector<std::vector<double>>& pts,
                                             std::size_t cap) {
  auto sub = strided(pts, cap);
  if (!st.before) return sub;
  for (auto& x : sub) x = st.before->apply(x);
  return sub;
}

bool in_stage_region(const Stage& st, std::span<const double> x) {
  if (!st.result.in_closeness) return true;
  if (!st.before) return st.result.in_closeness(x);
  auto y = st.before->invert(x);
  return st.result.in_closeness(y);
}

// Defect window of a sub-result, or a delta-sized box when it has none.
std::vector<double> stage_window(const ApproximationResult& r, const StageParams& sp) {
  if (r.measurements.contains("defect_window")) return r.measurements["defect_window"].get<std::vector<double>>();
  return std::vector<double>(r.m > 0 ? r.m : 1, 0.5 * sp.delta);
}

}  // namespace

ApproximationResult approximate_top_order(const TopOrderSection& sigma, int k, const std::vector<StageParams>& schedule,
                                          const TopOrderOptions& opt) {
  sigma.validate();
  const int m = sigma.m, n = sigma.n, r = sigma.r;
  require(m <= 2 && r <= 2 && n <= 2, "unsupported", "approximate_top_order supports m <= 2, r <= 2, n <= 2 only");
  require(r >= 1, "precondition", "approximate_top_order needs r >= 1");
  require(!schedule.empty(), "precondition", "schedule must contain at least one (eps, delta) pair");

  auto terms = decompose_top_order(sigma, true);
  // Tangent terms first.
  std::vector<std::pair<PrimitiveTerm, double>> ordered;
  for (auto& t : terms) {
    Eigen::VectorXd w(m);
    for (int i = 0; i < m; ++i) w[i] = t.term.conormal[i];
    double angle = 0.0;
    if (k >= 1) {
      std::vector<int> axes(k);
      for (int i = 0; i < k; ++i) axes[i] = i;
      angle = subspace_angle(Subspace::coordinate(m, axes), Subspace::hyperplane(w.normalized()));
    }
    ordered.emplace_back(std::move(t), angle);
  }
  std::stable_partition(ordered.begin(), ordered.end(), [&](const auto& p) { return p.second <= opt.lambda; });

  ApproximationResult res;
  res.m = m;
  res.n = n;
  res.r = r;
  res.path = "top_order";
  json stages_json = json::array();
  std::vector<Stage> stages;
  std::vector<std::function<Diffeo(double)>> isotopies;
  std::optional<Diffeo> F;
  Field total = Field::zero(m, n);

  for (std::size_t i = 0; i < ordered.size(); ++i) {
    const auto& term = ordered[i].first;
    const StageParams sp = schedule[std::min(i, schedule.size() - 1)];
    PrimitiveSection s = term.section;
    if (s.is_zero()) continue;
    try {
      if (F) {
        PrimitiveSection pb = pullback_primitive(*F, s);
        Eigen::VectorXd u0;
        double var = conormal_variation(pb.conormal, m, u0);
        if (var > 1e-9) {
          std::ostringstream os;
          os << "pulled-back co-normal is not constant (variation " << var
             << "); only constant co-normals are handled at this scale";
          throw Error("unsupported", os.str());
        }
        std::vector<double> uu(u0.data(), u0.data() + m);
        // The raw pulled-back co-normal has the length of the original one.
        double len = 0.0;
        for (int c : term.term.conormal) len += static_cast<double>(c) * c;
        for (auto& c : uu) c *= std::sqrt(len);
        s = PrimitiveSection::with_constant_conormal(pb.v, uu, r);
      }
      ApproximationResult ri = approximate_primitive(s, k, sp.eps, sp.delta, opt.lambda, opt.primitive);
      Field piece = ri.f;
      if (F) piece = ri.f.after(F->inverse().forward());
      total = total + piece;
      stages_json.push_back({{"index", i},
                             {"conormal", term.term.conormal},
                             {"path", ri.path},
                             {"eps", sp.eps},
                             {"delta", sp.delta},
                             {"structural_ok", ri.structural_ok()},
                             {"report", ri.to_json()}});
      Stage st{ri, F, ri.path == "tangent"};
      if (ri.isotopy) {
        Diffeo F1 = ri.isotopy(1.0);
        F = F ? compose(*F, F1) : F1;
        isotopies.push_back(ri.isotopy);
      }
      stages.push_back(std::move(st));
    } catch (const Error& e) {
      std::ostringstream os;
      os << "stage " << i << " (co-normal";
      for (int c : term.term.conormal) os << ' ' << c;
      os << "): " << e.what();
      throw Error("stage_failure", os.str());
    }
  }

  res.f = total;
  res.isotopy = chain_isotopies(isotopies);
  for (std::size_t i = 0; i < stages.size(); ++i)
    res.checks.push_back({"stage_" + std::to_string(i) + "_structural", stages[i].result.structural_ok(), 0.0,
                          stages[i].result.path});

  double dist = 0.0, lower = 0.0;
  std::size_t n_close = 0;
  detail::TopK top_val(1);
  if (!stages.empty()) {
    // Every stage's own samples plus a uniform grid; the joint closeness
    // region is an intersection and may be thin.
    std::vector<std::vector<double>> cand;
    for (const auto& st : stages) {
      auto pts = to_original(st, st.result.closeness_samples, 20000 / stages.size());
      cand.insert(cand.end(), pts.begin(), pts.end());
    }
    double dmin = schedule[0].delta;
    for (const auto& s : schedule) dmin = std::min(dmin, s.delta);
    GridSpec cg = GridSpec::cube(m, std::min(m == 1 ? 4001 : 401, static_cast<int>(std::ceil(8.0 / dmin)) + 1));
    for (std::size_t i = 0; i < cg.size(); ++i) cand.push_back(cg.point(i));
    for (const auto& x : cand) {
      bool ok = true;
      for (const auto& st : stages) ok = ok && in_stage_region(st, x);
      if (!ok) continue;
      Jet<double> hat = res.f.jet(x, r);
      dist = std::max(dist, detail::jet_distance(hat, sigma.at(x)));
      res.closeness_samples.push_back(x);
      ++n_close;
    }
    for (const auto& st : stages)
      for (const auto& x : to_original(st, st.result.support_samples, 20000)) {
        Jet<double> hat = res.f.jet(x, r);
        lower = std::max(lower, jet_norms(jet_project(hat, r - 1)).c0);
        top_val.offer(jet_norms(hat).c0, x);
        res.support_samples.push_back(x);
      }
  }
  {
    GridSpec g = GridSpec::cube(m, m == 2 ? 41 : 17);
    std::vector<double> x;
    for (std::size_t i = 0; i < g.size(); ++i) {
      g.point(i, x);
      lower = std::max(lower, jet_norms(jet_project(res.f.jet(x, r), r - 1)).c0);
    }
  }
  std::vector<Stage> stage_copy = stages;
  res.in_closeness = [stage_copy](std::span<const double> x) {
    for (const auto& st : stage_copy)
      if (!in_stage_region(st, x)) return false;
    return true;
  };

  double min_eps = schedule[0].eps;
  for (const auto& s : schedule) min_eps = std::min(min_eps, s.eps);
  detail::attach_boundary_check(res, detail::shell_samples(m, 0.45 * min_eps, m == 2 ? 81 : 21));

  json sched = json::array();
  for (const auto& s : schedule) sched.push_back({{"eps", s.eps}, {"delta", s.delta}});
  res.params = {{"m", m}, {"n", n}, {"r", r}, {"k", k}, {"lambda", opt.lambda}, {"schedule", sched},
                {"stage_count", stages.size()}};
  res.measurements = {{"dist_c0_closeness", dist},
                      {"lower_jet_sup", lower},
                      {"closeness_samples", n_close},
                      {"stages", stages_json}};
  if (opt.defect_check && !stages.empty()) {
    std::vector<double> center = top_val.items().empty() ? std::vector<double>(m, 0.0) : top_val.items()[0].second;
    detail::attach_defect_check(res, center, stage_window(stages.back().result, schedule.back()));
  }
  if (stages.empty()) res.path = "zero";
  return res;
}

CoefficientSection CoefficientSection::zero(int m, int n, int r) {
  CoefficientSection s{m, n, r, {}};
  s.a.assign(Layout::get(m, r)->size(), Field::zero(m, n));
  return s;
}

CoefficientSection CoefficientSection::from_top_order(const TopOrderSection& t) {
  CoefficientSection s = zero(t.m, t.n, t.r);
  LayoutPtr lay = Layout::get(t.m, t.r);
  for (std::size_t i = 0; i < t.a.size(); ++i) s.a[lay->degree_begin(t.r) + i] = t.a[i];
  return s;
}

void CoefficientSection::validate() const {
  require(m >= 1 && n >= 1 && r >= 0, "precondition", "coefficient section needs m, n >= 1 and r >= 0");
  require(a.size() == Layout::get(m, r)->size(), "shape_mismatch", "one coefficient field per monomial of degree <= r");
  for (const auto& f : a)
    require(f.in_dim() == m && f.out_dim() == n, "shape_mismatch", "coefficient field has the wrong shape");
}

Jet<double> CoefficientSection::at(std::span<const double> x) const {
  LayoutPtr lay = Layout::get(m, r);
  Jet<double> j = Jet<double>::zero(std::vector<double>(x.begin(), x.end()), n, r);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].is_literal_zero()) continue;
    auto v = a[i].value(x);
    for (int c = 0; c < n; ++c) j.components[c][i] = v[c];
  }
  return j;
}

CoefficientSection CoefficientSection::truncated(int l) const {
  require(l >= 0 && l <= r, "precondition", "truncation order must satisfy 0 <= l <= r");
  CoefficientSection s{m, n, l, {}};
  s.a.assign(a.begin(), a.begin() + Layout::get(m, l)->size());
  return s;
}

TopOrderSection CoefficientSection::top_part() const {
  LayoutPtr lay = Layout::get(m, r);
  TopOrderSection t{m, n, r, {}};
  t.a.assign(a.begin() + lay->degree_begin(r), a.end());
  return t;
}

int CoefficientSection::vanishing_order() const {
  LayoutPtr lay = Layout::get(m, r);
  int l = -1;
  for (int d = 0; d <= r; ++d) {
    for (std::size_t i = lay->degree_begin(d); i < lay->degree_begin(d + 1); ++i)
      if (!a[i].is_literal_zero()) return l;
    l = d;
  }
  return l;
}

namespace {

// Top-order part of sigma - j^r h as coefficient fields; jets of
// d^alpha h / alpha! come from j^{r+s} h with C(alpha+gamma, alpha) shifts.
TopOrderSection top_remainder(const CoefficientSection& sigma, const Field& h) {
  const int m = sigma.m, n = sigma.n, r = sigma.r;
  LayoutPtr lay = Layout::get(m, r);
  TopOrderSection out{m, n, r, {}};
  for (std::size_t i = lay->degree_begin(r); i < lay->size(); ++i) {
    const MultiIndex alpha = lay->index(i);
    const Field a = sigma.a[i];
    if (h.is_literal_zero()) {
      out.a.push_back(a);
      continue;
    }
    out.a.push_back(Field(m, n, [a, h, alpha, m, n, r](std::span<const double> x, int order) {
      LayoutPtr lo = Layout::get(m, order);
      LayoutPtr hi = Layout::get(m, order + r);
      auto A = a.jet_components(x, order);
      auto H = h.jet_components(x, order + r);
      for (int c = 0; c < n; ++c) {
        for (std::size_t g = 0; g < lo->size(); ++g) {
          MultiIndex ag = lo->index(g);
          double binom = 1.0;
          for (int v = 0; v < m; ++v) {
            ag[v] += alpha[v];
            binom *= static_cast<double>(binomial(ag[v], alpha[v]));
          }
          A[c][g] -= binom * H[c][hi->find(ag)];
        }
      }
      return A;
    }));
  }
  return out;
}

// Pullback of a top-order section by a diffeomorphism H: coefficient of
// Y^beta in sum_alpha nu_alpha(H(x)) (dH_x Y)^alpha, computed in (X, Y).
TopOrderSection pullback_top_order(const Diffeo& Hd, const TopOrderSection& nu) {
  const int m = nu.m, n = nu.n, r = nu.r;
  LayoutPtr lay = Layout::get(m, r);
  TopOrderSection out{m, n, r, {}};
  const std::size_t first = lay->degree_begin(r);
  const Field Hf = Hd.forward();
  auto coefficient_jets = [Hf, nu, m, n, r, first, lay](std::span<const double> x, int order, std::size_t beta_slot) {
    LayoutPtr lx = Layout::get(m, order);
    LayoutPtr l2 = Layout::get(2 * m, order + r);
    auto Hj = Hf.jet_components(x, order + 1);
    std::vector<double> Hx(m);
    for (int i = 0; i < m; ++i) Hx[i] = Hj[i].constant_term();
    // Embed X-polynomials into (X, Y).
    auto embed = [&](const TruncatedPoly<double>& p) {
      TruncatedPoly<double> q(l2);
      for (std::size_t s = 0; s < p.size(); ++s) {
        MultiIndex e = p.layout().index(s);
        e.resize(2 * m, 0);
        int slot = l2->find(e);
        if (slot >= 0) q[slot] += p[s];
      }
      return q;
    };
    std::vector<TruncatedPoly<double>> dHY(m, TruncatedPoly<double>(l2));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        dHY[i] += embed(Hj[i].derivative(j).truncated(order)) * TruncatedPoly<double>::variable(l2, m + j, 0.0);
    std::vector<TruncatedPoly<double>> offs;
    for (int i = 0; i < m; ++i) {
      TruncatedPoly<double> d = Hj[i].truncated(order);
      d[0] = 0.0;
      offs.push_back(d);
    }
    std::vector<TruncatedPoly<double>> total(n, TruncatedPoly<double>(l2));
    for (std::size_t i = 0; i < nu.a.size(); ++i) {
      if (nu.a[i].is_literal_zero()) continue;
      const MultiIndex& alpha = lay->index(first + i);
      TruncatedPoly<double> mono = TruncatedPoly<double>::constant(l2, 1.0);
      for (int v = 0; v < m; ++v) mono = mono * pow(dHY[v], alpha[v]);
      auto A = nu.a[i].jet_components(Hx, order);
      for (int c = 0; c < n; ++c) total[c] += embed(substitute<double>(A[c], offs)) * mono;
    }
    const MultiIndex& beta = lay->index(beta_slot);
    std::vector<TruncatedPoly<double>> res(n, TruncatedPoly<double>(lx));
    for (std::size_t g = 0; g < lx->size(); ++g) {
      MultiIndex e = lx->index(g);
      e.insert(e.end(), beta.begin(), beta.end());
      int slot = l2->find(e);
      for (int c = 0; c < n; ++c) res[c][g] = slot >= 0 ? total[c][slot] : 0.0;
    }
    return res;
  };
  for (std::size_t b = first; b < lay->size(); ++b)
    out.a.push_back(Field(m, n, [coefficient_jets, b](std::span<const double> x, int order) {
      return coefficient_jets(x, order, b);
    }));
  return out;
}

ApproximationResult reduce_impl(const CoefficientSection& sigma, int l, int k, const std::vector<StageParams>& schedule,
                                const TopOrderOptions& opt, int depth) {
  sigma.validate();
  const int m = sigma.m, n = sigma.n, r = sigma.r;
  require(depth <= r + 1, "internal", "order reduction recursed deeper than r");
  require(l >= 0 && l < r, "precondition", "reduce_order needs 0 <= l < r");
  require(sigma.vanishing_order() >= l, "precondition",
          "sigma^{(l)} must vanish (coefficients of degree <= l literally zero)");
  if (l == r - 1) {
    ApproximationResult res = approximate_top_order(sigma.top_part(), k, schedule, opt);
    res.params["l"] = l;
    return res;
  }

  // mu = sigma^{(r-1)}; its solution h must be C^{2r} for the remainder jets.
  CoefficientSection mu = sigma.truncated(r - 1);
  TopOrderOptions mu_opt = opt;
  mu_opt.primitive.transverse.smoothness = std::max(opt.primitive.transverse.smoothness, 2 * r + 1);
  mu_opt.primitive.adjust.smoothness = std::max(opt.primitive.adjust.smoothness, 2 * r + 1);
  ApproximationResult rm = reduce_impl(mu, l, k, schedule, mu_opt, depth + 1);

  TopOrderSection nu = top_remainder(sigma, rm.f);
  std::optional<Diffeo> H1;
  if (rm.isotopy) H1 = rm.isotopy(1.0);
  TopOrderSection nu_pb = H1 ? pullback_top_order(*H1, nu) : nu;
  ApproximationResult rn;
  try {
    rn = approximate_top_order(nu_pb, k, schedule, opt);
  } catch (const Error& e) {
    throw Error("stage_failure", std::string("order-r remainder after the order-(r-1) solve: ") + e.what());
  }

  ApproximationResult res;
  res.m = m;
  res.n = n;
  res.r = r;
  res.path = "reduce";
  Field piece = H1 ? rn.f.after(H1->inverse().forward()) : rn.f;
  res.f = rm.f + piece;
  std::vector<std::function<Diffeo(double)>> iso;
  if (rm.isotopy) iso.push_back(rm.isotopy);
  if (rn.isotopy) iso.push_back(rn.isotopy);
  if (!iso.empty()) {
    res.isotopy = [iso](double t) {
      Diffeo F = iso[0](t);
      for (std::size_t i = 1; i < iso.size(); ++i) F = compose(F, iso[i](t));
      return F;
    };
  }
  res.checks.push_back({"lower_stage_structural", rm.structural_ok(), 0.0, rm.path});
  res.checks.push_back({"remainder_stage_structural", rn.structural_ok(), 0.0, rn.path});

  auto in_mu = rm.in_closeness;
  auto in_nu = rn.in_closeness;
  res.in_closeness = [in_mu, in_nu, H1](std::span<const double> x) {
    if (in_mu && !in_mu(x)) return false;
    if (!in_nu) return true;
    if (!H1) return in_nu(x);
    auto y = H1->invert(x);
    return in_nu(y);
  };

  double dist = 0.0, lowl = 0.0;
  std::size_t n_close = 0;
  detail::TopK top_val(1);
  {
    auto pts = strided(rn.closeness_samples, 20000);
    for (auto& x : pts) {
      if (H1) x = H1->apply(x);
      if (in_mu && !in_mu(x)) continue;
      Jet<double> hat = res.f.jet(x, r);
      dist = std::max(dist, detail::jet_distance(hat, sigma.at(x)));
      res.closeness_samples.push_back(x);
      ++n_close;
    }
  }
  auto probe = [&](const std::vector<double>& x) {
    Jet<double> hat = res.f.jet(x, r);
    lowl = std::max(lowl, jet_norms(jet_project(hat, l)).c0);
    top_val.offer(jet_norms(hat).c0, x);
  };
  for (const auto& x : strided(rm.support_samples, 20000)) probe(x);
  for (auto x : strided(rn.support_samples, 20000)) {
    if (H1) x = H1->apply(x);
    probe(x);
    res.support_samples.push_back(x);
  }
  {
    GridSpec g = GridSpec::cube(m, m == 2 ? 41 : 17);
    for (std::size_t i = 0; i < g.size(); ++i) probe(g.point(i));
  }
  double min_eps = schedule[0].eps;
  for (const auto& s : schedule) min_eps = std::min(min_eps, s.eps);
  detail::attach_boundary_check(res, detail::shell_samples(m, 0.45 * min_eps, m == 2 ? 81 : 21));
  res.params = {{"m", m}, {"n", n}, {"r", r}, {"l", l}, {"k", k}, {"depth", depth}};
  res.measurements = {{"dist_c0_closeness", dist},
                      {"l_jet_sup", lowl},
                      {"closeness_samples", n_close},
                      {"lower_stage", rm.to_json()},
                      {"remainder_stage", rn.to_json()}};
  if (opt.defect_check) {
    std::vector<double> center = top_val.items().empty() ? std::vector<double>(m, 0.0) : top_val.items()[0].second;
    detail::attach_defect_check(res, center, stage_window(rn.path == "zero" ? rm : rn, schedule.back()));
  }
  return res;
}

}  // namespace

ApproximationResult reduce_order(const CoefficientSection& sigma, int l, int k, const std::vector<StageParams>& schedule,
                                 const TopOrderOptions& opt) {
  return reduce_impl(sigma, l, k, schedule, opt, 0);
}

}  // namespace jetlab
