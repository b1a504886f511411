// One line per acceptance criterion. With arguments, only the listed
// criteria run (e.g. `jetlab_acceptance 5 6`).

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "jetlab/verify.hpp"
#include "support/oracles.hpp"

using namespace jetlab;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Field bump(double rho) {
  auto axis = [rho](int i) { return Expr::plateau(Expr::mul({Expr::constant(1.0 / rho), Expr::coord(i)})); };
  return Field::from_expressions({Expr::mul({axis(0), axis(1)})}, 2);
}

Field broad_bump() {
  return Field::from_expressions({Expr::mul({Expr::plateau(Expr::coord(0), 0.1, 0.95, 2),
                                             Expr::plateau(Expr::coord(1), 0.1, 0.95, 2)})},
                                 2);
}

TruncatedPoly<Rational> saddle() {
  TruncatedPoly<Rational> p(2, 2);
  p.set_coeff({2, 0}, 1);
  p.set_coeff({0, 2}, -1);
  return p;
}

bool same(const Jet<Rational>& a, const Jet<Rational>& b) {
  if (a.n() != b.n()) return false;
  for (int c = 0; c < a.n(); ++c)
    if (!(a.components[c] == b.components[c])) return false;
  return true;
}

// ---------------------------------------------------------------------------

Outcome decomposition_exactness() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> pm(1, 3), pr(1, 4);
  std::size_t count[4][5] = {};
  int failures = 0, count_changes = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = pm(rng), r = pr(rng), n = 1 + trial % 2;
    TopOrderSection s = TopOrderSection::zero(m, n, r);
    for (auto& f : s.a) {
      std::vector<Expr> comps;
      for (int c = 0; c < n; ++c) comps.push_back(oracle::random_poly(rng, m, 2, 3).to_expr());
      f = Field::from_expressions(comps, m);
    }
    auto parts = decompose_top_order(s);
    if (count[m][r] == 0) count[m][r] = parts.size();
    if (parts.size() != count[m][r]) ++count_changes;
    std::vector<Rational> x;
    for (int i = 0; i < m; ++i) x.push_back(oracle::random_rational(rng, 3, 5));
    Jet<Rational> got = Jet<Rational>::zero(x, n, r);
    for (const auto& p : parts) got = jet_combine(got, p.section.jet_exact(x), Rational(1), Rational(1));
    if (!same(got, s.at_exact(x))) ++failures;
  }
  return {failures == 0 && count_changes == 0,
          "200 sections, nonzero residuals " + std::to_string(failures) + ", term-count changes " +
              std::to_string(count_changes)};
}

Outcome power_sum_identity() {
  auto pair = power_sum_expand({0, 1}, 2, 2);
  auto lhs = (pair - power_sum_expand({0}, 2, 2) - power_sum_expand({1}, 2, 2)) * Rational(1, 2);
  TruncatedPoly<Rational> x1x2(2, 2);
  x1x2.set_coeff({1, 1}, 1);
  const bool identity = lhs == x1x2;

  auto s = TopOrderSection::from_polynomial(saddle(), Field::from_expressions({Expr::constant(Rational(1))}, 2));
  auto parts = decompose_top_order(s, true);
  bool fig = parts.size() == 2 && parts[0].term.conormal == std::vector<int>{1, 0} &&
             parts[1].term.conormal == std::vector<int>{0, 1};
  for (const auto& x : {std::vector<Rational>{Rational(1, 3), Rational(-1, 2)},
                        std::vector<Rational>{Rational(-7, 5), Rational(2)}}) {
    if (!fig) break;
    TruncatedPoly<Rational> xx(2, 2), yy(2, 2);
    xx.set_coeff({2, 0}, 1);
    yy.set_coeff({0, 2}, -1);
    fig = parts[0].section.jet_exact(x).components[0] == xx && parts[1].section.jet_exact(x).components[0] == yy;
  }
  return {identity && fig, std::string("(X1+X2)^2 identity ") + (identity ? "exact" : "WRONG") +
                               ", x^2 - y^2 = x^2 + (-y^2) " + (fig ? "exact" : "WRONG")};
}

Outcome jet_arithmetic() {
  std::mt19937_64 rng(2024);
  int exact_bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + trial % 3, r = 4;
    auto P = oracle::random_poly(rng, m, 4, 8);
    std::vector<Rational> x;
    for (int i = 0; i < m; ++i) x.push_back(oracle::random_rational(rng, 3, 4));
    auto j = taylor_evaluate(std::vector<Expr>{P.to_expr()}, x, r);
    for (const auto& alpha : enumerate_multiindices(m, r))
      if (j.derivative(0, alpha) != P.derivative(alpha).eval(x)) {
        ++exact_bad;
        break;
      }
  }
  std::mt19937_64 rng2(99);
  std::uniform_real_distribution<double> pt(-0.8, 0.8);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + trial % 3;
    Expr e = oracle::random_smooth_expr(rng2, m, 3);
    std::vector<double> x(m);
    for (auto& v : x) v = pt(rng2);
    auto j = taylor_evaluate(e, x, 3);
    auto f = [&](std::span<const double> p) { return oracle::eval_double(e, p); };
    for (const auto& alpha : enumerate_multiindices(m, 3)) {
      const double D = j.derivative(0, alpha);
      const double fd = oracle::fd_derivative(f, x, alpha, 1e-3);
      worst = std::max(worst, std::fabs(fd - D) / std::max(1.0, std::fabs(D)));
    }
  }
  return {exact_bad == 0 && worst < 1e-4,
          "exact mismatches " + std::to_string(exact_bad) + "/100, worst FD error " + fmt("%.2e", worst)};
}

Diffeo random_affine(std::mt19937_64& rng, int m) {
  while (true) {
    std::vector<std::vector<Rational>> A(m, std::vector<Rational>(m));
    std::vector<Rational> b(m);
    for (int i = 0; i < m; ++i) {
      b[i] = oracle::random_rational(rng, 3, 4);
      for (int j = 0; j < m; ++j) A[i][j] = oracle::random_rational(rng, 4, 3);
    }
    try {
      return Diffeo::affine(A, b);
    } catch (const Error&) {
    }
  }
}

Diffeo random_polynomial_diffeo(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(-0.08, 0.08);
  std::vector<Expr> comps;
  for (int i = 0; i < 2; ++i) {
    Expr x = Expr::coord(0), y = Expr::coord(1);
    comps.push_back(Expr::add({Expr::coord(i), Expr::mul({Expr::constant(c(rng)), x, y}),
                               Expr::mul({Expr::constant(c(rng)), Expr::coord(1 - i), Expr::coord(1 - i)}),
                               Expr::mul({Expr::constant(c(rng)), x, x, y}), Expr::constant(c(rng))}));
  }
  return Diffeo(Field::from_expressions(comps, 2));
}

Outcome pullback_round_trip() {
  std::mt19937_64 rng(6);
  int affine_bad = 0;
  for (int t = 0; t < 40; ++t) {
    const int m = 1 + t % 3, r = 1 + t % 4;
    Diffeo F = random_affine(rng, m);
    std::vector<Rational> x;
    for (int i = 0; i < m; ++i) x.push_back(oracle::random_rational(rng, 4, 5));
    Jet<Rational> s = Jet<Rational>::zero(x, 2, r);
    for (auto& c : s.components)
      for (std::size_t i = 0; i < c.size(); ++i) c[i] = oracle::random_rational(rng);
    auto back = jet_pushforward(F, jet_pullback(F, s));
    if (back.base != s.base || !same(back, s)) ++affine_bad;
  }
  std::mt19937_64 rng2(8);
  std::uniform_real_distribution<double> u(-0.8, 0.8), cf(-2, 2);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    Diffeo F = random_polynomial_diffeo(rng2);
    std::vector<double> x{u(rng2), u(rng2)};
    Jet<double> s = Jet<double>::zero(x, 1, 3);
    for (std::size_t i = 0; i < s.components[0].size(); ++i) s.components[0][i] = cf(rng2);
    auto back = jet_pushforward(F, jet_pullback(F, s));
    for (std::size_t i = 0; i < s.components[0].size(); ++i)
      worst = std::max(worst, std::fabs(back.components[0][i] - s.components[0][i]));
  }
  return {affine_bad == 0 && worst < 1e-9, "affine exact failures " + std::to_string(affine_bad) +
                                               "/40, polynomial worst coefficient error " + fmt("%.2e", worst)};
}

std::vector<SweepPoint> estimate_lattice() { return product_lattice({0.2, 0.1, 0.05}, {0.1, 0.05}); }

Outcome isotopy_contract() {
  bool ok = true;
  std::ostringstream os;
  double worst_c0 = 0.0, worst_cert = 0.0;
  std::size_t bad_boundary = 0, bad_row = 0, points = 0;
  for (const auto& p : estimate_lattice()) {
    WiggleIsotopy W(2, p.eps, p.delta, 2);
    const double h = W.delta() / 8.0;
    const int n = static_cast<int>(std::ceil(2.0 / h)) + 1;
    const double shell = 1.0 - 0.45 * W.eps();
    std::vector<double> x(2);
    double c0 = 0.0;
    for (int i = 0; i < n; ++i) {
      x[0] = std::min(1.0, -1.0 + i * h);
      for (int j = 0; j < n; ++j) {
        x[1] = std::min(1.0, -1.0 + j * h);
        const bool boundary = std::max(std::fabs(x[0]), std::fabs(x[1])) >= shell;
        for (double t : {0.5, 1.0}) {
          auto y = W.apply(t, x);
          c0 = std::max(c0, std::hypot(y[0] - x[0], y[1] - x[1]));
          if (boundary && (y[0] != x[0] || y[1] != x[1])) ++bad_boundary;
        }
        ++points;
      }
    }
    // The isotopy depends on x_2 only through eps-scale boundary factors, so
    // the Jacobian scan keeps 8-per-delta in x_1 and uses 8-per-eps in x_2.
    GridSpec g = GridSpec::box({-1.0, -1.0}, {1.0, 1.0}, {n, static_cast<int>(std::ceil(16.0 / W.eps())) + 1});
    for (std::size_t k = 0; k < g.size(); ++k) {
      g.point(k, x);
      auto J = W.jet(1.0, x, 1);
      const auto& row = J.components[0];
      if (row[0] != x[0] || row[1] != 1.0 || row[2] != 0.0) ++bad_row;
    }
    const double cert = W.injectivity_certificate();
    const double mono = W.min_monotonicity(g);
    worst_c0 = std::max(worst_c0, c0 / W.eps());
    worst_cert = std::max(worst_cert, cert);
    ok = ok && c0 < W.eps() && cert < 1.0 && mono > 0.0;
  }
  ok = ok && bad_boundary == 0 && bad_row == 0;
  os << points << " grid points, max|F_t - id|/eps " << fmt("%.3f", worst_c0) << ", boundary moves " << bad_boundary
     << ", first-row deviations " << bad_row << ", max certificate " << fmt("%.3f", worst_cert);
  return {ok, os.str()};
}

Outcome estimate_stability() {
  auto s = PrimitiveSection::with_constant_conormal(bump(0.5), std::vector<double>{1.0, 0.0}, 1);
  auto rep = scaling_sweep(estimate_construction(s), estimate_lattice(), {"h_mixed", "dF", "phi", "b"});
  bool ok = true;
  std::ostringstream os;
  for (const auto& sm : rep.summaries) {
    ok = ok && sm.count == 6 && sm.band() < 4.0;
    os << sm.kind << " band " << fmt("%.3f", sm.band()) << "  ";
  }
  return {ok, os.str()};
}

Outcome conclusion_scaling() {
  bool ok = true;
  std::ostringstream os;
  for (int r : {1, 2}) {
    auto s = PrimitiveSection::with_constant_conormal(bump(0.5), std::vector<double>{1.0, 0.0}, r);
    TransverseOptions o;
    o.defect_check = false;
    auto rep = scaling_sweep(transverse_construction(s, 0, o), diagonal_lattice(0.4, 0.004, 3),
                             {"conclusion_c0", "conclusion_perp"});
    for (const auto& sm : rep.summaries) {
      ok = ok && sm.count == 4 && sm.lhs_decreasing && sm.band() < 2.0;
      os << "r=" << r << " " << sm.kind << " band " << fmt("%.3f", sm.band())
         << (sm.lhs_decreasing ? " decreasing" : " NOT decreasing") << "  ";
    }
  }
  return {ok, os.str()};
}

Outcome adjust_scaling() {
  AdjustOptions o;
  o.defect_check = false;
  std::vector<SweepPoint> lattice;
  for (double th : {0.0, 0.05, 0.1, 0.2})
    for (double d : {0.02, 0.01}) lattice.push_back({0.0, d, th});
  auto rep = scaling_sweep(adjust_construction(broad_bump(), 2, 1, o), lattice, {"adjust"});
  const KindSummary* sm = rep.summary("adjust");
  bool ok = sm && sm->count == 8 && sm->band() < 2.0;

  std::size_t exact_bad = 0, probes = 0;
  for (int r : {1, 2}) {
    auto s = PrimitiveSection::with_constant_conormal(bump(0.5), std::vector<double>{0.0, 1.0}, r);
    auto res = transversality_adjust(s, 0.02, Subspace::hyperplane(Eigen::Vector2d(0.0, 1.0)), o);
    // v is constant on |x_i| < 0.25.
    for (int i = 0; i <= 24; ++i) {
      std::vector<double> x{-0.24 + 0.02 * i, 0.0};
      auto hat = res.f.jet(x, r);
      auto want = s.jet(x);
      for (std::size_t k = 0; k < want.components[0].size(); ++k)
        if (hat.components[0][k] != want.components[0][k]) {
          ++exact_bad;
          break;
        }
      ++probes;
    }
  }
  ok = ok && exact_bad == 0;
  return {ok, "error/(theta + delta) band " + fmt("%.3f", sm ? sm->band() : 0.0) + ", inexact on x_m = 0: " +
                  std::to_string(exact_bad) + "/" + std::to_string(probes)};
}

Outcome holonomy_detector() {
  std::size_t runs = 0, bad = 0;
  std::ostringstream os;
  auto note = [&](const ApproximationResult& res, const std::string& what) {
    ++runs;
    const Check* c = res.find_check("holonomy_defect_trend");
    if (!c || !c->passed) {
      ++bad;
      os << what << " defect not decreasing; ";
    }
  };
  for (int r : {1, 2})
    for (auto [eps, delta] : {std::pair{0.2, 0.02}, std::pair{0.1, 0.005}}) {
      auto s = PrimitiveSection::with_constant_conormal(bump(0.5), std::vector<double>{1.0, 0.0}, r);
      note(transverse_approximate(s, 0, eps, delta), "transverse r=" + std::to_string(r));
    }
  for (double th : {0.0, 0.1}) {
    auto s = PrimitiveSection::with_constant_conormal(broad_bump(), std::vector<double>{std::sin(th), std::cos(th)}, 1);
    note(transversality_adjust(s, 0.02, Subspace::hyperplane(Eigen::Vector2d(0.0, 1.0))), "adjust");
  }
  {
    const double h = std::sqrt(0.5);
    auto s = PrimitiveSection::with_constant_conormal(bump(0.25), std::vector<double>{h, h}, 1);
    note(approximate_primitive(s, 1, 0.2, 0.02, 0.1), "sheared");
  }

  // Input sections are not holonomic: the defect tends to r! |v|.
  double worst = 0.0;
  for (int r = 1; r <= 3; ++r) {
    Expr v = Expr::add({Expr::constant(1.5), Expr::sin(Expr::coord(1))});
    auto s = PrimitiveSection::with_constant_conormal(Field::from_expressions({v}, 2), std::vector<double>{1.0, 0.0}, r);
    for (auto [cx, cy] : {std::pair{0.2, 0.3}, std::pair{-0.5, 0.1}, std::pair{0.0, -0.6}}) {
      GridSpec g = GridSpec::box({cx - 0.1, cy - 0.1}, {cx + 0.1, cy + 0.1}, {33, 33});
      auto d = holonomy_defect(s.section(), g);
      const std::size_t mid = g.flatten(std::vector<int>{16, 16});
      const double want = factorial(r) * std::fabs(1.5 + std::sin(g.point(mid)[1]));
      worst = std::max(worst, std::fabs(d.values[mid] - want) / want);
    }
  }
  os << runs << " constructions, " << bad << " without a decreasing defect; input-section defect vs r!|v| worst "
     << fmt("%.2e", worst);
  return {bad == 0 && worst < 0.05, os.str()};
}

Outcome orchestration() {
  auto sigma = TopOrderSection::from_polynomial(saddle(), bump(0.5));
  std::vector<double> lower;
  bool structural = true;
  std::ostringstream os;
  for (auto [eps, delta] : {std::pair{0.2, 0.02}, std::pair{0.1, 0.005}, std::pair{0.05, 0.00125}}) {
    auto res = approximate_top_order(sigma, 1, {{eps, delta}});
    for (const auto& c : res.checks)
      if (!c.passed) {
        structural = false;
        os << "eps=" << eps << " " << c.name << " failed; ";
      }
    lower.push_back(res.measurements["lower_jet_sup"].get<double>());
  }
  const bool decreasing = lower[1] < lower[0] && lower[2] < lower[1];
  os << "(r-1)-jet sup " << fmt("%.3e", lower[0]) << " -> " << fmt("%.3e", lower[1]) << " -> "
     << fmt("%.3e", lower[2]);

  Expr vz = Expr::mul({Expr::plateau(Expr::mul({Expr::constant(2.0), Expr::coord(0)})),
                       Expr::plateau(Expr::mul({Expr::constant(2.0), Expr::coord(1)})),
                       Expr::plateau(Expr::mul({Expr::constant(2.0), Expr::coord(2)}))});
  ParametricOptions po;
  po.transverse.defect_check = false;
  auto par = parametric_transverse_approximate(Field::from_expressions({vz}, 3), 2, 1, 1, 0, 0.2, 0.02, po);
  const Check* bz = par.find_check("boundary_z_zero");
  const bool zero = bz && bz->passed && par.structural_ok();
  os << ", parametric boundary z " << (zero ? "exactly zero" : "NOT zero");
  return {structural && decreasing && zero, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "decomposition exactness", 10, decomposition_exactness},
      {2, "power-sum identity", 1, power_sum_identity},
      {3, "jet arithmetic oracle", 30, jet_arithmetic},
      {4, "pullback round trip", 10, pullback_round_trip},
      {5, "isotopy contract", 60, isotopy_contract},
      {6, "estimate-family stability", 300, estimate_stability},
      {7, "conclusion scaling", 600, conclusion_scaling},
      {8, "transversality adjustment", 120, adjust_scaling},
      {9, "holonomy detector", 120, holonomy_detector},
      {10, "orchestration contract", 600, orchestration},
  };
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = out.pass && secs < c.budget_s;
    if (!pass) ++failed;
    std::printf("criterion %d %s: %s (%.1fs of %.0fs) %s\n", c.id, c.name, pass ? "PASS" : "FAIL", secs, c.budget_s,
                out.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
