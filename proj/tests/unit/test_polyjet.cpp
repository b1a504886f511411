#include <gtest/gtest.h>

#include <random>

#include "jetlab/jet.hpp"
#include "jetlab/section.hpp"
#include "jetlab/serialize.hpp"
#include "support/oracles.hpp"

using namespace jetlab;

namespace {

Expr y(int i) { return Expr::coord(i); }

TEST(MultiIndex, GradedLexOrderTwoVariables) {
  auto idx = enumerate_multiindices(2, 2);
  std::vector<MultiIndex> want = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  EXPECT_EQ(idx, want);
}

TEST(MultiIndex, OneVariable) {
  auto idx = enumerate_multiindices(1, 3);
  std::vector<MultiIndex> want = {{0}, {1}, {2}, {3}};
  EXPECT_EQ(idx, want);
}

TEST(MultiIndex, CountMatchesBruteForce) {
  for (int m = 1; m <= 4; ++m)
    for (int r = 0; r <= 5; ++r) {
      std::size_t brute = 0;
      std::vector<int> e(m, 0);
      // odometer over [0, r]^m
      while (true) {
        int s = 0;
        for (int x : e) s += x;
        if (s <= r) ++brute;
        int k = 0;
        while (k < m && ++e[k] > r) e[k++] = 0;
        if (k == m) break;
      }
      EXPECT_EQ(enumerate_multiindices(m, r).size(), brute) << m << " " << r;
      EXPECT_EQ(static_cast<long>(brute), binomial(m + r, r));
    }
  EXPECT_EQ(enumerate_multiindices(3, 4).size(), 35u);
}

TEST(MultiIndex, RejectsBadInput) {
  EXPECT_THROW(enumerate_multiindices(0, 2), Error);
  EXPECT_THROW(enumerate_multiindices(2, -1), Error);
}

TEST(TruncatedPoly, RingAxiomsExact) {
  std::mt19937_64 rng(7);
  for (int m = 1; m <= 4; ++m)
    for (int r = 0; r <= 5; ++r) {
      LayoutPtr lay = Layout::get(m, r);
      auto rnd = [&] {
        TruncatedPoly<Rational> p(lay);
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = oracle::random_rational(rng);
        return p;
      };
      auto a = rnd(), b = rnd(), c = rnd();
      EXPECT_EQ((a * b) * c, a * (b * c));
      EXPECT_EQ(a * (b + c), a * b + a * c);
      EXPECT_EQ(a * b, b * a);
    }
}

TEST(TruncatedPoly, ProductMatchesSymbolicTruncation) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + trial % 3, r = 1 + trial % 4;
    auto P = oracle::random_poly(rng, m, r, 6), Q = oracle::random_poly(rng, m, r, 6);
    std::vector<Rational> zero(m, 0);
    auto jp = taylor_evaluate(std::vector<Expr>{P.to_expr()}, zero, r);
    auto jq = taylor_evaluate(std::vector<Expr>{Q.to_expr()}, zero, r);
    auto prod = jp.components[0] * jq.components[0];
    auto PQ = P * Q;
    for (const auto& alpha : enumerate_multiindices(m, r)) {
      Rational want = 0;
      auto it = PQ.terms.find(alpha);
      if (it != PQ.terms.end()) want = it->second;
      EXPECT_EQ(prod.coeff(alpha), want);
    }
  }
}

TEST(TaylorEvaluate, SineAtZero) {
  std::vector<double> x{0.0};
  auto j = taylor_evaluate(Expr::sin(y(0)), x, 3);
  EXPECT_DOUBLE_EQ(j.derivative(0, MultiIndex{0}), 0.0);
  EXPECT_DOUBLE_EQ(j.derivative(0, MultiIndex{1}), 1.0);
  EXPECT_DOUBLE_EQ(j.derivative(0, MultiIndex{2}), 0.0);
  EXPECT_DOUBLE_EQ(j.derivative(0, MultiIndex{3}), -1.0);
}

TEST(TaylorEvaluate, ProductOfCoordinates) {
  std::vector<double> x{1.0, 2.0};
  auto j = taylor_evaluate(y(0) * y(1), x, 2);
  EXPECT_DOUBLE_EQ(j.derivative(0, MultiIndex{0, 0}), 2.0);
  EXPECT_DOUBLE_EQ(j.derivative(0, MultiIndex{1, 0}), 2.0);
  EXPECT_DOUBLE_EQ(j.derivative(0, MultiIndex{0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(j.derivative(0, MultiIndex{1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(j.derivative(0, MultiIndex{2, 0}), 0.0);
  EXPECT_DOUBLE_EQ(j.derivative(0, MultiIndex{0, 2}), 0.0);
  EXPECT_EQ(j.base, x);
}

TEST(TaylorEvaluate, ExactMatchesSymbolicDifferentiation) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + trial % 3;
    const int r = 4;
    auto P = oracle::random_poly(rng, m, 4, 8);
    std::vector<Rational> x;
    for (int i = 0; i < m; ++i) x.push_back(oracle::random_rational(rng, 3, 4));
    auto j = taylor_evaluate(std::vector<Expr>{P.to_expr()}, x, r);
    for (const auto& alpha : enumerate_multiindices(m, r)) ASSERT_EQ(j.derivative(0, alpha), P.derivative(alpha).eval(x));
  }
}

TEST(TaylorEvaluate, FloatMatchesFiniteDifferences) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> pt(-0.8, 0.8);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + trial % 3;
    Expr e = oracle::random_smooth_expr(rng, m, 3);
    std::vector<double> x(m);
    for (auto& v : x) v = pt(rng);
    auto j = taylor_evaluate(e, x, 3);
    auto f = [&](std::span<const double> p) { return oracle::eval_double(e, p); };
    for (const auto& alpha : enumerate_multiindices(m, 3)) {
      bool small = true;
      for (int a : alpha) small = small && a <= 3;
      if (!small) continue;
      const double D = j.derivative(0, alpha);
      const double fd = oracle::fd_derivative(f, x, alpha, 1e-3);
      EXPECT_LE(std::fabs(fd - D), 1e-4 * std::max(1.0, std::fabs(D)))
          << "trial " << trial << " alpha " << ::testing::PrintToString(alpha) << " D " << D << " expr "
          << expr_to_json(e).dump();
    }
  }
}

TEST(TaylorEvaluate, ProfilesMatchFiniteDifferencesAwayFromKnots) {
  Expr p = Expr::plateau(y(0));
  Expr t = Expr::transition(y(0));
  for (double x0 : {-0.9, -0.7, 0.2, 0.6, 0.8, 0.95}) {
    std::vector<double> x{x0};
    for (const Expr& e : {p, t}) {
      auto j = taylor_evaluate(e, x, 3);
      auto f = [&](std::span<const double> q) { return oracle::eval_double(e, q); };
      for (int k = 0; k <= 3; ++k) {
        double D = j.derivative(0, MultiIndex{k});
        double fd = oracle::fd_derivative(f, x, {k}, 1e-3);
        EXPECT_LE(std::fabs(fd - D), 1e-4 * std::max(1.0, std::fabs(D) * 10)) << x0 << " " << k;
      }
    }
  }
}

TEST(TaylorEvaluate, RealPowerOfNonPositiveBaseIsRejected) {
  std::vector<double> x{-1.0};
  EXPECT_THROW(taylor_evaluate(Expr::pow(y(0), 0.5), x, 2), Error);
  std::vector<Rational> xe{Rational(1, 2)};
  EXPECT_THROW(taylor_evaluate(std::vector<Expr>{Expr::sin(y(0))}, xe, 2), Error);
}

TEST(JetOps, CombineAndProject) {
  std::vector<double> x{1.0, 2.0};
  auto a = taylor_evaluate(y(0) * y(1), x, 2);
  auto zero = Jet<double>::zero(x, 1, 2);
  EXPECT_TRUE(jet_combine(a, a, 1.0, -1.0).is_zero());
  auto twice = jet_combine(a, zero, 2.0, 0.0);
  for (std::size_t i = 0; i < a.components[0].size(); ++i) EXPECT_DOUBLE_EQ(twice.components[0][i], 2 * a.components[0][i]);
  auto p0 = jet_project(a, 0);
  EXPECT_EQ(p0.components[0].size(), 1u);
  EXPECT_DOUBLE_EQ(p0.components[0][0], 2.0);
  EXPECT_EQ(jet_project(a, 2).components[0], a.components[0]);
  EXPECT_THROW(jet_project(a, 3), Error);
  auto other = taylor_evaluate(y(0), std::vector<double>{0.0, 0.0}, 2);
  EXPECT_THROW(jet_combine(a, other, 1.0, 1.0), Error);
}

TEST(JetOps, ProjectionCollapses) {
  std::mt19937_64 rng(5);
  auto P = oracle::random_poly(rng, 3, 5, 10);
  std::vector<Rational> x{Rational(1, 2), Rational(-1, 3), Rational(2)};
  auto j = taylor_evaluate(std::vector<Expr>{P.to_expr()}, x, 5);
  for (int l = 0; l <= 5; ++l)
    for (int k = 0; k <= l; ++k) EXPECT_EQ(jet_project(jet_project(j, l), k).components[0], jet_project(j, k).components[0]);
}

TEST(JetOps, ComposeWithIdentityAndSquare) {
  std::vector<double> x0{0.0, 0.0};
  auto id0 = taylor_evaluate(y(0), x0, 2), id1 = taylor_evaluate(y(1), x0, 2);
  auto outer = taylor_evaluate(Expr::sin(y(0)) * y(1), x0, 2);
  std::vector<Jet<double>> ids{id0, id1};
  EXPECT_EQ(jet_compose(outer, std::span<const Jet<double>>(ids)).components[0], outer.components[0]);

  std::vector<double> u0{0.0};
  auto sq = taylor_evaluate(Expr::pow(y(0), 2), u0, 2);
  auto sum = taylor_evaluate(y(0) + y(1), x0, 2);
  auto c = jet_compose(sq, sum);
  EXPECT_DOUBLE_EQ(c.components[0].coeff({2, 0}), 1.0);
  EXPECT_DOUBLE_EQ(c.components[0].coeff({1, 1}), 2.0);
  EXPECT_DOUBLE_EQ(c.components[0].coeff({0, 2}), 1.0);

  auto bad = taylor_evaluate(Expr::pow(y(0), 2), std::vector<double>{1.0}, 2);
  EXPECT_THROW(jet_compose(bad, sum), Error);
}

TEST(JetOps, ComposeMatchesSymbolicSubstitution) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const int k = 1 + trial % 3, m = 1 + (trial / 3) % 3, r = 1 + trial % 4;
    auto outer = oracle::random_poly(rng, k, 3, 6);
    std::vector<oracle::SymPoly> inner;
    std::vector<Expr> inner_e;
    for (int j = 0; j < k; ++j) {
      inner.push_back(oracle::random_poly(rng, m, 2, 4));
      inner_e.push_back(inner.back().to_expr());
    }
    std::vector<Rational> x;
    for (int i = 0; i < m; ++i) x.push_back(oracle::random_rational(rng, 2, 3));
    auto jin = taylor_evaluate(inner_e, x, r);
    auto jout = taylor_evaluate(std::vector<Expr>{outer.to_expr()}, jin.values(), r);
    auto comp = jet_compose(jout, jin);
    auto full = outer.substitute(inner);
    for (const auto& alpha : enumerate_multiindices(m, r)) ASSERT_EQ(comp.derivative(0, alpha), full.derivative(alpha).eval(x));
  }
}

TEST(JetOps, AffineCompositionIsExact) {
  std::mt19937_64 rng(77);
  auto outer = oracle::random_poly(rng, 2, 4, 8);
  std::vector<Expr> affine = {Expr::add({Expr::constant(Rational(1, 3)), Expr::mul({Expr::constant(Rational(2)), y(0)}), y(1)}),
                              Expr::add({Expr::mul({Expr::constant(Rational(-1, 2)), y(1)}), y(0)})};
  std::vector<Rational> x{Rational(1, 5), Rational(-2, 7)};
  auto jin = taylor_evaluate(affine, x, 4);
  auto comp = jet_compose(taylor_evaluate(std::vector<Expr>{outer.to_expr()}, jin.values(), 4), jin);
  auto direct = taylor_evaluate(std::vector<Expr>{Expr::compose(outer.to_expr(), affine)}, x, 4);
  EXPECT_EQ(comp.components[0], direct.components[0]);
}

TEST(JetNorms, HandValues) {
  std::vector<double> x0{0.0, 0.0};
  std::vector<double> e1{1.0, 0.0}, me1{-1.0, 0.0};
  auto sq = taylor_evaluate(Expr::pow(y(0), 2), x0, 2);
  auto n1 = jet_norms(sq, std::span<const double>(e1));
  EXPECT_DOUBLE_EQ(n1.c0, 2.0);
  EXPECT_DOUBLE_EQ(*n1.perp, 0.0);
  auto xy = taylor_evaluate(y(0) * y(1), x0, 2);
  auto n2 = jet_norms(xy, std::span<const double>(e1));
  EXPECT_DOUBLE_EQ(*n2.perp, 1.0);
  EXPECT_DOUBLE_EQ(*jet_norms(xy, std::span<const double>(me1)).perp, 1.0);
  std::vector<double> bad{2.0, 0.0};
  EXPECT_THROW(jet_norms(xy, std::span<const double>(bad)), Error);
}

TEST(JetNorms, PerpBoundedAndSignInvariant) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    Expr e = oracle::random_smooth_expr(rng, 2, 3);
    std::vector<double> x{0.3, -0.2};
    auto j = taylor_evaluate(std::vector<Expr>{e, Expr::sin(e)}, x, 3);
    std::vector<double> u{g(rng), g(rng)};
    double nu = std::hypot(u[0], u[1]);
    u[0] /= nu;
    u[1] /= nu;
    auto n = jet_norms(j, std::span<const double>(u));
    // Each column of the gradient block is some D_{alpha+e_i}, bounded by c0,
    // so the projected block's spectral norm is at most sqrt(m) * c0.
    EXPECT_LE(*n.perp, std::sqrt(2.0) * n.c0 + 1e-12);
    std::vector<double> mu{-u[0], -u[1]};
    EXPECT_NEAR(*jet_norms(j, std::span<const double>(mu)).perp, *n.perp, 1e-12);
  }
}

TEST(Serialization, ExpressionRoundTripsByteIdentically) {
  json tree = json::parse(R"({"add":[{"mul":[{"const":"3/4"},{"add":[{"mul":[{"coord":0},{"add":[{"mul":[{"coord":1},{"sin":{"coord":0}}]},{"const":2}]}]},{"pow":{"base":{"coord":1},"exponent":3}}]}]},{"plateau":{"arg":{"coord":0},"inner":0.5,"outer":1.0,"smoothness":4}}]})");
  Expr e = expr_from_json(tree, 2);
  std::string once = expr_to_json(e).dump();
  std::string twice = expr_to_json(expr_from_json(json::parse(once), 2)).dump();
  EXPECT_EQ(once, twice);
  EXPECT_EQ(once, tree.dump());
}

TEST(Serialization, ParseErrorsCarryPaths) {
  auto msg = [](const char* text, int dim) {
    try {
      expr_from_json(json::parse(text), dim);
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(msg(R"({"add":[{"coord":0},{"tan":{"coord":0}}]})", 2).find("$.add[1]"), std::string::npos);
  EXPECT_NE(msg(R"({"mul":[{"coord":5}]})", 2).find("out of range"), std::string::npos);
  EXPECT_NE(msg(R"({"sin":[{"coord":0},{"coord":1}]})", 2).find("exactly one"), std::string::npos);
  EXPECT_EQ(expr_from_json(json::parse(R"({"const":1})")).value(std::vector<double>{0.0}), 1.0);
}

TEST(Serialization, JetRoundTrip) {
  auto j = taylor_evaluate(y(0) * y(1), std::vector<double>{1.0, 2.0}, 2);
  auto back = jet_from_json(jet_to_json(j));
  EXPECT_EQ(back.base, j.base);
  EXPECT_EQ(back.components[0], j.components[0]);
  std::vector<Rational> xe{Rational(1, 3), Rational(2)};
  auto je = taylor_evaluate(std::vector<Expr>{y(0) * y(1)}, xe, 2);
  EXPECT_EQ(jet_from_json_exact(jet_to_json(je)).components[0], je.components[0]);
}

TEST(JetInverse, ReversesPolynomialMaps) {
  std::vector<Expr> F = {y(0) + Expr::mul({Expr::constant(0.3), Expr::pow(y(1), 2)}),
                         y(1) + Expr::mul({Expr::constant(0.2), Expr::sin(y(0))})};
  std::vector<double> x{0.1, -0.2};
  auto jF = taylor_evaluate(std::span<const Expr>(F), x, 4);
  auto jG = jet_inverse(jF);
  auto roundtrip = jet_compose(jF, jG);
  for (int i = 0; i < 2; ++i)
    for (std::size_t s = 0; s < roundtrip.components[i].size(); ++s) {
      const MultiIndex& a = roundtrip.components[i].layout().index(s);
      double want = (s == 0) ? jF.values()[i] : (order(a) == 1 && a[i] == 1 ? 1.0 : 0.0);
      EXPECT_NEAR(roundtrip.components[i][s], want, 1e-12);
    }
}

TEST(HolonomyDefect, HolonomicSectionConverges) {
  Field f = Field::from_expressions({Expr::sin(y(0) * y(1)) + Expr::pow(y(0), 3)}, 2);
  auto sigma = JetSection::holonomic(f, 2);
  auto coarse = holonomy_defect(sigma, GridSpec::cube(2, 11, -0.5, 0.5));
  auto fine = holonomy_defect(sigma, GridSpec::cube(2, 21, -0.5, 0.5));
  EXPECT_LT(fine.max, coarse.max);
  EXPECT_LT(fine.interior_max, 0.3 * coarse.interior_max);
  EXPECT_GT(coarse.one_sided_count, 0u);
}

TEST(HolonomyDefect, ZeroSection) {
  auto sigma = JetSection::holonomic(Field::zero(2, 1), 2);
  auto d = holonomy_defect(sigma, GridSpec::cube(2, 9));
  EXPECT_EQ(d.max, 0.0);
}

TEST(HolonomyDefect, SampledSectionMatchesGenerator) {
  Field f = Field::from_expressions({Expr::cos(y(0))}, 1);
  GridSpec g = GridSpec::cube(1, 17);
  std::vector<Jet<double>> samples;
  for (std::size_t i = 0; i < g.size(); ++i) samples.push_back(f.jet(g.point(i), 2));
  auto sampled = JetSection::sampled(g, samples);
  EXPECT_DOUBLE_EQ(holonomy_defect(sampled, g).max, holonomy_defect(JetSection::holonomic(f, 2), g).max);
  EXPECT_THROW(sampled.at(std::vector<double>{0.01}), Error);
}

TEST(SectionNorm, RejectsCoarseGrid) {
  TwoPointGerm h = [](std::span<const double>, std::span<const double>, int order) {
    return std::vector<TruncatedPoly<double>>{TruncatedPoly<double>(2, order)};
  };
  EXPECT_THROW(section_cr_norm(h, 1, 1, GridSpec::cube(1, 1), 2), Error);
  EXPECT_EQ(section_cr_norm(h, 1, 1, GridSpec::cube(1, 3), 2), 0.0);
}

}  // namespace
