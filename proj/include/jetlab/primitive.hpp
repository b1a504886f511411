#pragma once

#include <optional>
#include <span>
#include <vector>

#include "jetlab/diffeo.hpp"
#include "jetlab/lingeo.hpp"
#include "jetlab/section.hpp"

namespace jetlab {

// x -> (<X, u_x>)^r v(x): a pure r-th power of a linear form with kernel
// tau_x = u_x^perp. The co-normal is used as given (not normalized).
struct PrimitiveSection {
  int m = 0;
  int n = 0;
  int r = 0;
  Field v;
  HyperplaneField conormal;
  // Rational copy of a constant co-normal, for exact-mode evaluation.
  std::optional<std::vector<Rational>> exact_conormal;
  // v vanishes outside [-1 + margin, 1 - margin]^m when set.
  std::optional<double> support_margin;

  static PrimitiveSection with_constant_conormal(Field v, std::vector<double> u, int r);
  static PrimitiveSection with_constant_conormal(Field v, const std::vector<Rational>& u, int r);
  static PrimitiveSection with_conormal_field(Field v, HyperplaneField u, int r);

  Jet<double> jet(std::span<const double> x) const;
  Jet<Rational> jet_exact(std::span<const Rational> x) const;
  JetSection section() const;
  // h(x, y) = <y - x, u_x>^r v(x) as a germ in (X, Y).
  TwoPointGerm germ() const;
  double cr_norm(const GridSpec& grid) const;
  bool is_zero() const { return v.is_literal_zero(); }
};

Jet<double> primitive_section_jet(const PrimitiveSection& sigma, std::span<const double> x);

// Section with vanishing (r-1)-jet: p(X) = sum over |alpha| = r of a_alpha(x) X^alpha.
struct TopOrderSection {
  int m = 0;
  int n = 0;
  int r = 0;
  // a[i] is the coefficient field (R^m -> R^n) of the i-th degree-r monomial
  // in graded-lex order.
  std::vector<Field> a;

  static TopOrderSection zero(int m, int n, int r);
  // One coefficient field per degree-r monomial; `poly` gives the monomial
  // coefficients of a fixed polynomial and `amplitude` multiplies all of them.
  static TopOrderSection from_polynomial(const TruncatedPoly<Rational>& poly, const Field& amplitude);

  std::size_t monomial_count() const;
  const MultiIndex& monomial(std::size_t i) const;
  Jet<double> at(std::span<const double> x) const;
  Jet<Rational> at_exact(std::span<const Rational> x) const;
  JetSection section() const;
  void validate() const;
};

// (X_{beta_1} + ... + X_{beta_k})^r, with beta a list of variable indices
// (0-based, repeats allowed).
TruncatedPoly<Rational> power_sum_expand(const std::vector<int>& beta, int m, int r);

// A summand sigma_beta = <X, w>^r v with v = sum_alpha weight * a_alpha.
struct DecompositionTerm {
  MultiIndex beta;           // multiplicity vector, 1 <= |beta| <= r
  std::vector<int> conormal;  // integer co-normal w
  std::vector<std::pair<std::size_t, Rational>> weights;  // (monomial position, weight)
};

// Structural decomposition for (m, r): one term per multiset beta of size
// 1..r, co-normal w = sum of e_{beta_i}. Depends only on m and r.
std::vector<DecompositionTerm> decomposition_terms(int m, int r);
// Terms with parallel co-normals combined onto the primitive integer
// direction (first nonzero entry positive); structurally zero terms dropped.
std::vector<DecompositionTerm> merge_decomposition_terms(const std::vector<DecompositionTerm>& terms, int r);

struct PrimitiveTerm {
  DecompositionTerm term;
  PrimitiveSection section;
};

// sigma = sum of the returned primitive sections. With merge, parallel
// directions are combined and terms whose v is identically zero dropped.
std::vector<PrimitiveTerm> decompose_top_order(const TopOrderSection& sigma, bool merge = false);

// Pointwise pullback of a section by a diffeomorphism: x -> F^*(sigma(F(x))).
JetSection pullback_section(const Diffeo& F, const JetSection& sigma);
// x -> F_*(sigma(F^{-1}(x))).
JetSection pushforward_section(const Diffeo& F, const JetSection& sigma);
// F^* of a primitive section is primitive: co-normal dF_x^T u_{F(x)}, v o F.
PrimitiveSection pullback_primitive(const Diffeo& F, const PrimitiveSection& sigma);

}  // namespace jetlab
