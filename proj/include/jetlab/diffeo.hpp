#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "jetlab/field.hpp"

namespace jetlab {

// Diffeomorphism of R^m given by its coordinate map and, optionally, an
// inverse map or a point-inversion routine. Without either, points are
// inverted by Newton's method and inverse jets by series reversion.
class Diffeo {
 public:
  using PointInverse = std::function<std::vector<double>(std::span<const double> y)>;

  explicit Diffeo(Field forward, std::optional<Field> inverse = std::nullopt, PointInverse point_inverse = nullptr);

  static Diffeo identity(int m);
  // x -> A x + b with exact rational entries; the inverse is exact too.
  static Diffeo affine(const std::vector<std::vector<Rational>>& A, const std::vector<Rational>& b);

  int dim() const { return forward_.in_dim(); }
  const Field& forward() const { return forward_; }
  const std::optional<Field>& inverse_field() const { return inverse_; }

  std::vector<double> apply(std::span<const double> x) const;
  std::vector<double> invert(std::span<const double> y) const;
  std::vector<Rational> apply_exact(std::span<const Rational> x) const;
  std::vector<Rational> invert_exact(std::span<const Rational> y) const;

  Jet<double> jet(std::span<const double> x, int r) const;
  // Jet of F^{-1} at y.
  Jet<double> inverse_jet(std::span<const double> y, int r) const;
  Jet<Rational> jet_exact(std::span<const Rational> x, int r) const;
  Jet<Rational> inverse_jet_exact(std::span<const Rational> y, int r) const;

  Diffeo inverse() const;
  // x -> outer(inner(x)).
  friend Diffeo compose(const Diffeo& outer, const Diffeo& inner);

  // F(F^{-1}(y)) = y and a nonsingular Jacobian at the given sample points.
  void check(std::span<const std::vector<double>> samples, double tol = 1e-9) const;

 private:
  Field forward_;
  std::optional<Field> inverse_;
  PointInverse point_inverse_;
};

// Jet at x of h o F, where s = j^r h(F(x)). Covers F^{-1}.
Jet<double> jet_pullback(const Diffeo& F, const Jet<double>& s);
Jet<Rational> jet_pullback(const Diffeo& F, const Jet<Rational>& s);
// Jet at F(x) of h o F^{-1}, where s = j^r h(x); equals (F^{-1})^* s.
Jet<double> jet_pushforward(const Diffeo& F, const Jet<double>& s);
Jet<Rational> jet_pushforward(const Diffeo& F, const Jet<Rational>& s);

}  // namespace jetlab
