#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "jetlab/expression.hpp"

namespace jetlab {

// Smooth map R^m -> R^n that can produce its Taylor jet of any order at any
// point. Either expression-backed (exact evaluation possible) or backed by an
// arbitrary jet callback. Cheap to copy; the implementation is shared.
class Field {
 public:
  using JetFn = std::function<std::vector<TruncatedPoly<double>>(std::span<const double> x, int order)>;

  Field() = default;
  Field(int in_dim, int out_dim, JetFn fn);

  static Field from_expressions(std::vector<Expr> components, int in_dim);
  static Field constant(int in_dim, std::vector<double> value);
  static Field zero(int in_dim, int out_dim);

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  bool valid() const { return static_cast<bool>(fn_); }

  std::vector<TruncatedPoly<double>> jet_components(std::span<const double> x, int order) const;
  Jet<double> jet(std::span<const double> x, int order) const;
  std::vector<double> value(std::span<const double> x) const;

  const std::optional<std::vector<Expr>>& expressions() const { return expressions_; }
  // Exact jet; requires expression backing with exact-capable nodes.
  Jet<Rational> jet_exact(std::span<const Rational> x, int order) const;

  // Pointwise algebra. The results are callback-backed unless both sides
  // carry expressions.
  friend Field operator+(const Field& a, const Field& b);
  friend Field operator-(const Field& a, const Field& b);
  Field scaled(double s) const;
  // x -> this(inner(x)).
  Field after(const Field& inner) const;
  // Expression-backed with every component the literal 0.
  bool is_literal_zero() const;

 private:
  int in_dim_ = 0;
  int out_dim_ = 0;
  JetFn fn_;
  std::optional<std::vector<Expr>> expressions_;
};

}  // namespace jetlab
