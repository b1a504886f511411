#pragma once

#include <vector>

namespace jetlab {

// Polynomial smoothstep of degree 2K+1: S(0)=0, S(1)=1, S^(j)=0 at both ends
// for 1 <= j <= K. Clamped to 0 / 1 outside [0, 1], so the plateaus are exact.
class Smoothstep {
 public:
  explicit Smoothstep(int K);

  int smoothness() const { return K_; }
  double value(double t) const;
  // S, S', ..., S^(order) at t.
  std::vector<double> derivatives(double t, int order) const;
  // sup over [0,1] of |S^(k)|.
  double sup_derivative(int k) const;

 private:
  int K_;
  std::vector<std::vector<double>> derivative_coeffs_;  // power basis, one per derivative order
  std::vector<double> sup_;
};

enum class ProfileKind { Plateau, Transition, Step };

// Plateau   psi_in(t)  = 1 - S((|t| - inner)/(outer - inner)): 1 on |t| <= inner, 0 on |t| >= outer.
// Transition psi_out(u) = S((|u| - inner)/(outer - inner)):    0 on |u| <= inner, 1 on |u| >= outer.
// Step      eta(u)     = 2 S((u + 1)/2) - 1:                   -1 for u <= -1, 1 for u >= 1.
class Profile {
 public:
  static Profile plateau(double inner = 0.5, double outer = 1.0, int smoothness = 4);
  static Profile transition(double inner = 0.5, double outer = 0.75, int smoothness = 4);
  static Profile step(int smoothness = 4);

  ProfileKind kind() const { return kind_; }
  double inner() const { return inner_; }
  double outer() const { return outer_; }
  int smoothness() const { return step_.smoothness(); }

  double value(double t) const;
  std::vector<double> derivatives(double t, int order) const;
  // sup over R of |d^k/dt^k profile|.
  double sup_derivative(int k) const;

 private:
  Profile(ProfileKind kind, double inner, double outer, int smoothness);

  ProfileKind kind_;
  double inner_;
  double outer_;
  Smoothstep step_;
};

}  // namespace jetlab
