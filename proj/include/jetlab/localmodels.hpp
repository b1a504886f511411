#pragma once

#include <functional>
#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jetlab/diffeo.hpp"
#include "jetlab/lingeo.hpp"
#include "jetlab/primitive.hpp"
#include "jetlab/profiles.hpp"
#include "jetlab/section.hpp"

namespace jetlab {

using json = nlohmann::json;

// F_t(x) = (x_1, ..., x_m + phi_t(x)), phi_t = t c(z) prod_i psi_out((1-|x_i|)/eps) w(x_1),
// w(u) = a eps sin(pi u / (2 delta)). delta is rounded down to 1/(2J+1).
class WiggleIsotopy {
 public:
  // Without an amplitude, a = min(1/4, 0.45 / (kappa sup|psi_out'|)). An
  // explicit amplitude must satisfy a kappa sup|psi_out'| < 1/2. With a
  // frame M the boundary factors read (M x)_i instead of x_i, and kappa is
  // the l1 norm of M's last column (1 without a frame).
  WiggleIsotopy(int m, double eps, double delta, int smoothness, std::optional<double> amplitude = std::nullopt,
                std::optional<Eigen::MatrixXd> frame = std::nullopt);

  int dim() const { return m_; }
  double eps() const { return eps_; }
  double delta() const { return delta_; }
  double delta_requested() const { return delta_requested_; }
  int J() const { return J_; }
  double amplitude() const { return a_; }
  int smoothness() const { return psi_out_.smoothness(); }
  double parameter_factor() const { return c_; }
  const Profile& transition() const { return psi_out_; }
  const Profile& step() const { return eta_; }

  // Same isotopy with the parameter plateau factors prod_j psi_out((1-|z_j|)/eps).
  WiggleIsotopy with_parameter(std::span<const double> z) const;

  const std::optional<Eigen::MatrixXd>& frame() const { return frame_; }

  // a c kappa sup|psi_out'|; injectivity needs it below 1.
  double injectivity_certificate() const;
  // min over the grid of 1 + d phi_1 / d x_m.
  double min_monotonicity(const GridSpec& grid) const;

  double w(double u) const;
  double phi(double t, std::span<const double> x) const;
  TruncatedPoly<double> phi_jet(double t, std::span<const double> x, int order) const;

  std::vector<double> apply(double t, std::span<const double> x) const;
  // Root solve in the last coordinate.
  std::vector<double> invert(double t, std::span<const double> x) const;
  Jet<double> jet(double t, std::span<const double> x, int order) const;
  Jet<double> inverse_jet(double t, std::span<const double> x, int order) const;
  Diffeo diffeo(double t) const;

  // Half-widths in y_m of the regions used by the transverse model:
  // U = F_1{|y_m| < a eps/2}, U' = F_1{|y_m| < a eps/4}, supp cutoff in F_1{|y_m| <= 3 a eps/8}.
  double region_halfwidth() const { return 0.5 * a_ * eps_; }
  double closeness_halfwidth() const { return 0.25 * a_ * eps_; }
  double support_halfwidth() const { return 0.375 * a_ * eps_; }

  // phi(x) = 1 - psi_out(2|y_m|/(a eps)) with F_1(y) = x.
  double cutoff(std::span<const double> x) const;
  TruncatedPoly<double> cutoff_jet(std::span<const double> x, int order) const;
  // Same, given y = F_1^{-1}(x) already.
  TruncatedPoly<double> cutoff_jet_at(std::span<const double> x, std::span<const double> y, int order) const;

 private:
  int m_;
  double eps_;
  double delta_requested_;
  double delta_;
  int J_;
  double a_;
  double c_ = 1.0;
  double kappa_ = 1.0;
  std::optional<Eigen::MatrixXd> frame_;
  Profile psi_out_;
  Profile eta_;
};

double cutoff_phi(const WiggleIsotopy& W, std::span<const double> x);

struct Check {
  std::string name;
  bool passed = true;
  double value = 0.0;
  std::string detail;
};

// Output of every construction: sigma_hat = j^r f and the isotopy F_t.
struct ApproximationResult {
  int m = 0;
  int n = 0;
  int r = 0;
  std::string path;
  Field f;
  // Empty means F_t = id.
  std::function<Diffeo(double)> isotopy;
  json params = json::object();
  json norms = json::object();
  json measurements = json::object();
  std::vector<Check> checks;

  // Where closeness to sigma is claimed: sample points (original coordinates)
  // and a membership test for the region itself.
  std::vector<std::vector<double>> closeness_samples;
  std::function<bool(std::span<const double>)> in_closeness;
  // Points covering supp f, used for sup norms.
  std::vector<std::vector<double>> support_samples;

  Diffeo isotopy_at(double t) const;
  JetSection section() const { return JetSection::holonomic(f, r); }
  const Check* find_check(const std::string& name) const;
  // Boundary vanishing, V-invariance, gluing and holonomy-defect trend.
  bool structural_ok() const;
  json to_json() const;
};

// v must vanish where max_i |x_i| > 1 - margin; checked on a grid.
void check_support_margin(const Field& v, int m, double margin, int count_per_axis, const std::string& what = "v");

class TransverseModel {
 public:
  // sigma has constant co-normal c e_1.
  TransverseModel(const PrimitiveSection& sigma, WiggleIsotopy W);

  const WiggleIsotopy& wiggle() const { return W_; }
  int m() const { return m_; }
  int n() const { return n_; }
  int r() const { return r_; }
  // c^r, absorbed into v.
  double scale() const { return scale_; }

  int rectangle(double x1) const;
  // +1 for even j, -1 for odd j.
  static int parity_sign(int j) { return (j % 2 == 0) ? 1 : -1; }
  // b_j(u) = 2 j delta + s_j delta eta(2u / (a eps)) and its derivatives.
  std::vector<double> b_derivatives(int j, double u, int order) const;
  // g on rectangle j: (x_1 - b)^r v(b, x_2, ..., x_{m-1}, 0).
  std::vector<TruncatedPoly<double>> g_jet(std::span<const double> x, int order, int j) const;
  std::vector<TruncatedPoly<double>> g_jet(std::span<const double> x, int order) const;
  std::vector<TruncatedPoly<double>> f_jet(std::span<const double> x, int order) const;
  // Same, given y = F_1^{-1}(x).
  std::vector<TruncatedPoly<double>> f_jet_at(std::span<const double> x, std::span<const double> y, int order) const;
  Field f() const;

 private:
  int m_, n_, r_;
  double scale_;
  Field v_;
  WiggleIsotopy W_;
};

struct TransverseOptions {
  int smoothness = 0;  // 0: r + 1
  std::optional<double> amplitude;
  double grid_scale = 1.0;
  bool resolution_check = true;
  bool defect_check = true;
};

ApproximationResult transverse_approximate(const PrimitiveSection& sigma, int k, double eps, double delta,
                                           const TransverseOptions& opt = {});

struct ParametricOptions {
  TransverseOptions transverse;
  int z_count = 9;  // interior z samples per parameter axis
};

// v_family is a field on R^{m+q}, x first, then z; co-normal e_1.
ApproximationResult parametric_transverse_approximate(const Field& v_family, int m, int q, int r, int k, double eps,
                                                      double delta, const ParametricOptions& opt = {});

struct AdjustOptions {
  int smoothness = 0;  // 0: r + 1
  double grid_scale = 1.0;
  bool defect_check = true;
};

// h = psi_in(<x,n>/delta) <x,n>^r (s|u|)^r v with n the unit normal of H.
ApproximationResult transversality_adjust(const PrimitiveSection& sigma, double delta, const Subspace& H,
                                          const AdjustOptions& opt = {});

struct PrimitiveOptions {
  TransverseOptions transverse;
  AdjustOptions adjust;
};

ApproximationResult approximate_primitive(const PrimitiveSection& sigma, int k, double eps, double delta,
                                          double lambda, const PrimitiveOptions& opt = {});

struct StageParams {
  double eps = 0.0;
  double delta = 0.0;
};

struct TopOrderOptions {
  PrimitiveOptions primitive;
  double lambda = 0.1;
  bool defect_check = true;
};

// One stage per merged decomposition term, tangent terms first. A schedule
// of length 1 is used for every stage.
ApproximationResult approximate_top_order(const TopOrderSection& sigma, int k, const std::vector<StageParams>& schedule,
                                          const TopOrderOptions& opt = {});

// p(X) = sum over 0 <= |alpha| <= r of a_alpha(x) X^alpha, graded-lex slots.
struct CoefficientSection {
  int m = 0;
  int n = 0;
  int r = 0;
  std::vector<Field> a;

  static CoefficientSection zero(int m, int n, int r);
  static CoefficientSection from_top_order(const TopOrderSection& s);
  Jet<double> at(std::span<const double> x) const;
  CoefficientSection truncated(int l) const;
  TopOrderSection top_part() const;
  // Largest l with a_alpha literally zero for all |alpha| <= l, or -1.
  int vanishing_order() const;
  void validate() const;
};

// sigma^{(l)} = 0 with l < r. Recurses on the order-(r-1) part, then solves
// the order-r remainder pulled back by the first isotopy.
ApproximationResult reduce_order(const CoefficientSection& sigma, int l, int k, const std::vector<StageParams>& schedule,
                                 const TopOrderOptions& opt = {});

}  // namespace jetlab
