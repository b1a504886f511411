#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "jetlab/localmodels.hpp"

namespace jetlab {

enum class BoundKind { h_mixed, dF, phi, b, conclusion_c0, conclusion_perp, adjust };

std::string to_string(BoundKind k);
BoundKind bound_kind_from_string(const std::string& s);

// What each kind reads:
//   h_mixed          sigma (co-normal along e_1), delta
//   dF, phi          wiggle
//   b                wiggle, order (the derivative i)
//   conclusion_*     sigma, result of transverse_approximate (or primitive)
//   adjust           sigma, result of transversality_adjust, theta
struct BoundInputs {
  const PrimitiveSection* sigma = nullptr;
  const WiggleIsotopy* wiggle = nullptr;
  const ApproximationResult* result = nullptr;
  double delta = 0.0;
  double theta = 0.0;
  int order = 1;
};

// lhs_max / bound_rhs with the bound's constant C left out. `resolved` is
// false when re-sampling at half the grid step moved lhs_max by >= 5%.
struct BoundStats {
  BoundKind kind = BoundKind::h_mixed;
  double lhs_max = 0.0;
  double bound_rhs = 0.0;
  double ratio = 0.0;
  double lhs_refined = 0.0;
  bool resolved = true;
  json grid = json::object();
  json detail = json::object();

  json to_json() const;
};

BoundStats bound_check(BoundKind kind, const BoundInputs& in, const std::optional<GridSpec>& grid = std::nullopt);

// Default sampling windows; each meets 8 samples per delta in x_1.
GridSpec default_bound_grid(BoundKind kind, const BoundInputs& in);

struct SweepPoint {
  double eps = 0.0;
  double delta = 0.0;
  double theta = 0.0;
};

struct SweepRow {
  SweepPoint point;
  std::optional<BoundStats> stats;
  std::string kind;
  std::string error;  // construction failure for this tuple, if any
};

struct KindSummary {
  std::string kind;
  std::size_t count = 0;
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  // exp(mean log ratio): least squares of log ratio against a constant.
  double fitted_C = 0.0;
  // Least-squares slope of log lhs against log rhs; 1 when the bound is sharp.
  double trend_slope = 0.0;
  bool lhs_decreasing = true;  // in lattice order
  bool all_resolved = true;
  double band() const { return ratio_min > 0.0 ? ratio_max / ratio_min : 0.0; }
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::vector<KindSummary> summaries;

  const KindSummary* summary(const std::string& kind) const;
  // eps, delta, ratio_kind, lhs_max, bound_rhs, ratio, fitted_C, resolved_flag
  std::string to_csv() const;
  json to_json() const;
};

// One construction per lattice point; returns the bound statistics of interest.
using SweepConstruction = std::function<std::vector<BoundStats>(const SweepPoint&)>;

// Points run in lattice order; a throwing construction is recorded on its row
// and the sweep continues.
SweepReport scaling_sweep(const SweepConstruction& construction, const std::vector<SweepPoint>& lattice,
                          const std::vector<std::string>& kinds);

// Diagonal refinement (eps, delta/eps) -> (eps/2, delta/(2 eps)), steps + 1 points.
std::vector<SweepPoint> diagonal_lattice(double eps, double delta, int steps);
// Full product eps x (delta/eps).
std::vector<SweepPoint> product_lattice(const std::vector<double>& eps, const std::vector<double>& ratio);

// Ready-made constructions.
SweepConstruction transverse_construction(const PrimitiveSection& sigma, int k, const TransverseOptions& opt = {});
SweepConstruction estimate_construction(const PrimitiveSection& sigma, int smoothness = 0);
// Section at angle theta from H = {x_m = 0}: co-normal sin(theta) e_1 + cos(theta) e_m.
SweepConstruction adjust_construction(const Field& v, int m, int r, const AdjustOptions& opt = {});

}  // namespace jetlab
