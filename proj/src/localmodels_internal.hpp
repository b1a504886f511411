#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "jetlab/localmodels.hpp"

namespace jetlab::detail {

// Largest values seen with their sample coordinates.
class TopK {
 public:
  explicit TopK(std::size_t k = 8) : k_(k) {}
  void offer(double value, std::vector<double> where) {
    if (items_.size() == k_ && value <= items_.back().first) return;
    items_.emplace_back(value, std::move(where));
    std::sort(items_.begin(), items_.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    if (items_.size() > k_) items_.pop_back();
  }
  double max() const { return items_.empty() ? 0.0 : items_.front().first; }
  const std::vector<std::pair<double, std::vector<double>>>& items() const { return items_; }

 private:
  std::size_t k_;
  std::vector<std::pair<double, std::vector<double>>> items_;
};

inline double jet_distance(const Jet<double>& a, const Jet<double>& b) {
  Jet<double> d = a;
  for (std::size_t c = 0; c < d.components.size(); ++c) d.components[c] -= b.components[c];
  return jet_norms(d).c0;
}

inline bool jets_exactly_zero(const std::vector<TruncatedPoly<double>>& comps) {
  for (const auto& p : comps)
    if (!p.is_zero()) return false;
  return true;
}

// Points of a count^m grid on [-1,1]^m with max |x_i| >= 1 - width.
std::vector<std::vector<double>> shell_samples(int m, double width, int count);

struct DefectTrend {
  double coarse = 0.0;
  double fine = 0.0;
  bool decreasing() const { return fine <= coarse * (1.0 + 1e-9) + 1e-13; }
};

// holonomy_defect of j^r f on a box, at count and 2*count-1 nodes per axis.
DefectTrend defect_trend(const Field& f, int r, std::span<const double> center, std::span<const double> halfwidth,
                         int count = 65);

// Adds the holonomy-defect check to a result, probing around `center`; the
// window is recorded as measurements["defect_window"].
void attach_defect_check(ApproximationResult& res, std::span<const double> center,
                         std::span<const double> halfwidth);

// Boundary vanishing of f (all jet coefficients exactly zero) and F_t = id
// at the given samples.
void attach_boundary_check(ApproximationResult& res, const std::vector<std::vector<double>>& samples);


int count_for(double width, double per_unit, double grid_scale, int lo = 2, int hi = 1 << 20);

}  // namespace jetlab::detail

namespace jetlab::detail {

// x' = L x (model coordinates), x = Linv x'.
struct Frame {
  Eigen::MatrixXd L;
  Eigen::MatrixXd Linv;
};

// Offsets sum_j M(i, j) X_j, one polynomial per row of M.
std::vector<TruncatedPoly<double>> linear_offsets(const Eigen::MatrixXd& M, const LayoutPtr& lay);

// Transverse construction in model coordinates; with a frame, f and F_t are
// reported in original coordinates (f = f' o L, F_t = L^{-1} F'_t L) and
// measured against `reference` there.
ApproximationResult transverse_core(const PrimitiveSection& model_sigma, int k, double eps, double delta,
                                    const TransverseOptions& opt, const std::optional<Frame>& frame,
                                    const PrimitiveSection* reference);

}  // namespace jetlab::detail
