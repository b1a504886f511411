#pragma once

#include <cstddef>
#include <vector>

namespace jetlab {

// Tensor grid over an axis-aligned box; counts[i] >= 1 samples per axis,
// endpoints included.
struct GridSpec {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<int> counts;

  static GridSpec box(std::vector<double> lower, std::vector<double> upper, std::vector<int> counts);
  static GridSpec cube(int m, int count, double lo = -1.0, double hi = 1.0);

  int dim() const { return static_cast<int>(counts.size()); }
  std::size_t size() const;
  double step(int axis) const;
  double coord(int axis, int i) const;
  std::vector<double> point(std::size_t flat) const;
  void point(std::size_t flat, std::vector<double>& out) const;
  std::vector<int> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::vector<int>& idx) const;

  // (count - 1) * factor + 1 per axis, so every coarse node stays a node.
  GridSpec refined(int factor = 2) const;
  GridSpec scaled(double factor) const;

  void validate(int min_count = 1) const;
};

}  // namespace jetlab
