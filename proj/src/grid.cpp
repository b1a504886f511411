#include "jetlab/grid.hpp"

#include <cmath>

#include "jetlab/error.hpp"

namespace jetlab {

GridSpec GridSpec::box(std::vector<double> lower, std::vector<double> upper, std::vector<int> counts) {
  GridSpec g{std::move(lower), std::move(upper), std::move(counts)};
  g.validate();
  return g;
}

GridSpec GridSpec::cube(int m, int count, double lo, double hi) {
  return box(std::vector<double>(m, lo), std::vector<double>(m, hi), std::vector<int>(m, count));
}

void GridSpec::validate(int min_count) const {
  require(!counts.empty(), "precondition", "grid needs at least one axis");
  require(lower.size() == counts.size() && upper.size() == counts.size(), "shape_mismatch",
          "grid bounds and counts differ in length");
  for (std::size_t i = 0; i < counts.size(); ++i) {
    require(counts[i] >= 1, "precondition", "grid counts must be >= 1");
    require(counts[i] >= min_count, "precondition",
            "grid resolution below the declared minimum (" + std::to_string(min_count) + " samples per axis)");
    require(std::isfinite(lower[i]) && std::isfinite(upper[i]) && lower[i] <= upper[i], "precondition",
            "grid bounds must be finite with lower <= upper");
  }
}

std::size_t GridSpec::size() const {
  std::size_t n = 1;
  for (int c : counts) n *= static_cast<std::size_t>(c);
  return n;
}

double GridSpec::step(int axis) const {
  return counts[axis] > 1 ? (upper[axis] - lower[axis]) / (counts[axis] - 1) : 0.0;
}

double GridSpec::coord(int axis, int i) const {
  if (counts[axis] == 1) return 0.5 * (lower[axis] + upper[axis]);
  if (i == counts[axis] - 1) return upper[axis];
  return lower[axis] + i * step(axis);
}

void GridSpec::point(std::size_t flat, std::vector<double>& out) const {
  out.resize(counts.size());
  for (std::size_t a = 0; a < counts.size(); ++a) {
    const int i = static_cast<int>(flat % static_cast<std::size_t>(counts[a]));
    flat /= static_cast<std::size_t>(counts[a]);
    out[a] = coord(static_cast<int>(a), i);
  }
}

std::vector<double> GridSpec::point(std::size_t flat) const {
  std::vector<double> p;
  point(flat, p);
  return p;
}

std::vector<int> GridSpec::unflatten(std::size_t flat) const {
  std::vector<int> idx(counts.size());
  for (std::size_t a = 0; a < counts.size(); ++a) {
    idx[a] = static_cast<int>(flat % static_cast<std::size_t>(counts[a]));
    flat /= static_cast<std::size_t>(counts[a]);
  }
  return idx;
}

std::size_t GridSpec::flatten(const std::vector<int>& idx) const {
  std::size_t flat = 0;
  for (std::size_t a = counts.size(); a-- > 0;) flat = flat * static_cast<std::size_t>(counts[a]) + idx[a];
  return flat;
}

GridSpec GridSpec::refined(int factor) const {
  GridSpec g = *this;
  for (auto& c : g.counts)
    if (c > 1) c = (c - 1) * factor + 1;
  return g;
}

GridSpec GridSpec::scaled(double factor) const {
  GridSpec g = *this;
  for (auto& c : g.counts)
    if (c > 1) c = std::max(2, static_cast<int>(std::lround((c - 1) * factor)) + 1);
  return g;
}

}  // namespace jetlab
