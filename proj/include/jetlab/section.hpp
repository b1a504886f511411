#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "jetlab/field.hpp"
#include "jetlab/grid.hpp"

namespace jetlab {

// Field of r-jets over a box, given by a generator or by stored grid samples.
class JetSection {
 public:
  using Generator = std::function<Jet<double>(std::span<const double> x)>;

  JetSection(int m, int n, int r, Generator g);

  static JetSection holonomic(const Field& f, int r);
  // Lookup-only section: evaluation is defined at grid nodes.
  static JetSection sampled(const GridSpec& grid, std::vector<Jet<double>> samples);

  int m() const { return m_; }
  int n() const { return n_; }
  int r() const { return r_; }
  Jet<double> at(std::span<const double> x) const;

 private:
  int m_;
  int n_;
  int r_;
  Generator gen_;
};

struct DefectField {
  GridSpec grid;
  std::vector<double> values;          // per grid node
  std::vector<std::uint8_t> one_sided;  // 1 where a one-sided stencil was used
  double max = 0.0;
  double interior_max = 0.0;
  std::size_t one_sided_count = 0;
};

// max over |alpha| < r, axes i, components of |FD d/dx_i D_alpha - D_{alpha+e_i}|
// with central differences at grid step, second-order one-sided at the box edge.
DefectField holonomy_defect(const JetSection& sigma, const GridSpec& grid);

// h(x, y) as a jet in the 2m offset variables (X, Y) at the pair (x, y),
// truncated at `order`; variables 0..m-1 are X, m..2m-1 are Y.
using TwoPointGerm =
    std::function<std::vector<TruncatedPoly<double>>(std::span<const double> x, std::span<const double> y, int order)>;

// max over grid x and |alpha|, |beta| <= r of |d_x^beta d_y^alpha h| at (x, x).
double section_cr_norm(const TwoPointGerm& h, int m, int r, const GridSpec& grid, int min_count = 2);

}  // namespace jetlab
