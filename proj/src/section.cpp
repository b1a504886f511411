#include "jetlab/section.hpp"

#include <cmath>

namespace jetlab {

JetSection::JetSection(int m, int n, int r, Generator g) : m_(m), n_(n), r_(r), gen_(std::move(g)) {
  require(m >= 1 && n >= 0 && r >= 0, "precondition", "jet section needs m >= 1, n >= 0, r >= 0");
}

JetSection JetSection::holonomic(const Field& f, int r) {
  return JetSection(f.in_dim(), f.out_dim(), r, [f, r](std::span<const double> x) { return f.jet(x, r); });
}

JetSection JetSection::sampled(const GridSpec& grid, std::vector<Jet<double>> samples) {
  grid.validate();
  require(samples.size() == grid.size(), "shape_mismatch", "one jet per grid node is required");
  require(!samples.empty(), "shape_mismatch", "sampled section needs samples");
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (int a = 0; a < grid.dim(); ++a) {
      double x = grid.point(i)[a];
      require(x >= -1.0 - 1e-12 && x <= 1.0 + 1e-12, "precondition", "grid samples must lie in the unit cube");
    }
  const int m = samples[0].m(), n = samples[0].n(), r = samples[0].r();
  auto store = std::make_shared<const std::vector<Jet<double>>>(std::move(samples));
  return JetSection(m, n, r, [grid, store](std::span<const double> x) {
    std::vector<int> idx(grid.dim());
    for (int a = 0; a < grid.dim(); ++a) {
      double h = grid.step(a);
      int i = h > 0 ? static_cast<int>(std::lround((x[a] - grid.lower[a]) / h)) : 0;
      if (i < 0 || i >= grid.counts[a] || std::fabs(grid.coord(a, i) - x[a]) > 1e-9 * std::max(1.0, h))
        throw Error("domain", "sampled section evaluated away from its grid nodes");
      idx[a] = i;
    }
    return (*store)[grid.flatten(idx)];
  });
}

Jet<double> JetSection::at(std::span<const double> x) const {
  require(static_cast<int>(x.size()) == m_, "shape_mismatch", "section evaluated at a point of the wrong dimension");
  return gen_(x);
}

DefectField holonomy_defect(const JetSection& sigma, const GridSpec& grid) {
  grid.validate();
  require(grid.dim() == sigma.m(), "shape_mismatch", "grid dimension differs from the section's");
  DefectField out;
  out.grid = grid;
  const std::size_t N = grid.size();
  out.values.assign(N, 0.0);
  out.one_sided.assign(N, 0);
  const int r = sigma.r(), n = sigma.n(), m = sigma.m();
  if (r == 0 || n == 0) return out;

  LayoutPtr lay = Layout::get(m, r);
  const std::size_t S = lay->size();
  // D[node * n * S + c * S + slot]
  std::vector<double> D(N * n * S);
  std::vector<double> x;
  for (std::size_t i = 0; i < N; ++i) {
    grid.point(i, x);
    Jet<double> j = sigma.at(x);
    require(j.r() == r && j.n() == n, "shape_mismatch", "section returned a jet of unexpected shape");
    for (int c = 0; c < n; ++c)
      for (std::size_t s = 0; s < S; ++s) D[(i * n + c) * S + s] = j.derivative(c, s);
  }

  const std::size_t low_end = lay->degree_begin(r);
  for (std::size_t i = 0; i < N; ++i) {
    std::vector<int> idx = grid.unflatten(i);
    double worst = 0.0;
    bool one_sided = false;
    for (int a = 0; a < m; ++a) {
      if (grid.counts[a] < 2) continue;
      const double h = grid.step(a);
      auto node = [&](int offset) {
        std::vector<int> k = idx;
        k[a] += offset;
        return grid.flatten(k);
      };
      int mode = 0;  // 0 central, 1 forward, -1 backward
      if (idx[a] == 0)
        mode = 1;
      else if (idx[a] == grid.counts[a] - 1)
        mode = -1;
      if (mode != 0) {
        one_sided = true;
        if (grid.counts[a] < 3) continue;
      }
      std::size_t n0 = i, n1 = 0, n2 = 0;
      if (mode == 0) {
        n1 = node(1);
        n2 = node(-1);
      } else {
        n1 = node(mode);
        n2 = node(2 * mode);
      }
      for (int c = 0; c < n; ++c) {
        for (std::size_t s = 0; s < low_end; ++s) {
          const int up = lay->raise(s, a);
          double fd;
          if (mode == 0) {
            fd = (D[(n1 * n + c) * S + s] - D[(n2 * n + c) * S + s]) / (2.0 * h);
          } else {
            fd = mode * (-3.0 * D[(n0 * n + c) * S + s] + 4.0 * D[(n1 * n + c) * S + s] - D[(n2 * n + c) * S + s]) /
                 (2.0 * h);
          }
          worst = std::max(worst, std::fabs(fd - D[(i * n + c) * S + up]));
        }
      }
    }
    out.values[i] = worst;
    out.one_sided[i] = one_sided ? 1 : 0;
    if (one_sided) ++out.one_sided_count;
    out.max = std::max(out.max, worst);
    if (!one_sided) out.interior_max = std::max(out.interior_max, worst);
  }
  return out;
}

double section_cr_norm(const TwoPointGerm& h, int m, int r, const GridSpec& grid, int min_count) {
  grid.validate(min_count);
  require(grid.dim() == m, "shape_mismatch", "grid dimension differs from the section's");
  LayoutPtr lay = Layout::get(2 * m, 2 * r);
  double best = 0.0;
  std::vector<double> x;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.point(i, x);
    auto comps = h(x, x, 2 * r);
    for (std::size_t s = 0; s < lay->size(); ++s) {
      const MultiIndex& ab = lay->index(s);
      int ox = 0, oy = 0;
      for (int v = 0; v < m; ++v) {
        ox += ab[v];
        oy += ab[m + v];
      }
      if (ox > r || oy > r) continue;
      double sq = 0.0;
      for (const auto& p : comps) {
        double d = p[s] * lay->alpha_factorial(s);
        sq += d * d;
      }
      best = std::max(best, std::sqrt(sq));
    }
  }
  return best;
}

}  // namespace jetlab
