#include <cmath>
#include <sstream>

#include "localmodels_internal.hpp"

namespace jetlab {

Diffeo ApproximationResult::isotopy_at(double t) const {
  if (!isotopy) return Diffeo::identity(m);
  return isotopy(t);
}

const Check* ApproximationResult::find_check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

bool ApproximationResult::structural_ok() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

json ApproximationResult::to_json() const {
  json cj = json::array();
  for (const auto& c : checks)
    cj.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"detail", c.detail}});
  return {{"path", path},
          {"params", params},
          {"norms", norms},
          {"measurements", measurements},
          {"checks", cj},
          {"structural_ok", structural_ok()}};
}

void check_support_margin(const Field& v, int m, double margin, int count_per_axis, const std::string& what) {
  if (v.is_literal_zero()) return;
  auto pts = detail::shell_samples(m, margin, count_per_axis);
  for (const auto& x : pts) {
    bool outside = false;
    for (double xi : x) outside = outside || std::fabs(xi) > 1.0 - margin;
    if (!outside) continue;
    auto val = v.value(x);
    for (double c : val) {
      if (c != 0.0) {
        std::ostringstream os;
        os << "support margin violated: " << what << " = " << c << " at (";
        for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
        os << "), must vanish where max|x_i| > 1 - " << margin;
        throw Error("precondition", os.str());
      }
    }
  }
}

namespace detail {

int count_for(double width, double per_unit, double grid_scale, int lo, int hi) {
  double c = std::ceil(width * per_unit * grid_scale) + 1.0;
  return static_cast<int>(std::clamp(c, static_cast<double>(lo), static_cast<double>(hi)));
}

std::vector<std::vector<double>> shell_samples(int m, double width, int count) {
  GridSpec g = GridSpec::cube(m, count);
  std::vector<std::vector<double>> out;
  std::vector<double> x;
  // Also sample the shell boundary itself and a few points inside it.
  std::vector<double> extra_levels = {1.0 - width, 1.0 - 0.5 * width, 1.0 - 0.25 * width, 1.0};
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.point(i, x);
    double mx = 0.0;
    for (double xi : x) mx = std::max(mx, std::fabs(xi));
    if (mx >= 1.0 - width) out.push_back(x);
  }
  GridSpec face = GridSpec::cube(m - 1 > 0 ? m - 1 : 1, std::max(3, count / 2));
  if (m >= 2) {
    for (int axis = 0; axis < m; ++axis)
      for (double lvl : extra_levels)
        for (double sgn : {-1.0, 1.0})
          for (std::size_t i = 0; i < face.size(); ++i) {
            auto p = face.point(i);
            std::vector<double> y;
            for (int a = 0, b = 0; a < m; ++a) y.push_back(a == axis ? sgn * lvl : p[b++]);
            out.push_back(std::move(y));
          }
  }
  return out;
}

DefectTrend defect_trend(const Field& f, int r, std::span<const double> center, std::span<const double> halfwidth,
                         int count) {
  const int m = static_cast<int>(center.size());
  std::vector<double> lo(m), hi(m);
  for (int i = 0; i < m; ++i) {
    lo[i] = std::max(-1.0, center[i] - halfwidth[i]);
    hi[i] = std::min(1.0, center[i] + halfwidth[i]);
  }
  GridSpec g = GridSpec::box(lo, hi, std::vector<int>(m, count));
  JetSection s = JetSection::holonomic(f, r);
  DefectTrend t;
  t.coarse = holonomy_defect(s, g).max;
  t.fine = holonomy_defect(s, g.refined(2)).max;
  return t;
}

void attach_defect_check(ApproximationResult& res, std::span<const double> center, std::span<const double> halfwidth) {
  if (res.r < 1) return;
  DefectTrend t = defect_trend(res.f, res.r, center, halfwidth);
  res.measurements["defect_coarse"] = t.coarse;
  res.measurements["defect_fine"] = t.fine;
  res.measurements["defect_window"] = std::vector<double>(halfwidth.begin(), halfwidth.end());
  std::ostringstream os;
  os << "holonomy defect " << t.coarse << " -> " << t.fine << " under grid-step halving";
  res.checks.push_back({"holonomy_defect_trend", t.decreasing(), t.fine, os.str()});
}

void attach_boundary_check(ApproximationResult& res, const std::vector<std::vector<double>>& samples) {
  std::size_t bad_f = 0, bad_F = 0;
  std::vector<Diffeo> Ft;
  if (res.isotopy)
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) Ft.push_back(res.isotopy(t));
  for (const auto& x : samples) {
    if (!jets_exactly_zero(res.f.jet_components(x, res.r))) ++bad_f;
    for (const auto& F : Ft) {
      auto y = F.apply(x);
      if (y != x) {
        ++bad_F;
        break;
      }
    }
  }
  std::ostringstream os;
  os << samples.size() << " samples in Op(boundary); nonzero f jets: " << bad_f << ", F_t != id: " << bad_F;
  res.checks.push_back({"boundary_vanishing", bad_f == 0 && bad_F == 0, static_cast<double>(bad_f + bad_F), os.str()});
}

}  // namespace detail
}  // namespace jetlab
