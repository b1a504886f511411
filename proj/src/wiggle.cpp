#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "jetlab/localmodels.hpp"
#include "jetlab/univariate.hpp"

namespace jetlab {

namespace {

int admissible_J(double delta) { return static_cast<int>(std::ceil((1.0 / delta - 1.0) / 2.0 - 1e-9)); }

}  // namespace

WiggleIsotopy::WiggleIsotopy(int m, double eps, double delta, int smoothness, std::optional<double> amplitude,
                             std::optional<Eigen::MatrixXd> frame)
    : m_(m),
      eps_(eps),
      delta_requested_(delta),
      psi_out_(Profile::transition(0.5, 0.75, std::max(smoothness, 1))),
      eta_(Profile::step(std::max(smoothness, 1))) {
  require(m >= 2, "precondition", "wiggle isotopy needs m >= 2");
  require(smoothness >= 1, "precondition", "profile smoothness must be >= 1");
  require(eps > 0.0 && eps < 0.5, "precondition", "wiggle needs 0 < eps < 1/2");
  require(delta > 0.0 && delta <= eps / 8.0, "precondition",
          "wiggle needs 0 < delta <= eps/8 (got delta/eps = " + std::to_string(delta / eps) + ")");
  if (frame) {
    require(frame->rows() == m && frame->cols() == m, "shape_mismatch", "wiggle frame must be m x m");
    frame_ = std::move(frame);
    kappa_ = frame_->col(m - 1).cwiseAbs().sum();
  }
  J_ = std::max(admissible_J(delta), 1);
  delta_ = 1.0 / (2.0 * J_ + 1.0);
  const double slope = psi_out_.sup_derivative(1) * kappa_;
  if (amplitude) {
    a_ = *amplitude;
    require(a_ > 0.0 && a_ <= 0.5, "precondition", "wiggle amplitude must lie in (0, 1/2]");
    if (a_ * slope >= 0.5) {
      GridSpec g = GridSpec::box(std::vector<double>(m, -1.0), std::vector<double>(m, 1.0), std::vector<int>(m, 5));
      g.lower[0] = -delta_;
      g.upper[0] = delta_;
      g.counts[0] = 33;
      g.lower[m - 1] = 1.0 - 0.75 * eps;
      g.upper[m - 1] = 1.0 - 0.5 * eps;
      g.counts[m - 1] = 65;
      std::ostringstream os;
      os << "injectivity certificate fails: a*kappa*sup|psi_out'| = " << a_ * slope
         << " >= 1/2; measured min of 1 + dphi_t/dx_m = " << min_monotonicity(g);
      throw Error("precondition", os.str());
    }
  } else {
    a_ = std::min(0.25, 0.45 / slope);
  }
}

WiggleIsotopy WiggleIsotopy::with_parameter(std::span<const double> z) const {
  WiggleIsotopy out = *this;
  for (double zj : z) {
    double arg = (1.0 - std::fabs(zj)) / eps_;
    out.c_ *= arg <= 0.5 ? 0.0 : psi_out_.value(arg);
  }
  return out;
}

double WiggleIsotopy::injectivity_certificate() const { return a_ * c_ * kappa_ * psi_out_.sup_derivative(1); }

double WiggleIsotopy::min_monotonicity(const GridSpec& grid) const {
  double mn = 1.0;
  std::vector<double> x;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.point(i, x);
    auto p = phi_jet(1.0, x, 1);
    mn = std::min(mn, 1.0 + p[1 + (m_ - 1)]);
  }
  return mn;
}

double WiggleIsotopy::w(double u) const { return a_ * eps_ * std::sin(std::numbers::pi * u / (2.0 * delta_)); }

double WiggleIsotopy::phi(double t, std::span<const double> x) const {
  require(static_cast<int>(x.size()) == m_, "shape_mismatch", "wiggle evaluated at a point of the wrong dimension");
  if (t == 0.0 || c_ == 0.0) return 0.0;
  double p = t * c_;
  std::vector<double> zf(x.begin(), x.end());
  if (frame_) {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), m_);
    Eigen::VectorXd z = *frame_ * xv;
    for (int i = 0; i < m_; ++i) zf[i] = z[i];
  }
  for (int i = 0; i < m_; ++i) {
    double arg = (1.0 - std::fabs(zf[i])) / eps_;
    if (arg <= 0.5) return 0.0;
    if (arg < 0.75) p *= psi_out_.value(arg);
  }
  return p * w(x[0]);
}

TruncatedPoly<double> WiggleIsotopy::phi_jet(double t, std::span<const double> x, int order) const {
  require(static_cast<int>(x.size()) == m_, "shape_mismatch", "wiggle evaluated at a point of the wrong dimension");
  LayoutPtr lay = Layout::get(m_, order);
  TruncatedPoly<double> out(lay);
  if (t == 0.0 || c_ == 0.0) return out;
  TruncatedPoly<double> p = TruncatedPoly<double>::constant(lay, t * c_);
  std::vector<double> zf(x.begin(), x.end());
  if (frame_) {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), m_);
    Eigen::VectorXd z = *frame_ * xv;
    for (int i = 0; i < m_; ++i) zf[i] = z[i];
  }
  for (int i = 0; i < m_; ++i) {
    double arg = (1.0 - std::fabs(zf[i])) / eps_;
    if (arg <= 0.5) return out;
    if (arg >= 0.75) continue;
    const double s = zf[i] < 0.0 ? -1.0 : 1.0;
    TruncatedPoly<double> A = TruncatedPoly<double>::constant(lay, arg);
    if (order >= 1) {
      if (frame_)
        for (int j = 0; j < m_; ++j) A[1 + j] = -s * (*frame_)(i, j) / eps_;
      else
        A[1 + i] = -s / eps_;
    }
    auto d = psi_out_.derivatives(arg, order);
    p = p * compose_univariate<double>(d, A);
  }
  const double k = std::numbers::pi / (2.0 * delta_);
  TruncatedPoly<double> theta = TruncatedPoly<double>::constant(lay, k * x[0]);
  if (order >= 1) theta[1] = k;
  auto sd = sin_derivatives(k * x[0], order);
  return p * (compose_univariate<double>(sd, theta) * (a_ * eps_));
}

std::vector<double> WiggleIsotopy::apply(double t, std::span<const double> x) const {
  std::vector<double> y(x.begin(), x.end());
  y[m_ - 1] += phi(t, x);
  return y;
}

std::vector<double> WiggleIsotopy::invert(double t, std::span<const double> x) const {
  require(static_cast<int>(x.size()) == m_, "shape_mismatch", "wiggle inverted at a point of the wrong dimension");
  std::vector<double> y(x.begin(), x.end());
  if (t == 0.0 || c_ == 0.0) return y;
  const double target = x[m_ - 1];
  auto G = [&](double ym) {
    y[m_ - 1] = ym;
    return ym + phi(t, y) - target;
  };
  const double reach = a_ * eps_ * t * c_ * (1.0 + 1e-12) + 1e-300;
  double lo = target - reach, hi = target + reach;
  double g0 = G(target);
  if (g0 == 0.0) {
    y[m_ - 1] = target;
    return y;
  }
  double cur = target - g0;
  for (int it = 0; it < 200; ++it) {
    double g = G(cur);
    if (g == 0.0) return y;
    if (g < 0.0)
      lo = std::max(lo, cur);
    else
      hi = std::min(hi, cur);
    y[m_ - 1] = cur;
    auto pj = phi_jet(t, y, 1);
    double slope = 1.0 + pj[1 + (m_ - 1)];
    double next = cur - g / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - cur) <= 1e-15 * (1.0 + std::fabs(cur)) || hi - lo <= 1e-16 * (1.0 + std::fabs(cur))) {
      G(next);
      return y;
    }
    cur = next;
  }
  throw Error("convergence", "wiggle inverse: root solve in the last coordinate did not converge");
}

Jet<double> WiggleIsotopy::jet(double t, std::span<const double> x, int order) const {
  LayoutPtr lay = Layout::get(m_, order);
  Jet<double> J;
  J.base.assign(x.begin(), x.end());
  for (int i = 0; i < m_; ++i) J.components.push_back(TruncatedPoly<double>::variable(lay, i, x[i]));
  J.components[m_ - 1] += phi_jet(t, x, order);
  return J;
}

Jet<double> WiggleIsotopy::inverse_jet(double t, std::span<const double> x, int order) const {
  auto y = invert(t, x);
  Jet<double> inv = jet_inverse(jet(t, y, order));
  inv.base.assign(x.begin(), x.end());
  for (int i = 0; i < m_; ++i) inv.components[i][0] = y[i];
  return inv;
}

Diffeo WiggleIsotopy::diffeo(double t) const {
  WiggleIsotopy W = *this;
  Field fwd(m_, m_, [W, t](std::span<const double> x, int order) { return W.jet(t, x, order).components; });
  Field inv(m_, m_, [W, t](std::span<const double> x, int order) { return W.inverse_jet(t, x, order).components; });
  return Diffeo(fwd, inv, [W, t](std::span<const double> y) { return W.invert(t, y); });
}

TruncatedPoly<double> WiggleIsotopy::cutoff_jet_at(std::span<const double> x, std::span<const double> y,
                                                   int order) const {
  LayoutPtr lay = Layout::get(m_, order);
  const double scale = 2.0 / (a_ * eps_);
  const double u = scale * std::fabs(y[m_ - 1]);
  if (u >= 0.75) return TruncatedPoly<double>(lay);
  if (u <= 0.5) return TruncatedPoly<double>::constant(lay, 1.0);
  Jet<double> inv = jet_inverse(jet(1.0, y, order));
  TruncatedPoly<double> Y = inv.components[m_ - 1];
  Y[0] = y[m_ - 1];
  const double s = y[m_ - 1] < 0.0 ? -1.0 : 1.0;
  TruncatedPoly<double> arg = Y * (s * scale);
  auto d = psi_out_.derivatives(u, order);
  TruncatedPoly<double> out = -compose_univariate<double>(d, arg);
  out.add_constant(1.0);
  (void)x;
  return out;
}

TruncatedPoly<double> WiggleIsotopy::cutoff_jet(std::span<const double> x, int order) const {
  auto y = invert(1.0, x);
  return cutoff_jet_at(x, y, order);
}

double WiggleIsotopy::cutoff(std::span<const double> x) const {
  auto y = invert(1.0, x);
  const double u = 2.0 * std::fabs(y[m_ - 1]) / (a_ * eps_);
  return 1.0 - psi_out_.value(u);
}

double cutoff_phi(const WiggleIsotopy& W, std::span<const double> x) { return W.cutoff(x); }

}  // namespace jetlab
