#include "jetlab/lingeo.hpp"

#include <algorithm>
#include <cmath>

namespace jetlab {

Subspace::Subspace(const Eigen::MatrixXd& spanning, double tol) {
  require(spanning.rows() >= 1 && spanning.cols() >= 1, "precondition", "subspace needs 0 < dim <= m");
  require(spanning.cols() <= spanning.rows(), "precondition", "more spanning vectors than the ambient dimension");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(spanning);
  qr.setThreshold(tol);
  require(qr.rank() == spanning.cols(), "precondition", "spanning vectors are linearly dependent");
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(spanning.rows(), spanning.cols());
  basis_ = Q;
}

Subspace Subspace::coordinate(int m, const std::vector<int>& axes) {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, static_cast<int>(axes.size()));
  for (std::size_t j = 0; j < axes.size(); ++j) {
    require(axes[j] >= 0 && axes[j] < m, "precondition", "coordinate axis out of range");
    B(axes[j], static_cast<int>(j)) = 1.0;
  }
  return Subspace(B);
}

Subspace Subspace::hyperplane(const Eigen::VectorXd& normal) {
  const int m = static_cast<int>(normal.size());
  require(m >= 2, "precondition", "a hyperplane needs ambient dimension >= 2");
  require(normal.norm() > 1e-14, "precondition", "hyperplane normal must be nonzero");
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(normal.normalized());
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(m, m);
  return Subspace(Q.rightCols(m - 1));
}

bool Subspace::contains(const Eigen::VectorXd& v, double tol) const {
  return (v - basis_ * (basis_.transpose() * v)).norm() <= tol * std::max(1.0, v.norm());
}

double subspace_angle(const Subspace& V, const Subspace& W) {
  require(V.ambient() == W.ambient(), "shape_mismatch", "subspaces live in different ambient spaces");
  require(V.dim() <= W.dim(), "precondition", "subspace_angle needs dim V <= dim W");
  // cos(theta_max) = smallest singular value of V^T W; sin(theta_max) =
  // largest singular value of the residual (I - P_W) V.
  Eigen::MatrixXd M = V.basis().transpose() * W.basis();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd_c(M);
  double c = svd_c.singularValues().minCoeff();
  Eigen::MatrixXd R = V.basis() - W.basis() * (W.basis().transpose() * V.basis());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd_s(R);
  double s = svd_s.singularValues().maxCoeff();
  return std::atan2(std::max(0.0, s), std::max(0.0, c));
}

double hyperplane_angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double c = std::min(1.0, std::fabs(a.normalized().dot(b.normalized())));
  const Eigen::VectorXd an = a.normalized(), bn = b.normalized();
  const double s = (bn - an * an.dot(bn)).norm();
  return std::atan2(s, c);
}

HyperplaneField HyperplaneField::constant(std::vector<double> u) {
  require(!u.empty(), "precondition", "co-normal must have dimension >= 1");
  double nrm = 0.0;
  for (double x : u) nrm += x * x;
  require(nrm > 0.0, "precondition", "co-normal must be nonzero");
  HyperplaneField h;
  h.dim_ = static_cast<int>(u.size());
  h.field_ = Field::constant(h.dim_, u);
  h.constant_ = std::move(u);
  return h;
}

HyperplaneField HyperplaneField::from_field(Field u) {
  require(u.in_dim() == u.out_dim(), "shape_mismatch", "co-normal field must map R^m to R^m");
  HyperplaneField h;
  h.dim_ = u.in_dim();
  h.field_ = std::move(u);
  return h;
}

std::vector<double> HyperplaneField::raw(std::span<const double> x) const {
  if (constant_) return *constant_;
  return field_.value(x);
}

Eigen::VectorXd HyperplaneField::unit(std::span<const double> x) const {
  auto r = raw(x);
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
  const double n = v.norm();
  require(n > 1e-12, "domain", "co-normal vanishes at the evaluation point");
  return v / n;
}

Subspace HyperplaneField::at(std::span<const double> x) const { return Subspace::hyperplane(unit(x)); }

void HyperplaneField::check_nonvanishing(const GridSpec& grid, double tol) const {
  if (constant_) return;
  std::vector<double> x;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.point(i, x);
    auto r = raw(x);
    double n = 0.0;
    for (double c : r) n += c * c;
    if (std::sqrt(n) < tol) {
      std::string where;
      for (double c : x) where += std::to_string(c) + " ";
      throw Error("precondition", "co-normal vanishes at grid point ( " + where + ")");
    }
  }
}

std::vector<double> Face::point(std::span<const double> t, int m) const {
  std::vector<double> p(m, 0.0);
  for (std::size_t i = 0; i < anchor.size(); ++i) p[i] = static_cast<double>(anchor[i]) / N;
  for (std::size_t a = 0; a < axes.size(); ++a) p[axes[a]] += t[a] / N;
  return p;
}

CubeComplex::CubeComplex(int k, int m, int N) : k_(k), m_(m), N_(N) {
  require(k >= 1 && k < m, "precondition", "cube complex needs 1 <= k < m");
  require(N >= 1, "precondition", "subdivision count N must be >= 1");
  // Enumerate faces by axis subset; an axis in the subset ranges over
  // anchors -N..N-1, the others over -N..N.
  for (int mask = 0; mask < (1 << k); ++mask) {
    std::vector<int> axes;
    for (int a = 0; a < k; ++a)
      if (mask & (1 << a)) axes.push_back(a);
    std::vector<int> lo(k, -N), hi(k);
    for (int a = 0; a < k; ++a) hi[a] = (mask & (1 << a)) ? N - 1 : N;
    std::vector<int> cur = lo;
    while (true) {
      faces_.push_back(Face{static_cast<int>(axes.size()), cur, axes, N});
      int a = 0;
      while (a < k && ++cur[a] > hi[a]) {
        cur[a] = lo[a];
        ++a;
      }
      if (a == k) break;
    }
  }
}

std::vector<Face> CubeComplex::cubes() const {
  std::vector<Face> out;
  for (const auto& f : faces_)
    if (f.dim == k_) out.push_back(f);
  return out;
}

namespace {

// Sample parameters t in [0,1]^d with `s` points per edge.
std::vector<std::vector<double>> face_samples(int d, int s) {
  std::vector<std::vector<double>> out;
  if (d == 0) return {std::vector<double>{}};
  std::vector<int> idx(d, 0);
  while (true) {
    std::vector<double> t(d);
    for (int a = 0; a < d; ++a) t[a] = s > 1 ? static_cast<double>(idx[a]) / (s - 1) : 0.5;
    out.push_back(t);
    int a = 0;
    while (a < d && ++idx[a] >= s) {
      idx[a] = 0;
      ++a;
    }
    if (a == d) break;
  }
  return out;
}

}  // namespace

FaceClassification classify_faces(const CubeComplex& K, const HyperplaneField& tau, double lambda,
                                  int samples_per_edge) {
  require(lambda > 0.0, "precondition", "classify_faces needs lambda > 0");
  require(samples_per_edge >= 2, "precondition", "classify_faces needs >= 2 samples per edge");
  require(tau.dim() == K.m(), "shape_mismatch", "hyperplane field and complex live in different dimensions");
  const int m = K.m();

  // Variation check over each top cube, slightly enlarged to stand in for Op(Q).
  if (!tau.is_constant()) {
    const double pad = 0.25;
    auto ts = face_samples(K.k(), samples_per_edge + 1);
    for (const auto& cube : K.cubes()) {
      std::vector<Eigen::VectorXd> normals;
      for (auto t : ts) {
        for (double& v : t) v = -pad + (1.0 + 2.0 * pad) * v;
        auto p = cube.point(t, m);
        for (double& c : p) c = std::clamp(c, -1.0, 1.0);
        normals.push_back(tau.unit(p));
      }
      for (std::size_t i = 0; i < normals.size(); ++i)
        for (std::size_t j = i + 1; j < normals.size(); ++j) {
          double ang = hyperplane_angle(normals[i], normals[j]);
          if (ang >= 0.5 * lambda) {
            std::string where;
            for (int a : cube.anchor) where += std::to_string(a) + " ";
            throw Error("precondition", "tau varies by " + std::to_string(ang) + " >= lambda/2 over the cube with anchor ( " +
                                            where + ") at N = " + std::to_string(K.N()) + "; increase N");
          }
        }
    }
  }

  FaceClassification out;
  for (const auto& f : K.faces()) {
    FaceVerdict v{f, 0.0, 0.0, false};
    if (f.dim > 0) {
      Subspace TF = Subspace::coordinate(m, f.axes);
      double mx = 0.0, mn = 1e300;
      for (const auto& t : face_samples(f.dim, samples_per_edge)) {
        auto p = f.point(t, m);
        double ang = subspace_angle(TF, tau.at(p));
        mx = std::max(mx, ang);
        mn = std::min(mn, ang);
      }
      v.max_angle = mx;
      v.min_angle = mn;
    }
    if (v.max_angle <= lambda) {
      out.almost_tangent.push_back(v);
    } else if (v.min_angle >= 0.5 * lambda) {
      out.transverse.push_back(v);
    } else {
      v.borderline = true;
      ++out.borderline_count;
      out.almost_tangent.push_back(v);
    }
  }
  return out;
}

double skeleton_angle(int k, const HyperplaneField& tau, int samples_per_axis) {
  const int m = tau.dim();
  require(k >= 1 && k < m, "precondition", "skeleton angle needs 1 <= k < m");
  std::vector<int> axes(k);
  for (int a = 0; a < k; ++a) axes[a] = a;
  Subspace Rk = Subspace::coordinate(m, axes);
  if (tau.is_constant()) return subspace_angle(Rk, tau.at(std::vector<double>(m, 0.0)));
  GridSpec g = GridSpec::box(std::vector<double>(k, -1.0), std::vector<double>(k, 1.0), std::vector<int>(k, samples_per_axis));
  double best = 0.0;
  std::vector<double> x;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.point(i, x);
    x.resize(m, 0.0);
    best = std::max(best, subspace_angle(Rk, tau.at(x)));
  }
  return best;
}

}  // namespace jetlab
