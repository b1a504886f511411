#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "jetlab/lingeo.hpp"

using namespace jetlab;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// sup over unit v in V of the angle between v and W, by sampling the unit
// sphere of V; the angle of a single vector to W is arccos |P_W v|.
double brute_angle(const Subspace& V, const Subspace& W, std::mt19937& rng, int samples = 20000) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd P = W.projector();
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd c(V.dim());
    for (int i = 0; i < V.dim(); ++i) c(i) = g(rng);
    Eigen::VectorXd v = V.basis() * c;
    v.normalize();
    best = std::max(best, std::acos(std::min(1.0, (P * v).norm())));
  }
  return best;
}

Subspace random_subspace(int m, int d, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd B(m, d);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < d; ++j) B(i, j) = g(rng);
  return Subspace(B);
}

TEST(Subspace, OrthonormalBasis) {
  std::mt19937 rng(3);
  auto S = random_subspace(4, 3, rng);
  Eigen::MatrixXd G = S.basis().transpose() * S.basis();
  EXPECT_LT((G - Eigen::MatrixXd::Identity(3, 3)).norm(), 1e-12);
  EXPECT_THROW(Subspace(Eigen::MatrixXd::Zero(3, 1)), Error);
}

TEST(SubspaceAngle, SelfIsZero) {
  auto H = Subspace::hyperplane(vec({1, 2, 3}));
  EXPECT_NEAR(subspace_angle(H, H), 0.0, 1e-12);
}

TEST(SubspaceAngle, PlaneLinesAtQuarterTurn) {
  auto A = Subspace::hyperplane(vec({0, 1}));
  auto B = Subspace::hyperplane(vec({1, 1}));
  EXPECT_NEAR(subspace_angle(A, B), kPi / 4, 1e-12);
}

TEST(SubspaceAngle, LineAgainstHyperplaneInR3) {
  auto V = Subspace::coordinate(3, {0});
  auto W = Subspace::hyperplane(vec({1, 1, 0}));
  EXPECT_NEAR(subspace_angle(V, W), kPi / 4, 1e-12);
  std::mt19937 rng(11);
  EXPECT_NEAR(brute_angle(V, W, rng, 10), kPi / 4, 1e-12);
}

TEST(SubspaceAngle, RejectsLargerFirstArgument) {
  auto V = Subspace::coordinate(3, {0, 1});
  auto W = Subspace::coordinate(3, {2});
  EXPECT_THROW(subspace_angle(V, W), Error);
}

TEST(SubspaceAngle, MatchesSphereSampling) {
  std::mt19937 rng(5);
  for (int m = 2; m <= 4; ++m)
    for (int dv = 1; dv < m; ++dv)
      for (int dw = dv; dw < m; ++dw)
        for (int trial = 0; trial < 4; ++trial) {
          auto V = random_subspace(m, dv, rng);
          auto W = random_subspace(m, dw, rng);
          double a = subspace_angle(V, W);
          double b = brute_angle(V, W, rng);
          // Sampling only underestimates the supremum.
          EXPECT_LE(b, a + 1e-9) << m << " " << dv << " " << dw;
          EXPECT_NEAR(a, b, dv == 1 ? 1e-9 : 0.03) << m << " " << dv << " " << dw;
        }
}

TEST(SubspaceAngle, SymmetricInEqualDimensions) {
  std::mt19937 rng(7);
  for (int t = 0; t < 20; ++t) {
    auto V = random_subspace(4, 2, rng);
    auto W = random_subspace(4, 2, rng);
    EXPECT_NEAR(subspace_angle(V, W), subspace_angle(W, V), 1e-10);
  }
}

TEST(SubspaceAngle, MonotoneUnderEnlargingTarget) {
  std::mt19937 rng(9);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    auto V = random_subspace(4, 1, rng);
    auto W = random_subspace(4, 2, rng);
    Eigen::MatrixXd B(4, 3);
    B.leftCols(2) = W.basis();
    for (int i = 0; i < 4; ++i) B(i, 2) = g(rng);
    Subspace W2(B);
    EXPECT_LE(subspace_angle(V, W2), subspace_angle(V, W) + 1e-12);
  }
}

TEST(SubspaceAngle, ZeroExactlyForContainedSubspaces) {
  auto W = Subspace::coordinate(4, {0, 1, 2});
  auto V = Subspace(vec({1, -2, 0.5, 0}));
  EXPECT_NEAR(subspace_angle(V, W), 0.0, 1e-12);
  EXPECT_TRUE(W.contains(V.basis().col(0)));
  auto V2 = Subspace(vec({1, 0, 0, 1e-3}));
  EXPECT_GT(subspace_angle(V2, W), 1e-4);
  EXPECT_FALSE(W.contains(V2.basis().col(0)));
}

TEST(HyperplaneField, UnitAndVanishingCheck) {
  auto tau = HyperplaneField::constant({0, 3});
  EXPECT_NEAR(tau.unit(std::vector<double>{0.2, 0.1})(1), 1.0, 1e-15);
  EXPECT_THROW(HyperplaneField::constant({0, 0}), Error);
  auto f = HyperplaneField::from_field(Field::from_expressions({Expr::coord(0), Expr::constant(0.0)}, 2));
  EXPECT_THROW(f.check_nonvanishing(GridSpec::cube(2, 5)), Error);
}

TEST(CubeComplex, FaceCountsTileTheCube) {
  // [-1,1]^k with 2N cells per axis: f_j = C(k, j) (2N)^j (2N+1)^(k-j).
  for (int k = 1; k <= 3; ++k)
    for (int N = 1; N <= 3; ++N) {
      CubeComplex K(k, k + 1, N);
      std::vector<std::size_t> count(k + 1, 0);
      for (const auto& f : K.faces()) ++count[f.dim];
      for (int j = 0; j <= k; ++j) {
        double want = std::tgamma(k + 1) / (std::tgamma(j + 1) * std::tgamma(k - j + 1)) * std::pow(2 * N, j) *
                      std::pow(2 * N + 1, k - j);
        EXPECT_EQ(static_cast<double>(count[j]), want) << k << " " << N << " " << j;
      }
      double vol = 0.0;
      for (const auto& c : K.cubes()) vol += std::pow(1.0 / N, k);
      EXPECT_NEAR(vol, std::pow(2.0, k), 1e-12);
    }
  EXPECT_THROW(CubeComplex(2, 2, 1), Error);
}

TEST(ClassifyFaces, TangentConstantFieldIsAllAlmostTangent) {
  for (int k = 1; k <= 2; ++k) {
    CubeComplex K(k, 3, 2);
    auto res = classify_faces(K, HyperplaneField::constant({0, 0, 1}), 1e-9);
    EXPECT_EQ(res.almost_tangent.size(), K.faces().size());
    EXPECT_TRUE(res.transverse.empty());
    EXPECT_EQ(res.borderline_count, 0u);
  }
}

TEST(ClassifyFaces, NormalAlongFirstAxisMakesThoseFacesTransverse) {
  CubeComplex K(2, 3, 2);
  auto res = classify_faces(K, HyperplaneField::constant({1, 0, 0}), 0.1);
  EXPECT_EQ(res.almost_tangent.size() + res.transverse.size(), K.faces().size());
  for (const auto& v : res.transverse) {
    EXPECT_TRUE(std::find(v.face.axes.begin(), v.face.axes.end(), 0) != v.face.axes.end());
    EXPECT_NEAR(v.max_angle, kPi / 2, 1e-12);
  }
  for (const auto& v : res.almost_tangent)
    EXPECT_TRUE(std::find(v.face.axes.begin(), v.face.axes.end(), 0) == v.face.axes.end());
}

HyperplaneField rotating(double rate) {
  // u = (cos theta, sin theta) with theta = pi/2 + rate * x_1.
  auto theta = Expr::add({Expr::constant(kPi / 2), Expr::mul({Expr::constant(rate), Expr::coord(0)})});
  return HyperplaneField::from_field(Field::from_expressions({Expr::cos(theta), Expr::sin(theta)}, 2));
}

TEST(ClassifyFaces, RotatingFieldMatchesFineScan) {
  const double lambda = 0.1, rate = 0.3;
  auto tau = rotating(rate);
  CubeComplex K(1, 2, 20);
  auto res = classify_faces(K, tau, lambda);
  EXPECT_EQ(res.almost_tangent.size() + res.transverse.size(), K.faces().size());
  EXPECT_FALSE(res.almost_tangent.empty());
  EXPECT_FALSE(res.transverse.empty());

  // Oracle: 10x finer scan of each face with an independently computed angle.
  auto fine_max = [&](const Face& f) {
    if (f.dim == 0) return 0.0;
    double best = 0.0;
    for (int s = 0; s <= 40; ++s) {
      double t = s / 40.0;
      auto p = f.point(std::vector<double>{t}, 2);
      double th = kPi / 2 + rate * p[0];
      // tau_x is spanned by (-sin th, cos th); its angle to e_1 is the
      // angle of that vector to the x_1 axis.
      best = std::max(best, std::acos(std::min(1.0, std::fabs(std::sin(th)))));
    }
    return best;
  };
  for (const auto& v : res.almost_tangent)
    if (!v.borderline) EXPECT_LE(fine_max(v.face), lambda + 1e-9);
  for (const auto& v : res.transverse) EXPECT_GT(fine_max(v.face), lambda);
  for (const auto& v : res.almost_tangent) EXPECT_NEAR(v.max_angle, fine_max(v.face), 1e-9);
}

TEST(ClassifyFaces, RelabelingInvariant) {
  auto tau = rotating(0.3);
  CubeComplex K(1, 2, 20);
  auto res = classify_faces(K, tau, 0.1);
  std::vector<Face> faces = K.faces();
  std::reverse(faces.begin(), faces.end());
  for (const auto& f : faces) {
    bool in_at = std::any_of(res.almost_tangent.begin(), res.almost_tangent.end(), [&](auto& v) { return v.face == f; });
    bool in_tr = std::any_of(res.transverse.begin(), res.transverse.end(), [&](auto& v) { return v.face == f; });
    EXPECT_NE(in_at, in_tr);
  }
}

TEST(ClassifyFaces, RejectsCoarseSubdivision) {
  auto tau = rotating(3.0);
  try {
    classify_faces(CubeComplex(1, 2, 2), tau, 0.1);
    FAIL() << "expected a rejection";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "precondition");
    EXPECT_NE(std::string(e.what()).find("anchor"), std::string::npos);
  }
}

TEST(SkeletonAngle, ConstantAndRotating) {
  EXPECT_NEAR(skeleton_angle(1, HyperplaneField::constant({0, 1})), 0.0, 1e-12);
  EXPECT_NEAR(skeleton_angle(1, rotating(0.3), 9), 0.3, 1e-9);
}

}  // namespace
