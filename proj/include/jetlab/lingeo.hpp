#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jetlab/field.hpp"
#include "jetlab/grid.hpp"

namespace jetlab {

// Linear subspace of R^m with an orthonormal basis (columns).
class Subspace {
 public:
  // Orthonormalizes the given spanning columns; rejects rank deficiency.
  explicit Subspace(const Eigen::MatrixXd& spanning, double tol = 1e-12);

  static Subspace coordinate(int m, const std::vector<int>& axes);
  // u^perp for a nonzero u.
  static Subspace hyperplane(const Eigen::VectorXd& normal);

  int ambient() const { return static_cast<int>(basis_.rows()); }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Eigen::MatrixXd& basis() const { return basis_; }
  Eigen::MatrixXd projector() const { return basis_ * basis_.transpose(); }
  bool contains(const Eigen::VectorXd& v, double tol = 1e-10) const;

 private:
  Eigen::MatrixXd basis_;
};

// Largest principal angle between V and W (radians), dim V <= dim W.
double subspace_angle(const Subspace& V, const Subspace& W);

// Hyperplane field tau_x = u_x^perp from a co-normal generator. The raw
// generator value is kept for primitive jets; geometry uses the unit vector.
class HyperplaneField {
 public:
  static HyperplaneField constant(std::vector<double> u);
  static HyperplaneField from_field(Field u);

  int dim() const { return dim_; }
  bool is_constant() const { return constant_.has_value(); }
  const std::optional<std::vector<double>>& constant_value() const { return constant_; }
  const Field& generator() const { return field_; }

  std::vector<double> raw(std::span<const double> x) const;
  Eigen::VectorXd unit(std::span<const double> x) const;  // rejects u_x = 0
  Subspace at(std::span<const double> x) const;

  // Rejects if u vanishes (|u| < tol) at any grid node.
  void check_nonvanishing(const GridSpec& grid, double tol = 1e-12) const;

 private:
  int dim_ = 0;
  Field field_;
  std::optional<std::vector<double>> constant_;
};

// Angle between hyperplanes with unit normals a, b.
double hyperplane_angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Face of the cubical subdivision of I^k x 0 in R^m with N cells per unit
// length: anchor/N + sum_{a in axes} t_a e_a / N, t in [0, 1].
struct Face {
  int dim = 0;
  std::vector<int> anchor;  // integer lattice coordinates in [-N, N], length k
  std::vector<int> axes;    // sorted subset of 0..k-1
  int N = 1;

  std::vector<double> point(std::span<const double> t, int m) const;
  bool operator==(const Face&) const = default;
};

class CubeComplex {
 public:
  // Faces of the subdivision of [-1, 1]^k into (2N)^k cubes of side 1/N,
  // embedded in R^m as I^k x 0.
  CubeComplex(int k, int m, int N);

  int k() const { return k_; }
  int m() const { return m_; }
  int N() const { return N_; }
  const std::vector<Face>& faces() const { return faces_; }
  // Top-dimensional cubes (dim == k).
  std::vector<Face> cubes() const;

 private:
  int k_;
  int m_;
  int N_;
  std::vector<Face> faces_;
};

struct FaceVerdict {
  Face face;
  double max_angle = 0.0;
  double min_angle = 0.0;
  bool borderline = false;
};

struct FaceClassification {
  std::vector<FaceVerdict> almost_tangent;  // includes borderline faces
  std::vector<FaceVerdict> transverse;
  std::size_t borderline_count = 0;
};

// `samples_per_edge` points per face edge are used for the angle scan and
// the per-cube variation check (tau must vary by < lambda/2 over each cube).
FaceClassification classify_faces(const CubeComplex& K, const HyperplaneField& tau, double lambda,
                                  int samples_per_edge = 5);

// max over sampled x in I^k of the angle between R^k x 0 and tau_x.
double skeleton_angle(int k, const HyperplaneField& tau, int samples_per_axis = 9);

}  // namespace jetlab
