#pragma once

// Round-sphere primitives. Points of S^n live in R^{n+1}; tangent vectors are
// ambient vectors orthogonal to their base point.

#include <Eigen/Dense>

#include <cstddef>
#include <random>
#include <vector>

namespace hmindex {

// Ambient dimensions never exceed 8 (S^4 targets, S^4 domains), so small
// vectors and matrices stay on the stack.
inline constexpr int kMaxAmbient = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxAmbient, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAmbient, kMaxAmbient>;

// Tolerance ladder shared by every check in the library.
namespace tol {
inline constexpr double kAlgebraic = 1e-10;
inline constexpr double kQuadrature = 1e-8;
inline constexpr double kFiniteDifference = 1e-6;
}  // namespace tol

class SpherePoint {
 public:
  /// Throws std::invalid_argument unless |ambient|^2 = 1 within 1e-12 and n >= 2.
  explicit SpherePoint(Vec ambient);

  /// Projects a nonzero vector onto the sphere.
  static SpherePoint normalized(const Vec& v);
  /// Standard basis vector e_{index+1} of R^{n+1}.
  static SpherePoint basis(int n, int index);

  const Vec& ambient() const { return ambient_; }
  int dim() const { return static_cast<int>(ambient_.size()) - 1; }

 private:
  Vec ambient_;
};

class TangentVec {
 public:
  /// Throws std::invalid_argument unless <base, vec> = 0 within 1e-10.
  TangentVec(SpherePoint base, Vec vec);

  /// Zero vector at x.
  static TangentVec zero(const SpherePoint& x);
  /// Projects an arbitrary ambient vector onto T_x S^n.
  static TangentVec project(const SpherePoint& x, const Vec& v);

  const SpherePoint& base() const { return base_; }
  const Vec& vec() const { return vec_; }
  double norm() const { return vec_.norm(); }

 private:
  SpherePoint base_;
  Vec vec_;
};

double geodesic_distance(const SpherePoint& x, const SpherePoint& y);
SpherePoint exp_map(const SpherePoint& x, const TangentVec& v);
/// Throws std::domain_error("log undefined") for antipodal pairs.
TangentVec log_map(const SpherePoint& x, const SpherePoint& y);
/// Transport along the minimal geodesic from x to y.
TangentVec parallel_transport(const SpherePoint& x, const SpherePoint& y, const TangentVec& v);

/// kappa (|X|^2 |W|^2 - <X,W>^2) = <R(X,W)W, X> for constant curvature kappa.
double curvature_term(const TangentVec& x, const TangentVec& w, double kappa);
/// Polarized form <R(X,W1)W2, X>.
double curvature_form(const TangentVec& x, const TangentVec& w1, const TangentVec& w2, double kappa);

// Unchecked kernels on raw ambient vectors, used in hot loops where the typed
// wrappers above would re-validate every intermediate point.
namespace ambient {

Vec exp(const Vec& x, const Vec& v);
Vec log(const Vec& x, const Vec& y);
Vec transport(const Vec& x, const Vec& y, const Vec& v);
double distance(const Vec& x, const Vec& y);
inline Vec tangent_part(const Vec& x, const Vec& v) { return v - x.dot(v) * x; }
inline double curvature_form(const Vec& x, const Vec& w1, const Vec& w2, double kappa) {
  return kappa * (x.squaredNorm() * w1.dot(w2) - x.dot(w1) * x.dot(w2));
}
/// Orthonormal basis of x^perp built by Gram-Schmidt on the standard basis.
std::vector<Vec> tangent_frame(const Vec& x);

}  // namespace ambient

/// Uniform random point on S^n.
SpherePoint random_point(int n, std::mt19937_64& rng);
/// Uniform random unit tangent vector at x.
TangentVec random_unit_tangent(const SpherePoint& x, std::mt19937_64& rng);

}  // namespace hmindex
