#pragma once

// Test functions u_j = sum_i phi_i(m_j) phi_i and their gradient fields.
// For degree-1 harmonics grad u_j is a conformal field with
// Hess u_j = -(lambda/n) u_j h; the residual checks below measure this.

#include "hmindex/geometry.hpp"
#include "hmindex/polynomial.hpp"
#include "hmindex/spectral.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace hmindex {

inline constexpr double kHessianStep = 1e-4;

class TestFunction {
 public:
  TestFunction(std::shared_ptr<const Eigenbasis> basis, SpherePoint basepoint);

  const Eigenbasis& basis() const { return *basis_; }
  const SpherePoint& basepoint() const { return basepoint_; }
  int sphere_dim() const { return basis_->sphere_dim(); }
  double eigenvalue() const { return basis_->eigenvalue(); }
  const HomogeneousPolynomial& polynomial() const { return poly_; }

  double eval(const SpherePoint& y) const { return value(y.ambient()); }
  TangentVec grad(const SpherePoint& y) const;

  // Unchecked variants for hot loops; y must lie on the sphere.
  double value(const Vec& y) const { return poly_.value(y); }
  Vec gradient(const Vec& y) const { return ambient::tangent_part(y, poly_.gradient(y)); }

  /// c * u, same basepoint.
  TestFunction scaled(double c) const;

 private:
  TestFunction(std::shared_ptr<const Eigenbasis> basis, SpherePoint basepoint, HomogeneousPolynomial poly);

  std::shared_ptr<const Eigenbasis> basis_;
  SpherePoint basepoint_;
  HomogeneousPolynomial poly_;
};

struct FieldFamily {
  std::shared_ptr<const Eigenbasis> basis;
  std::vector<SpherePoint> points;
  std::vector<TestFunction> functions;
  Eigen::MatrixXd gram;  // quadrature of <grad u_j, grad u_k> over S^n
  int resolution = 0;
};

/// d^2/dt^2 fn(exp_y(t v)) at t = 0 by a central geodesic second difference.
double geodesic_second_difference(const std::function<double(const Vec&)>& fn, const Vec& y, const Vec& v,
                                  double step = kHessianStep);

struct TangentHessian {
  std::vector<Vec> frame;  // orthonormal basis of T_y S^n
  Mat values;              // Hess(e_a, e_b)
};

/// Hessian in an orthonormal tangent frame; off-diagonal entries by
/// polarization of geodesic second differences.
TangentHessian fd_hessian(const std::function<double(const Vec&)>& fn, const Vec& y, double step = kHessianStep);

/// Laplace-Beltrami operator Delta = -trace Hess by finite differences.
double fd_laplacian(const std::function<double(const Vec&)>& fn, const Vec& y, double step = kHessianStep);

/// max_ab |Hess(u)(y)_ab + (lambda/n) u(y) delta_ab|.
double hessian_residual(const TestFunction& u, const SpherePoint& y);

/// (L_{grad u} h)(X, Y) = 2 Hess(u)(X, Y).
double lie_derivative_metric(const TestFunction& u, const SpherePoint& y, const TangentVec& x, const TangentVec& w);

/// |(L_{grad u} h)(X, Y)| for a seeded random orthonormal pair X, Y at y.
double conformality_residual(const TestFunction& u, const SpherePoint& y, std::uint64_t seed);

/// Rank test on (phi_i(m_j)) and positivity test on det(Xi(rho(m_j, m_k))).
bool basepoints_admissible(const Eigenbasis& basis, const std::vector<SpherePoint>& points);

/// Seeded rejection sampling of n+1 admissible basepoints (up to 100 draws).
/// Throws std::runtime_error("degenerate basepoint configuration").
std::vector<SpherePoint> choose_basepoints(const Eigenbasis& basis, std::uint64_t seed);

/// Builds u_j for each basepoint and the quadrature Gram matrix of their
/// gradients. Throws std::runtime_error when the Gram matrix is degenerate.
FieldFamily build_family(std::shared_ptr<const Eigenbasis> basis, const std::vector<SpherePoint>& points,
                         int resolution);

}  // namespace hmindex
