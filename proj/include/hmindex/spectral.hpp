#pragma once

// Spherical-harmonic eigenspaces of the Laplace-Beltrami operator on S^n,
// their reproducing kernels Xi, truncated heat kernels and the Gram
// determinant identity det(Xi(rho(m_j, m_k))) = sum of squared minors / p!.

#include "hmindex/geometry.hpp"
#include "hmindex/polynomial.hpp"

#include <vector>

namespace hmindex {

inline constexpr int kMaxSphereDim = 4;
inline constexpr int kMaxDegree = 3;

/// L2-orthonormal basis {phi_i} of degree-k spherical harmonics on S^n,
/// Delta phi_i = lambda phi_i with Delta = -div grad and lambda = k(k+n-1).
class Eigenbasis {
 public:
  int sphere_dim() const { return n_; }
  int degree() const { return k_; }
  double eigenvalue() const { return static_cast<double>(k_ * (k_ + n_ - 1)); }
  int size() const { return static_cast<int>(functions_.size()); }

  double evaluate(int i, const SpherePoint& y) const;
  /// (phi_1(y), ..., phi_N(y)); y need not be validated.
  Eigen::VectorXd values(const Vec& y) const;
  /// Spherical gradient of phi_i at y (tangent at y).
  Vec gradient(int i, const Vec& y) const;

  const HomogeneousPolynomial& polynomial(int i) const { return functions_.at(i); }

 private:
  friend Eigenbasis make_eigenbasis(int n, int k);
  int n_ = 0;
  int k_ = 0;
  std::vector<HomogeneousPolynomial> functions_;
};

/// Throws std::invalid_argument("unsupported degree/dimension") outside
/// 2 <= n <= 4, 1 <= k <= 3.
Eigenbasis make_eigenbasis(int n, int k);

/// dim of the degree-k eigenspace on S^n: C(n+k, k) - C(n+k-2, k-2).
int eigenspace_dimension(int n, int k);

/// Gegenbauer polynomial C_k^{(nu)}(t) by three-term recurrence.
double gegenbauer(int k, double nu, double t);

/// Closed-form reproducing kernel of the degree-k eigenspace on S^n as a
/// function of cos(rho): (N / Vol) C_k^{(n-1)/2}(t) / C_k^{(n-1)/2}(1).
double xi_closed_form_cos(int n, int k, double cos_rho);

class XiKernel {
 public:
  explicit XiKernel(Eigenbasis basis) : basis_(std::move(basis)) {}

  const Eigenbasis& basis() const { return basis_; }
  double eval(double rho) const;
  double eval_cos(double cos_rho) const;
  double at_zero() const { return eval_cos(1.0); }
  /// Xi(rho(x, y)).
  double between(const SpherePoint& x, const SpherePoint& y) const;

 private:
  Eigenbasis basis_;
};

XiKernel make_xi(const Eigenbasis& basis);

/// |Xi''(0) + (lambda/n) Xi(0)| with Xi''(0) from a fourth-order central
/// difference of the even extension.
double xi_second_derivative_check(const XiKernel& kernel);

/// 1/Vol(S^n) + sum_{k=1}^{k_max} exp(-lambda_k t) Xi_k(rho(x, y)).
/// Throws std::invalid_argument for t <= 0.
double heat_kernel_partial(const SpherePoint& x, const SpherePoint& y, double t, int k_max = 8);

struct GramDeterminant {
  double lhs = 0.0;  // det(Xi(rho(m_j, m_k)))
  double rhs = 0.0;  // sum over index p-tuples of squared minors, divided by p!
};

/// Brute force over all N^p index tuples; requires p <= 4 and N <= 9.
GramDeterminant gram_det_check(const std::vector<SpherePoint>& points, const Eigenbasis& basis);

/// Matrix (Xi(rho(m_j, m_k)))_{jk}.
Eigen::MatrixXd xi_matrix(const XiKernel& kernel, const std::vector<SpherePoint>& points);

}  // namespace hmindex
