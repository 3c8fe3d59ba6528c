#pragma once

// Homogeneous polynomials on R^{d}, used to represent solid harmonics.

#include "hmindex/geometry.hpp"

#include <vector>

namespace hmindex {

/// All exponent vectors of total degree `degree` in `vars` variables, in
/// graded-lexicographic order (x_1 first).
std::vector<std::vector<int>> monomial_exponents(int vars, int degree);

/// Exact integral of x^alpha over the unit sphere S^{vars-1}.
double sphere_monomial_integral(const std::vector<int>& alpha);

class HomogeneousPolynomial {
 public:
  HomogeneousPolynomial() = default;
  HomogeneousPolynomial(int vars, int degree, Eigen::VectorXd coefficients);

  int vars() const { return vars_; }
  int degree() const { return degree_; }
  const Eigen::VectorXd& coefficients() const { return coefficients_; }
  const std::vector<std::vector<int>>& exponents() const { return exponents_; }

  double value(const Vec& x) const;
  /// Euclidean gradient in R^{vars}.
  Vec gradient(const Vec& x) const;

  HomogeneousPolynomial scaled(double c) const;

 private:
  int vars_ = 0;
  int degree_ = 0;
  std::vector<std::vector<int>> exponents_;
  Eigen::VectorXd coefficients_;
};

}  // namespace hmindex
