#include "hmindex/polynomial.hpp"

#include <cmath>
#include <stdexcept>

namespace hmindex {

namespace {

void fill_exponents(int var, int remaining, std::vector<int>& current, std::vector<std::vector<int>>& out) {
  const int vars = static_cast<int>(current.size());
  if (var == vars - 1) {
    current[var] = remaining;
    out.push_back(current);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[var] = e;
    fill_exponents(var + 1, remaining - e, current, out);
  }
}

// powers[i * (degree + 1) + e] = x_i^e
void power_table(const Vec& x, int degree, std::vector<double>& powers) {
  const int vars = static_cast<int>(x.size());
  powers.assign(static_cast<std::size_t>(vars) * (degree + 1), 1.0);
  for (int i = 0; i < vars; ++i) {
    for (int e = 1; e <= degree; ++e) powers[i * (degree + 1) + e] = powers[i * (degree + 1) + e - 1] * x[i];
  }
}

}  // namespace

std::vector<std::vector<int>> monomial_exponents(int vars, int degree) {
  if (vars < 1 || degree < 0) throw std::invalid_argument("monomial_exponents: bad arguments");
  std::vector<std::vector<int>> out;
  std::vector<int> current(vars, 0);
  fill_exponents(0, degree, current, out);
  return out;
}

double sphere_monomial_integral(const std::vector<int>& alpha) {
  double log_num = 0.0;
  double beta_sum = 0.0;
  for (int a : alpha) {
    if (a % 2 != 0) return 0.0;
    const double beta = 0.5 * (a + 1);
    log_num += std::lgamma(beta);
    beta_sum += beta;
  }
  return 2.0 * std::exp(log_num - std::lgamma(beta_sum));
}

HomogeneousPolynomial::HomogeneousPolynomial(int vars, int degree, Eigen::VectorXd coefficients)
    : vars_(vars), degree_(degree), exponents_(monomial_exponents(vars, degree)),
      coefficients_(std::move(coefficients)) {
  if (vars > kMaxAmbient) throw std::invalid_argument("HomogeneousPolynomial: too many variables");
  if (coefficients_.size() != static_cast<Eigen::Index>(exponents_.size())) {
    throw std::invalid_argument("HomogeneousPolynomial: coefficient count does not match monomial count");
  }
}

double HomogeneousPolynomial::value(const Vec& x) const {
  thread_local std::vector<double> powers;
  power_table(x, degree_, powers);
  double sum = 0.0;
  for (std::size_t t = 0; t < exponents_.size(); ++t) {
    const double c = coefficients_[static_cast<Eigen::Index>(t)];
    if (c == 0.0) continue;
    double term = c;
    for (int i = 0; i < vars_; ++i) term *= powers[i * (degree_ + 1) + exponents_[t][i]];
    sum += term;
  }
  return sum;
}

Vec HomogeneousPolynomial::gradient(const Vec& x) const {
  thread_local std::vector<double> powers;
  power_table(x, degree_, powers);
  Vec g = Vec::Zero(vars_);
  for (std::size_t t = 0; t < exponents_.size(); ++t) {
    const double c = coefficients_[static_cast<Eigen::Index>(t)];
    if (c == 0.0) continue;
    const auto& e = exponents_[t];
    for (int j = 0; j < vars_; ++j) {
      if (e[j] == 0) continue;
      double term = c * e[j] * powers[j * (degree_ + 1) + e[j] - 1];
      for (int i = 0; i < vars_; ++i) {
        if (i != j) term *= powers[i * (degree_ + 1) + e[i]];
      }
      g[j] += term;
    }
  }
  return g;
}

HomogeneousPolynomial HomogeneousPolynomial::scaled(double c) const {
  return HomogeneousPolynomial(vars_, degree_, coefficients_ * c);
}

}  // namespace hmindex
