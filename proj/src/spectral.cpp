#include "hmindex/spectral.hpp"

#include "hmindex/grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace hmindex {

namespace {

long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Sphere L2 inner product of two coefficient vectors over the same monomials.
double sphere_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& gram) {
  return a.dot(gram * b);
}

}  // namespace

int eigenspace_dimension(int n, int k) {
  return static_cast<int>(binomial(n + k, k) - binomial(n + k - 2, k - 2));
}

Eigenbasis make_eigenbasis(int n, int k) {
  if (n < 2 || n > kMaxSphereDim || k < 1 || k > kMaxDegree) {
    throw std::invalid_argument("unsupported degree/dimension");
  }
  const int vars = n + 1;
  const auto top = monomial_exponents(vars, k);
  const int count = static_cast<int>(top.size());
  std::map<std::vector<int>, int> index_of;
  for (int s = 0; s < count; ++s) index_of[top[s]] = s;

  // Exact moments of the degree-2k products give the sphere L2 Gram matrix.
  Eigen::MatrixXd gram(count, count);
  for (int s = 0; s < count; ++s) {
    for (int t = 0; t < count; ++t) {
      std::vector<int> alpha(vars);
      for (int i = 0; i < vars; ++i) alpha[i] = top[s][i] + top[t][i];
      gram(s, t) = sphere_monomial_integral(alpha);
    }
  }

  // |x|^2 * P_{k-2} restricted to the sphere spans the lower eigenspaces; the
  // sphere-orthogonal complement of it inside P_k is the degree-k eigenspace.
  std::vector<Eigen::VectorXd> lower;
  if (k >= 2) {
    for (const auto& beta : monomial_exponents(vars, k - 2)) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(count);
      for (int i = 0; i < vars; ++i) {
        auto alpha = beta;
        alpha[i] += 2;
        v[index_of.at(alpha)] += 1.0;
      }
      lower.push_back(v);
    }
  }

  std::vector<Eigen::VectorXd> accepted;  // orthonormal so far (lower first)
  auto orthonormalize = [&](Eigen::VectorXd v) -> bool {
    const double original = std::sqrt(sphere_inner(v, v, gram));
    // Modified Gram-Schmidt, two passes for stability.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : accepted) v -= sphere_inner(q, v, gram) * q;
    }
    const double residual = std::sqrt(sphere_inner(v, v, gram));
    if (residual <= 1e-8 * original) return false;
    accepted.push_back(v / residual);
    return true;
  };
  for (const auto& v : lower) orthonormalize(v);
  const std::size_t lower_count = accepted.size();
  for (int s = 0; s < count; ++s) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(count);
    e[s] = 1.0;
    orthonormalize(e);
  }

  Eigenbasis basis;
  basis.n_ = n;
  basis.k_ = k;
  for (std::size_t i = lower_count; i < accepted.size(); ++i) {
    basis.functions_.emplace_back(vars, k, accepted[i]);
  }
  if (basis.size() != eigenspace_dimension(n, k)) {
    throw std::logic_error("make_eigenbasis: harmonic subspace has the wrong dimension");
  }
  return basis;
}

double Eigenbasis::evaluate(int i, const SpherePoint& y) const {
  if (y.dim() != n_) throw std::invalid_argument("Eigenbasis::evaluate: dimension mismatch");
  return functions_.at(i).value(y.ambient());
}

Eigen::VectorXd Eigenbasis::values(const Vec& y) const {
  Eigen::VectorXd out(size());
  for (int i = 0; i < size(); ++i) out[i] = functions_[i].value(y);
  return out;
}

Vec Eigenbasis::gradient(int i, const Vec& y) const {
  return ambient::tangent_part(y, functions_.at(i).gradient(y));
}

double gegenbauer(int k, double nu, double t) {
  if (k == 0) return 1.0;
  double c0 = 1.0;
  double c1 = 2.0 * nu * t;
  for (int j = 2; j <= k; ++j) {
    const double c2 = (2.0 * t * (j + nu - 1.0) * c1 - (j + 2.0 * nu - 2.0) * c0) / j;
    c0 = c1;
    c1 = c2;
  }
  return c1;
}

double xi_closed_form_cos(int n, int k, double cos_rho) {
  const double nu = 0.5 * (n - 1);
  const double scale = eigenspace_dimension(n, k) / sphere_volume(n);
  return scale * gegenbauer(k, nu, cos_rho) / gegenbauer(k, nu, 1.0);
}

double XiKernel::eval_cos(double cos_rho) const {
  return xi_closed_form_cos(basis_.sphere_dim(), basis_.degree(), cos_rho);
}

double XiKernel::eval(double rho) const { return eval_cos(std::cos(rho)); }

double XiKernel::between(const SpherePoint& x, const SpherePoint& y) const {
  if (x.dim() != basis_.sphere_dim() || y.dim() != basis_.sphere_dim()) {
    throw std::invalid_argument("XiKernel: dimension mismatch");
  }
  return eval(geodesic_distance(x, y));
}

XiKernel make_xi(const Eigenbasis& basis) { return XiKernel(basis); }

double xi_second_derivative_check(const XiKernel& kernel) {
  const double h = 1e-3;
  const double f0 = kernel.eval(0.0);
  const double f1 = kernel.eval(h);
  const double f2 = kernel.eval(2.0 * h);
  // Even extension: Xi(-rho) = Xi(rho).
  const double second = (-2.0 * f2 + 32.0 * f1 - 30.0 * f0) / (12.0 * h * h);
  const double lambda = kernel.basis().eigenvalue();
  const int n = kernel.basis().sphere_dim();
  return std::abs(second + (lambda / n) * f0);
}

double heat_kernel_partial(const SpherePoint& x, const SpherePoint& y, double t, int k_max) {
  if (!(t > 0.0)) throw std::invalid_argument("heat_kernel_partial: t must be positive");
  if (x.dim() != y.dim()) throw std::invalid_argument("heat_kernel_partial: dimension mismatch");
  if (k_max < 0) throw std::invalid_argument("heat_kernel_partial: k_max must be non-negative");
  const int n = x.dim();
  const double c = std::clamp(x.ambient().dot(y.ambient()), -1.0, 1.0);
  double sum = 1.0 / sphere_volume(n);
  for (int k = 1; k <= k_max; ++k) {
    const double lambda = static_cast<double>(k * (k + n - 1));
    sum += std::exp(-lambda * t) * xi_closed_form_cos(n, k, c);
  }
  return sum;
}

Eigen::MatrixXd xi_matrix(const XiKernel& kernel, const std::vector<SpherePoint>& points) {
  const int p = static_cast<int>(points.size());
  Eigen::MatrixXd m(p, p);
  for (int j = 0; j < p; ++j) {
    m(j, j) = kernel.at_zero();
    for (int k = 0; k < j; ++k) m(j, k) = m(k, j) = kernel.between(points[j], points[k]);
  }
  return m;
}

GramDeterminant gram_det_check(const std::vector<SpherePoint>& points, const Eigenbasis& basis) {
  const int p = static_cast<int>(points.size());
  const int count = basis.size();
  if (p < 1 || p > 4) throw std::invalid_argument("gram_det_check: supports 1 to 4 points");
  if (count > 9) throw std::invalid_argument("gram_det_check: eigenspace too large for brute force");

  // values(i, j) = phi_i(m_j)
  Eigen::MatrixXd values(count, p);
  for (int j = 0; j < p; ++j) values.col(j) = basis.values(points[j].ambient());

  GramDeterminant out;
  out.lhs = xi_matrix(make_xi(basis), points).determinant();

  long tuples = 1;
  for (int j = 0; j < p; ++j) tuples *= count;
  double factorial = 1.0;
  for (int j = 2; j <= p; ++j) factorial *= j;

  double sum = 0.0;
  std::vector<int> index(p, 0);
  Eigen::MatrixXd minor(p, p);
  for (long flat = 0; flat < tuples; ++flat) {
    long rest = flat;
    for (int r = p - 1; r >= 0; --r) {
      index[r] = static_cast<int>(rest % count);
      rest /= count;
    }
    for (int r = 0; r < p; ++r) minor.row(r) = values.row(index[r]);
    const double d = minor.determinant();
    sum += d * d;
  }
  out.rhs = sum / factorial;
  return out;
}

}  // namespace hmindex
