#include "hmindex/conformal.hpp"

#include "hmindex/grid.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace hmindex {

namespace {

constexpr double kRankThreshold = 1e-6;
constexpr double kDeterminantThreshold = 1e-8;
constexpr int kMaxBasepointDraws = 100;

HomogeneousPolynomial combine(const Eigenbasis& basis, const SpherePoint& m) {
  const Eigen::VectorXd weights = basis.values(m.ambient());
  const auto& first = basis.polynomial(0);
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(first.coefficients().size());
  for (int i = 0; i < basis.size(); ++i) coeffs += weights[i] * basis.polynomial(i).coefficients();
  return HomogeneousPolynomial(first.vars(), first.degree(), coeffs);
}

}  // namespace

TestFunction::TestFunction(std::shared_ptr<const Eigenbasis> basis, SpherePoint basepoint)
    : basis_(std::move(basis)), basepoint_(std::move(basepoint)) {
  if (!basis_) throw std::invalid_argument("TestFunction: null basis");
  if (basepoint_.dim() != basis_->sphere_dim()) {
    throw std::invalid_argument("TestFunction: basepoint dimension mismatch");
  }
  poly_ = combine(*basis_, basepoint_);
}

TestFunction::TestFunction(std::shared_ptr<const Eigenbasis> basis, SpherePoint basepoint, HomogeneousPolynomial poly)
    : basis_(std::move(basis)), basepoint_(std::move(basepoint)), poly_(std::move(poly)) {}

TangentVec TestFunction::grad(const SpherePoint& y) const {
  if (y.dim() != sphere_dim()) throw std::invalid_argument("TestFunction::grad: dimension mismatch");
  return TangentVec::project(y, poly_.gradient(y.ambient()));
}

TestFunction TestFunction::scaled(double c) const { return TestFunction(basis_, basepoint_, poly_.scaled(c)); }

double geodesic_second_difference(const std::function<double(const Vec&)>& fn, const Vec& y, const Vec& v,
                                  double step) {
  const double plus = fn(ambient::exp(y, Vec(step * v)));
  const double minus = fn(ambient::exp(y, Vec(-step * v)));
  return (plus - 2.0 * fn(y) + minus) / (step * step);
}

TangentHessian fd_hessian(const std::function<double(const Vec&)>& fn, const Vec& y, double step) {
  TangentHessian out;
  out.frame = ambient::tangent_frame(y);
  const int n = static_cast<int>(out.frame.size());
  out.values.resize(n, n);
  for (int a = 0; a < n; ++a) {
    out.values(a, a) = geodesic_second_difference(fn, y, out.frame[a], step);
    for (int b = 0; b < a; ++b) {
      const Vec sum = out.frame[a] + out.frame[b];
      const Vec diff = out.frame[a] - out.frame[b];
      const double h = 0.25 * (geodesic_second_difference(fn, y, sum, step) -
                               geodesic_second_difference(fn, y, diff, step));
      out.values(a, b) = h;
      out.values(b, a) = h;
    }
  }
  return out;
}

double fd_laplacian(const std::function<double(const Vec&)>& fn, const Vec& y, double step) {
  double trace = 0.0;
  for (const Vec& e : ambient::tangent_frame(y)) trace += geodesic_second_difference(fn, y, e, step);
  return -trace;
}

double hessian_residual(const TestFunction& u, const SpherePoint& y) {
  if (y.dim() != u.sphere_dim()) throw std::invalid_argument("hessian_residual: dimension mismatch");
  const auto fn = [&u](const Vec& p) { return u.value(p); };
  const TangentHessian hess = fd_hessian(fn, y.ambient());
  const double shift = (u.eigenvalue() / u.sphere_dim()) * u.value(y.ambient());
  Mat residual = hess.values;
  residual.diagonal().array() += shift;
  return residual.cwiseAbs().maxCoeff();
}

double lie_derivative_metric(const TestFunction& u, const SpherePoint& y, const TangentVec& x, const TangentVec& w) {
  const Vec& p = y.ambient();
  if ((x.base().ambient() - p).norm() > 1e-12 || (w.base().ambient() - p).norm() > 1e-12) {
    throw std::invalid_argument("lie_derivative_metric: vectors are not based at y");
  }
  const auto fn = [&u](const Vec& q) { return u.value(q); };
  const Vec sum = x.vec() + w.vec();
  const Vec diff = x.vec() - w.vec();
  const double hess_xw = 0.25 * (geodesic_second_difference(fn, p, sum) - geodesic_second_difference(fn, p, diff));
  return 2.0 * hess_xw;
}

double conformality_residual(const TestFunction& u, const SpherePoint& y, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const TangentVec x = random_unit_tangent(y, rng);
  TangentVec w = random_unit_tangent(y, rng);
  Vec orth = w.vec() - x.vec().dot(w.vec()) * x.vec();
  while (orth.norm() < 1e-6) {
    w = random_unit_tangent(y, rng);
    orth = w.vec() - x.vec().dot(w.vec()) * x.vec();
  }
  orth.normalize();
  return std::abs(lie_derivative_metric(u, y, x, TangentVec::project(y, orth)));
}

bool basepoints_admissible(const Eigenbasis& basis, const std::vector<SpherePoint>& points) {
  const int n = basis.sphere_dim();
  if (static_cast<int>(points.size()) != n + 1) return false;
  Eigen::MatrixXd phi(basis.size(), n + 1);
  for (int j = 0; j <= n; ++j) {
    if (points[j].dim() != n) return false;
    phi.col(j) = basis.values(points[j].ambient());
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(phi);
  const auto& sv = svd.singularValues();
  if (sv.size() < n + 1 || sv[n] <= kRankThreshold) return false;
  return xi_matrix(make_xi(basis), points).determinant() > kDeterminantThreshold;
}

std::vector<SpherePoint> choose_basepoints(const Eigenbasis& basis, std::uint64_t seed) {
  const int n = basis.sphere_dim();
  if (basis.size() < n + 1) throw std::invalid_argument("choose_basepoints: eigenspace smaller than n+1");
  std::mt19937_64 rng(seed);
  for (int draw = 0; draw < kMaxBasepointDraws; ++draw) {
    std::vector<SpherePoint> points;
    for (int j = 0; j <= n; ++j) points.push_back(random_point(n, rng));
    if (basepoints_admissible(basis, points)) return points;
  }
  throw std::runtime_error("degenerate basepoint configuration");
}

FieldFamily build_family(std::shared_ptr<const Eigenbasis> basis, const std::vector<SpherePoint>& points,
                         int resolution) {
  if (!basis) throw std::invalid_argument("build_family: null basis");
  const int n = basis->sphere_dim();
  if (static_cast<int>(points.size()) != n + 1) {
    throw std::invalid_argument("build_family: expected n+1 basepoints");
  }
  FieldFamily family;
  family.basis = basis;
  family.points = points;
  family.resolution = resolution;
  for (const auto& p : points) family.functions.emplace_back(basis, p);

  const DomainGrid grid = make_grid(SphereDomain{n}, resolution);
  const int count = n + 1;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(count, count);
  std::vector<Vec> grads(count);
  for (const GridNode& node : grid.nodes()) {
    for (int j = 0; j < count; ++j) grads[j] = family.functions[j].gradient(node.position);
    for (int j = 0; j < count; ++j) {
      for (int k = 0; k <= j; ++k) gram(j, k) += node.weight * grads[j].dot(grads[k]);
    }
  }
  family.gram = gram.selfadjointView<Eigen::Lower>();

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(family.gram);
  if (eig.eigenvalues()[0] <= kDeterminantThreshold) {
    throw std::runtime_error("build_family: degenerate gradient Gram matrix");
  }
  return family;
}

}  // namespace hmindex
