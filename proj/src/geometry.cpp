#include "hmindex/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hmindex {

namespace {

constexpr double kUnitTolerance = 1e-12;
constexpr double kTangentTolerance = 1e-10;
constexpr double kSmallAngle = 1e-14;
// Antipodal detection for log/transport: 1 + <x,y> below this is treated as
// the cut locus.
constexpr double kAntipodalGap = 1e-12;

}  // namespace

SpherePoint::SpherePoint(Vec ambient) : ambient_(std::move(ambient)) {
  if (ambient_.size() < 3) {
    throw std::invalid_argument("SpherePoint: sphere dimension must be at least 2");
  }
  if (std::abs(ambient_.squaredNorm() - 1.0) > kUnitTolerance) {
    throw std::invalid_argument("SpherePoint: point is not on the unit sphere");
  }
}

SpherePoint SpherePoint::normalized(const Vec& v) {
  const double n = v.norm();
  if (n == 0.0) throw std::invalid_argument("SpherePoint: cannot normalize the zero vector");
  return SpherePoint(v / n);
}

SpherePoint SpherePoint::basis(int n, int index) {
  if (index < 0 || index > n) throw std::out_of_range("SpherePoint::basis: index out of range");
  Vec e = Vec::Zero(n + 1);
  e[index] = 1.0;
  return SpherePoint(e);
}

TangentVec::TangentVec(SpherePoint base, Vec vec) : base_(std::move(base)), vec_(std::move(vec)) {
  if (vec_.size() != base_.ambient().size()) {
    throw std::invalid_argument("TangentVec: dimension mismatch with base point");
  }
  if (std::abs(base_.ambient().dot(vec_)) > kTangentTolerance * std::max(1.0, vec_.norm())) {
    throw std::invalid_argument("TangentVec: vector is not tangent at its base point");
  }
}

TangentVec TangentVec::zero(const SpherePoint& x) {
  return TangentVec(x, Vec::Zero(x.ambient().size()));
}

TangentVec TangentVec::project(const SpherePoint& x, const Vec& v) {
  return TangentVec(x, ambient::tangent_part(x.ambient(), v));
}

namespace ambient {

double distance(const Vec& x, const Vec& y) {
  // atan2 form equals arccos(<x,y>) but keeps full precision near 0 and pi.
  const double c = std::clamp(x.dot(y), -1.0, 1.0);
  const double s = (y - c * x).norm();
  return std::clamp(std::atan2(s, c), 0.0, M_PI);
}

Vec exp(const Vec& x, const Vec& v) {
  const double t = v.norm();
  if (t < kSmallAngle) return x;
  Vec y = std::cos(t) * x + (std::sin(t) / t) * v;
  return y / y.norm();
}

Vec log(const Vec& x, const Vec& y) {
  const double c = x.dot(y);
  if (1.0 + c < kAntipodalGap) throw std::domain_error("log undefined: antipodal points");
  Vec perp = y - c * x;
  const double s = perp.norm();
  if (s < kSmallAngle) return Vec::Zero(x.size());
  const double theta = std::atan2(s, c);
  return (theta / s) * perp;
}

Vec transport(const Vec& x, const Vec& y, const Vec& v) {
  const double c = x.dot(y);
  if (1.0 + c < kAntipodalGap) throw std::domain_error("parallel transport undefined: antipodal points");
  return v - (v.dot(y) / (1.0 + c)) * (x + y);
}

std::vector<Vec> tangent_frame(const Vec& x) {
  const int dim = static_cast<int>(x.size());
  std::vector<Vec> frame;
  frame.reserve(dim - 1);
  // Skip the coordinate axis most aligned with x; the remaining projections
  // are then linearly independent.
  int skip = 0;
  x.cwiseAbs().maxCoeff(&skip);
  for (int i = 0; i < dim; ++i) {
    if (i == skip) continue;
    Vec e = Vec::Zero(dim);
    e[i] = 1.0;
    Vec v = e - x.dot(e) * x;
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vec& q : frame) v -= q.dot(v) * q;
    }
    frame.push_back(v / v.norm());
  }
  return frame;
}

}  // namespace ambient

namespace {

void require_same_dim(const SpherePoint& x, const SpherePoint& y, const char* what) {
  if (x.dim() != y.dim()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}

void require_based_at(const TangentVec& v, const SpherePoint& x, const char* what) {
  if (v.base().dim() != x.dim() || (v.base().ambient() - x.ambient()).norm() > kUnitTolerance) {
    throw std::invalid_argument(std::string(what) + ": tangent vector is not based at the given point");
  }
}

}  // namespace

double geodesic_distance(const SpherePoint& x, const SpherePoint& y) {
  require_same_dim(x, y, "geodesic_distance");
  return ambient::distance(x.ambient(), y.ambient());
}

SpherePoint exp_map(const SpherePoint& x, const TangentVec& v) {
  require_based_at(v, x, "exp_map");
  return SpherePoint(ambient::exp(x.ambient(), v.vec()));
}

TangentVec log_map(const SpherePoint& x, const SpherePoint& y) {
  require_same_dim(x, y, "log_map");
  return TangentVec(x, ambient::log(x.ambient(), y.ambient()));
}

TangentVec parallel_transport(const SpherePoint& x, const SpherePoint& y, const TangentVec& v) {
  require_same_dim(x, y, "parallel_transport");
  require_based_at(v, x, "parallel_transport");
  return TangentVec::project(y, ambient::transport(x.ambient(), y.ambient(), v.vec()));
}

double curvature_form(const TangentVec& x, const TangentVec& w1, const TangentVec& w2, double kappa) {
  if ((x.base().ambient() - w1.base().ambient()).norm() > kUnitTolerance ||
      (x.base().ambient() - w2.base().ambient()).norm() > kUnitTolerance) {
    throw std::invalid_argument("curvature_term: tangent vectors have different base points");
  }
  return ambient::curvature_form(x.vec(), w1.vec(), w2.vec(), kappa);
}

double curvature_term(const TangentVec& x, const TangentVec& w, double kappa) {
  return curvature_form(x, w, w, kappa);
}

SpherePoint random_point(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vec v(n + 1);
  do {
    for (int i = 0; i <= n; ++i) v[i] = normal(rng);
  } while (v.norm() < 1e-6);
  return SpherePoint::normalized(v);
}

TangentVec random_unit_tangent(const SpherePoint& x, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  const Vec& p = x.ambient();
  Vec v(p.size());
  do {
    for (int i = 0; i < v.size(); ++i) v[i] = normal(rng);
    v = ambient::tangent_part(p, v);
  } while (v.norm() < 1e-6);
  v.normalize();
  return TangentVec(x, ambient::tangent_part(p, v));
}

}  // namespace hmindex
