#pragma once

// Quadrature grids on the source manifold M^m.

#include "hmindex/geometry.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace hmindex {

/// Round S^m, charted by hyperspherical angles (theta_1..theta_{m-1}, phi).
/// Positions are ambient points of R^{m+1}.
struct SphereDomain {
  int dim = 2;
};

/// Flat torus R^m / (periods) with metric scale * Id. Positions equal chart
/// coordinates.
struct FlatTorusDomain {
  std::vector<double> periods{2.0 * M_PI, 2.0 * M_PI};
  double scale = 1.0;
};

using Manifold = std::variant<SphereDomain, FlatTorusDomain>;

int manifold_dim(const Manifold& m);
std::string manifold_tag(const Manifold& m);

/// Riemannian inner product of two position-space tangent vectors.
double manifold_inner(const Manifold& m, const Vec& a, const Vec& b);
/// Geodesic from `position` with initial velocity v, evaluated at time t.
Vec manifold_geodesic(const Manifold& m, const Vec& position, const Vec& v, double t);
/// Some g-orthonormal basis of the tangent space at an arbitrary position.
std::vector<Vec> manifold_tangent_basis(const Manifold& m, const Vec& position);

struct GridNode {
  Vec chart;     // chart coordinates
  Vec position;  // ambient point (sphere) or chart point (torus)
  double weight = 0.0;  // includes the metric volume factor
};

class DomainGrid {
 public:
  DomainGrid(Manifold manifold, int resolution, std::vector<GridNode> nodes);

  const Manifold& manifold() const { return manifold_; }
  int dim() const { return manifold_dim(manifold_); }
  int resolution() const { return resolution_; }
  std::size_t size() const { return nodes_.size(); }
  const GridNode& node(std::size_t i) const { return nodes_[i]; }
  const std::vector<GridNode>& nodes() const { return nodes_; }

  /// Chart metric g at node i (symmetric positive definite, m x m).
  Mat metric_at(std::size_t i) const;
  /// Chart coordinate vectors at node i, expressed in position space.
  std::vector<Vec> coordinate_vectors(std::size_t i) const;
  /// g-orthonormal frame at node i: Gram-Schmidt on the coordinate vectors.
  std::vector<Vec> frame_at(std::size_t i) const;

  double total_weight() const;

 private:
  Manifold manifold_;
  int resolution_;
  std::vector<GridNode> nodes_;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendreRule gauss_legendre(int count);

/// Sphere: Gauss-Legendre in every polar angle on [0, pi] with `resolution`
/// nodes and a 2*resolution-point trapezoid in the azimuth. Torus: uniform
/// resolution^m product grid. Throws for resolution < 8.
DomainGrid make_grid(const Manifold& manifold, int resolution);

/// Closed-form Vol(S^n) = 2 pi^{(n+1)/2} / Gamma((n+1)/2).
double sphere_volume(int n);

}  // namespace hmindex
