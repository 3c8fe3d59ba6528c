#include "hmindex/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hmindex {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Ambient embedding of hyperspherical angles c = (theta_1..theta_{m-1}, phi):
// x_k = sin c_1 ... sin c_{k-1} cos c_k (k <= m), x_{m+1} = sin c_1 ... sin c_m.
Vec sphere_embedding(const Vec& c) {
  const int m = static_cast<int>(c.size());
  Vec x(m + 1);
  double prefix = 1.0;
  for (int k = 0; k < m; ++k) {
    x[k] = prefix * std::cos(c[k]);
    prefix *= std::sin(c[k]);
  }
  x[m] = prefix;
  return x;
}

// d x / d c_j, by replacing the j-th factor of each product with its derivative.
Vec sphere_embedding_derivative(const Vec& c, int j) {
  const int m = static_cast<int>(c.size());
  Vec d = Vec::Zero(m + 1);
  for (int k = 0; k <= m; ++k) {
    const int last = (k < m) ? k : m - 1;  // factors c_0..c_last involved
    if (j > last) continue;
    double value = 1.0;
    for (int i = 0; i < std::min(k, m); ++i) {
      value *= (i == j) ? std::cos(c[i]) : std::sin(c[i]);
    }
    if (k < m) value *= (k == j) ? -std::sin(c[k]) : std::cos(c[k]);
    d[k] = value;
  }
  return d;
}

void validate_manifold(const Manifold& m) {
  std::visit(Overloaded{
                 [](const SphereDomain& s) {
                   if (s.dim < 2 || s.dim > 6) throw std::invalid_argument("sphere domain dimension must be in [2, 6]");
                 },
                 [](const FlatTorusDomain& t) {
                   if (t.periods.empty() || t.periods.size() > 4) {
                     throw std::invalid_argument("torus domain dimension must be in [1, 4]");
                   }
                   if (!(t.scale > 0.0)) throw std::invalid_argument("torus metric scale must be positive");
                   for (double p : t.periods) {
                     if (!(p > 0.0)) throw std::invalid_argument("torus periods must be positive");
                   }
                 },
             },
             m);
}

}  // namespace

int manifold_dim(const Manifold& m) {
  return std::visit(Overloaded{
                        [](const SphereDomain& s) { return s.dim; },
                        [](const FlatTorusDomain& t) { return static_cast<int>(t.periods.size()); },
                    },
                    m);
}

std::string manifold_tag(const Manifold& m) {
  return std::visit(Overloaded{
                        [](const SphereDomain& s) { return "sphere(" + std::to_string(s.dim) + ")"; },
                        [](const FlatTorusDomain& t) {
                          return "torus(" + std::to_string(t.periods.size()) + ")";
                        },
                    },
                    m);
}

double manifold_inner(const Manifold& m, const Vec& a, const Vec& b) {
  return std::visit(Overloaded{
                        [&](const SphereDomain&) { return a.dot(b); },
                        [&](const FlatTorusDomain& t) { return t.scale * a.dot(b); },
                    },
                    m);
}

Vec manifold_geodesic(const Manifold& m, const Vec& position, const Vec& v, double t) {
  return std::visit(Overloaded{
                        [&](const SphereDomain&) { return ambient::exp(position, Vec(t * v)); },
                        [&](const FlatTorusDomain&) { return Vec(position + t * v); },
                    },
                    m);
}

std::vector<Vec> manifold_tangent_basis(const Manifold& m, const Vec& position) {
  return std::visit(Overloaded{
                        [&](const SphereDomain&) { return ambient::tangent_frame(position); },
                        [&](const FlatTorusDomain& t) {
                          const int dim = static_cast<int>(t.periods.size());
                          std::vector<Vec> basis;
                          for (int i = 0; i < dim; ++i) {
                            Vec e = Vec::Zero(dim);
                            e[i] = 1.0 / std::sqrt(t.scale);
                            basis.push_back(e);
                          }
                          return basis;
                        },
                    },
                    m);
}

DomainGrid::DomainGrid(Manifold manifold, int resolution, std::vector<GridNode> nodes)
    : manifold_(std::move(manifold)), resolution_(resolution), nodes_(std::move(nodes)) {}

std::vector<Vec> DomainGrid::coordinate_vectors(std::size_t i) const {
  const GridNode& n = nodes_.at(i);
  return std::visit(Overloaded{
                        [&](const SphereDomain& s) {
                          std::vector<Vec> out;
                          for (int j = 0; j < s.dim; ++j) out.push_back(sphere_embedding_derivative(n.chart, j));
                          return out;
                        },
                        [&](const FlatTorusDomain& t) {
                          const int dim = static_cast<int>(t.periods.size());
                          std::vector<Vec> out;
                          for (int j = 0; j < dim; ++j) {
                            Vec e = Vec::Zero(dim);
                            e[j] = 1.0;
                            out.push_back(e);
                          }
                          return out;
                        },
                    },
                    manifold_);
}

Mat DomainGrid::metric_at(std::size_t i) const {
  const auto coords = coordinate_vectors(i);
  const int m = dim();
  Mat g(m, m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) g(a, b) = manifold_inner(manifold_, coords[a], coords[b]);
  }
  return g;
}

std::vector<Vec> DomainGrid::frame_at(std::size_t i) const {
  std::vector<Vec> frame;
  for (Vec v : coordinate_vectors(i)) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vec& q : frame) v -= manifold_inner(manifold_, q, v) * q;
    }
    const double len = std::sqrt(manifold_inner(manifold_, v, v));
    if (len < 1e-12) throw std::runtime_error("DomainGrid: degenerate chart at grid node");
    frame.push_back(v / len);
  }
  return frame;
}

double DomainGrid::total_weight() const {
  // Kahan summation keeps the reduction order fixed and the error O(eps).
  double sum = 0.0, carry = 0.0;
  for (const GridNode& n : nodes_) {
    const double y = n.weight - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

GaussLegendreRule gauss_legendre(int count) {
  if (count < 1) throw std::invalid_argument("gauss_legendre: count must be positive");
  GaussLegendreRule rule;
  rule.nodes.resize(count);
  rule.weights.resize(count);
  for (int i = 0; i < (count + 1) / 2; ++i) {
    // Chebyshev-like initial guess, then Newton on P_count.
    double x = std::cos(M_PI * (i + 0.75) / (count + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= count; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (count == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = count * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= count; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = (count == 1) ? 1.0 : count * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[count - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[count - 1 - i] = w;
  }
  return rule;
}

double sphere_volume(int n) {
  return 2.0 * std::pow(M_PI, 0.5 * (n + 1)) / std::tgamma(0.5 * (n + 1));
}

DomainGrid make_grid(const Manifold& manifold, int resolution) {
  if (resolution < 8) throw std::invalid_argument("make_grid: resolution must be at least 8");
  validate_manifold(manifold);

  std::vector<GridNode> nodes;
  std::visit(
      Overloaded{
          [&](const SphereDomain& s) {
            const int m = s.dim;
            const int polar = m - 1;
            const int azimuth = 2 * resolution;
            const GaussLegendreRule gl = gauss_legendre(resolution);
            std::vector<double> theta(resolution), theta_w(resolution);
            for (int i = 0; i < resolution; ++i) {
              theta[i] = 0.5 * M_PI * (gl.nodes[i] + 1.0);
              theta_w[i] = 0.5 * M_PI * gl.weights[i];
            }
            std::size_t total = static_cast<std::size_t>(azimuth);
            for (int i = 0; i < polar; ++i) total *= static_cast<std::size_t>(resolution);
            nodes.reserve(total);

            std::vector<int> index(polar, 0);
            for (std::size_t flat = 0; flat < total / azimuth; ++flat) {
              std::size_t rest = flat;
              for (int i = polar - 1; i >= 0; --i) {
                index[i] = static_cast<int>(rest % resolution);
                rest /= resolution;
              }
              double polar_weight = 1.0;
              Vec chart(m);
              for (int i = 0; i < polar; ++i) {
                chart[i] = theta[index[i]];
                // dv = sin^{m-1} theta_1 sin^{m-2} theta_2 ... dtheta dphi
                polar_weight *= theta_w[index[i]] * std::pow(std::sin(chart[i]), m - 1 - i);
              }
              for (int a = 0; a < azimuth; ++a) {
                chart[m - 1] = 2.0 * M_PI * a / azimuth;
                GridNode node;
                node.chart = chart;
                node.position = sphere_embedding(chart);
                node.weight = polar_weight * (2.0 * M_PI / azimuth);
                nodes.push_back(std::move(node));
              }
            }
          },
          [&](const FlatTorusDomain& t) {
            const int m = static_cast<int>(t.periods.size());
            double cell = std::pow(t.scale, 0.5 * m);
            for (double p : t.periods) cell *= p / resolution;
            std::size_t total = 1;
            for (int i = 0; i < m; ++i) total *= static_cast<std::size_t>(resolution);
            nodes.reserve(total);
            for (std::size_t flat = 0; flat < total; ++flat) {
              std::size_t rest = flat;
              Vec chart(m);
              for (int i = m - 1; i >= 0; --i) {
                chart[i] = t.periods[i] * static_cast<double>(rest % resolution) / resolution;
                rest /= resolution;
              }
              nodes.push_back(GridNode{chart, chart, cell});
            }
          },
      },
      manifold);
  return DomainGrid(manifold, resolution, std::move(nodes));
}

}  // namespace hmindex
