#pragma once

// Explicit maps f: M^m -> S^n with analytic differentials, and the
// first-order functionals built on them.

#include "hmindex/geometry.hpp"
#include "hmindex/grid.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hmindex {

inline constexpr double kTensionStep = 1e-3;
inline constexpr double kSecondFormStep = 1e-3;

struct MapFlags {
  bool harmonic = false;
  bool minimal_immersion = false;
  bool isometric = false;
  bool totally_geodesic = false;
};

class ZooMap {
 public:
  using ValueFn = std::function<Vec(const Vec& position)>;
  using PushFn = std::function<Vec(const Vec& position, const Vec& v)>;
  /// II(e_a, e_b) in the node frame, row-major m x m.
  using SecondFormFn = std::function<std::vector<Vec>(const Vec& position)>;

  ZooMap(std::string name, DomainGrid grid, int target_dim, MapFlags flags, ValueFn value, PushFn push,
         SecondFormFn analytic_second_form = {});

  const std::string& name() const { return name_; }
  const DomainGrid& grid() const { return grid_; }
  int domain_dim() const { return grid_.dim(); }
  int target_dim() const { return target_dim_; }
  const MapFlags& flags() const { return flags_; }

  /// f at an arbitrary domain position.
  Vec value(const Vec& position) const { return value_(position); }
  /// df(v) at an arbitrary domain position.
  Vec push(const Vec& position, const Vec& v) const { return push_(position, v); }

  SpherePoint value_at(std::size_t node) const;
  /// Images df(e_a) of the g-orthonormal node frame.
  std::vector<TangentVec> differential_at(std::size_t node) const;
  /// Same as differential_at, as raw ambient vectors.
  std::vector<Vec> frame_images(std::size_t node) const;

  bool has_analytic_second_form() const { return static_cast<bool>(second_form_); }
  std::vector<Vec> analytic_second_form(std::size_t node) const;

 private:
  std::string name_;
  DomainGrid grid_;
  int target_dim_;
  MapFlags flags_;
  ValueFn value_;
  PushFn push_;
  SecondFormFn second_form_;
};

/// Tags: identity(n) / identityN, equator(m,n) / equatorMN,
/// clifford_torus / clifford, constant(n) / constantN.
/// Throws std::invalid_argument for unknown tags.
ZooMap make_zoo_map(const std::string& tag, int resolution);

/// The zoo tags exercised by the CLI and the acceptance suite.
std::vector<std::string> zoo_tags();

double energy_density(const ZooMap& f, std::size_t node);
double total_energy(const ZooMap& f);

/// max over nodes of |tau(f)|, trace of nabla df from geodesic second
/// differences projected to the target tangent space.
double tension_residual(const ZooMap& f, double step = kTensionStep);

struct TensionConvergence {
  double coarse_change = 0.0;  // max |T(h) - T(h/2)|
  double fine_change = 0.0;    // max |T(h/2) - T(h/4)|
  /// log2(coarse/fine); empty when the second differences are exact.
  std::optional<double> order;
};

/// Observed order of the second-difference trace under step halving,
/// estimated Richardson-style from three step sizes.
TensionConvergence tension_convergence(const ZooMap& f, double step = 1e-2);

struct StressReport {
  std::vector<double> s_min;  // per node, min eigenvalue of S_g(f) = e g - f*h
  std::vector<double> trace;  // per node, trace_g S_g(f)
  double global_min = 0.0;
};

StressReport stress_energy(const ZooMap& f);

/// Throws std::domain_error("not an immersion") if det f*h degenerates.
double volume(const ZooMap& f);

/// Orthonormal basis of df(T_x M) at an arbitrary position; the rank is the
/// number of singular directions above 1e-10.
std::vector<Vec> image_frame(const ZooMap& f, const Vec& position);

/// II(e_a, e_b) by geodesic finite differences, projected to the normal
/// space of f(M) inside T S^n. Row-major m x m.
std::vector<Vec> second_fundamental_tensor(const ZooMap& f, std::size_t node, double step = kSecondFormStep);

/// ||sigma(w)||^2 = sum_ab <II(e_a, e_b), w>^2 for w normal to df(T M).
/// Throws std::invalid_argument for non-normal w.
double second_fundamental_form(const ZooMap& f, std::size_t node, const TangentVec& w_normal);

/// Same quantity from the map's analytic second fundamental form, if any.
std::optional<double> second_fundamental_form_analytic(const ZooMap& f, std::size_t node,
                                                       const TangentVec& w_normal);

}  // namespace hmindex
