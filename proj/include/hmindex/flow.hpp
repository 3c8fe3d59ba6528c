#pragma once

// Conformal flows phi_t generated by w = -grad u on S^n, and the energy and
// volume of the composed maps phi_t o f.

#include "hmindex/conformal.hpp"
#include "hmindex/maps.hpp"

#include <string>
#include <vector>

namespace hmindex {

/// Largest RK4 step used by the series integrators.
inline constexpr double kFlowStep = 1e-2;
/// Domain step of the five-point stencil for d(phi_t o f).
inline constexpr double kFlowDifferentialStep = 1e-3;
inline constexpr double kEnergyStepTolerance = 1e-8;
inline constexpr double kVolumeRelativeTolerance = 1e-8;
inline constexpr double kPointwiseTolerance = 1e-12;

enum class SeriesKind { energy, volume, u_along_flow };

std::string series_kind_name(SeriesKind kind);

struct FlowSeries {
  SeriesKind kind = SeriesKind::energy;
  std::vector<double> times;   // strictly increasing, times[0] = 0
  std::vector<double> values;
  bool verdict = false;
  /// Largest violation of the monotonicity criterion (<= 0 when it holds).
  double worst_excess = 0.0;
  double tolerance = 0.0;
};

/// One RK4 step of dy/ds = -grad u(y), renormalized to the sphere.
Vec flow_step(const Vec& y, const TestFunction& u, double h);

/// Integrates to time t with ceil(t / step) equal RK4 steps. t = 0 returns y0.
SpherePoint flow_point(const SpherePoint& y0, const TestFunction& u, double t, double step = kFlowStep);

/// Equally spaced sample times 0, ..., t_max (samples >= 2).
std::vector<double> sample_times(double t_max, int samples);

/// E(phi_t o f); verdict: every step changes E by at most +1e-8.
FlowSeries energy_series(const ZooMap& f, const TestFunction& u, double t_max, int samples,
                         double step = kFlowStep);

/// V(phi_t o f); verdict: values[i] <= values[0] (1 + 1e-8).
FlowSeries volume_series(const ZooMap& f, const TestFunction& u, double t_max, int samples,
                         double step = kFlowStep);

/// int u(phi_t(f(x))) dv_g; verdict: u o phi_t non-increasing within 1e-12
/// at every grid node, not just in the integral.
FlowSeries u_along_flow(const ZooMap& f, const TestFunction& u, double t_max, int samples,
                        double step = kFlowStep);

/// Two-column CSV "t,value" followed by a "# verdict" line.
std::string series_to_csv(const FlowSeries& series);

}  // namespace hmindex
