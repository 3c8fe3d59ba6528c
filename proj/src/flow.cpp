#include "hmindex/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace hmindex {

namespace {

int step_count(double t, double step) {
  if (step <= 0.0) throw std::invalid_argument("flow: step must be positive");
  if (t < 0.0) throw std::invalid_argument("flow: t must be nonnegative");
  return std::max(1, static_cast<int>(std::ceil(t / step - 1e-9)));
}

// Five-point stencil offsets in units of the domain step (center stored
// separately).
constexpr double kOffsets[4] = {-2.0, -1.0, 1.0, 2.0};

// For one domain node, the images under phi_t o f of the center and the
// stencil points along each frame direction.
struct NodeStencil {
  std::vector<Vec> points;  // 1 + 4 m
  int dim = 0;
};

NodeStencil make_stencil(const ZooMap& f, std::size_t node) {
  const Manifold& m = f.grid().manifold();
  const Vec& p = f.grid().node(node).position;
  NodeStencil s;
  s.dim = f.domain_dim();
  s.points.push_back(f.value(p));
  for (const Vec& e : f.grid().frame_at(node)) {
    for (double o : kOffsets) s.points.push_back(f.value(manifold_geodesic(m, p, e, o * kFlowDifferentialStep)));
  }
  return s;
}

Mat stencil_pullback(const NodeStencil& s) {
  std::vector<Vec> d(s.dim);
  for (int a = 0; a < s.dim; ++a) {
    const Vec* p = &s.points[1 + 4 * a];
    // Symmetric differences first, so a locally constant map gives exactly 0.
    d[a] = (8.0 * (p[2] - p[1]) - (p[3] - p[0])) / (12.0 * kFlowDifferentialStep);
  }
  Mat g(s.dim, s.dim);
  for (int a = 0; a < s.dim; ++a) {
    for (int b = 0; b < s.dim; ++b) g(a, b) = d[a].dot(d[b]);
  }
  return g;
}

void advance(NodeStencil& s, const TestFunction& u, double h, int steps) {
  for (Vec& y : s.points) {
    for (int i = 0; i < steps; ++i) y = flow_step(y, u, h);
  }
}

template <typename Functional>
std::vector<double> integrate_series(const ZooMap& f, const TestFunction& u, const std::vector<double>& times,
                                     double step, Functional functional) {
  if (u.sphere_dim() != f.target_dim()) throw std::invalid_argument("flow: target dimension mismatch");
  std::vector<double> values(times.size(), 0.0);
  const double interval = times.size() > 1 ? times[1] - times[0] : 0.0;
  const int steps = step_count(interval, step);
  const double h = interval / steps;
  for (std::size_t i = 0; i < f.grid().size(); ++i) {
    NodeStencil s = make_stencil(f, i);
    const double w = f.grid().node(i).weight;
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (k > 0) advance(s, u, h, steps);
      values[k] += w * functional(s);
    }
  }
  return values;
}

}  // namespace

std::string series_kind_name(SeriesKind kind) {
  switch (kind) {
    case SeriesKind::energy:
      return "energy";
    case SeriesKind::volume:
      return "volume";
    case SeriesKind::u_along_flow:
      return "u_along_flow";
  }
  return "unknown";
}

Vec flow_step(const Vec& y, const TestFunction& u, double h) {
  const auto field = [&u](const Vec& p) { return Vec(-u.gradient(p)); };
  const Vec k1 = field(y);
  const Vec k2 = field(Vec(y + 0.5 * h * k1));
  const Vec k3 = field(Vec(y + 0.5 * h * k2));
  const Vec k4 = field(Vec(y + h * k3));
  const Vec next = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  return next / next.norm();
}

SpherePoint flow_point(const SpherePoint& y0, const TestFunction& u, double t, double step) {
  if (y0.dim() != u.sphere_dim()) throw std::invalid_argument("flow_point: dimension mismatch");
  if (t == 0.0) {
    step_count(t, step);
    return y0;
  }
  const int steps = step_count(t, step);
  const double h = t / steps;
  Vec y = y0.ambient();
  for (int i = 0; i < steps; ++i) y = flow_step(y, u, h);
  return SpherePoint(y);
}

std::vector<double> sample_times(double t_max, int samples) {
  if (samples < 2) throw std::invalid_argument("sample_times: need at least two samples");
  if (!(t_max > 0.0)) throw std::invalid_argument("sample_times: t_max must be positive");
  std::vector<double> times(samples);
  for (int i = 0; i < samples; ++i) times[i] = t_max * i / (samples - 1);
  return times;
}

FlowSeries energy_series(const ZooMap& f, const TestFunction& u, double t_max, int samples, double step) {
  FlowSeries series;
  series.kind = SeriesKind::energy;
  series.tolerance = kEnergyStepTolerance;
  series.times = sample_times(t_max, samples);
  series.values = integrate_series(f, u, series.times, step, [](const NodeStencil& s) {
    return 0.5 * stencil_pullback(s).trace();
  });
  series.worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < series.values.size(); ++k) {
    series.worst_excess = std::max(series.worst_excess, series.values[k] - series.values[k - 1] - series.tolerance);
  }
  series.verdict = series.worst_excess <= 0.0;
  return series;
}

FlowSeries volume_series(const ZooMap& f, const TestFunction& u, double t_max, int samples, double step) {
  FlowSeries series;
  series.kind = SeriesKind::volume;
  series.tolerance = kVolumeRelativeTolerance;
  series.times = sample_times(t_max, samples);
  series.values = integrate_series(f, u, series.times, step, [](const NodeStencil& s) {
    return std::sqrt(std::max(0.0, stencil_pullback(s).determinant()));
  });
  const double cap = series.values[0] * (1.0 + series.tolerance);
  series.worst_excess = -std::numeric_limits<double>::infinity();
  for (double v : series.values) series.worst_excess = std::max(series.worst_excess, v - cap);
  series.verdict = series.worst_excess <= 0.0;
  return series;
}

FlowSeries u_along_flow(const ZooMap& f, const TestFunction& u, double t_max, int samples, double step) {
  if (u.sphere_dim() != f.target_dim()) throw std::invalid_argument("flow: target dimension mismatch");
  FlowSeries series;
  series.kind = SeriesKind::u_along_flow;
  series.tolerance = kPointwiseTolerance;
  series.times = sample_times(t_max, samples);
  series.values.assign(series.times.size(), 0.0);
  const double interval = series.times[1] - series.times[0];
  const int steps = step_count(interval, step);
  const double h = interval / steps;
  series.worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.grid().size(); ++i) {
    const GridNode& node = f.grid().node(i);
    Vec y = f.value(node.position);
    double previous = u.value(y);
    series.values[0] += node.weight * previous;
    for (std::size_t k = 1; k < series.times.size(); ++k) {
      for (int s = 0; s < steps; ++s) y = flow_step(y, u, h);
      const double current = u.value(y);
      series.worst_excess = std::max(series.worst_excess, current - previous - series.tolerance);
      series.values[k] += node.weight * current;
      previous = current;
    }
  }
  series.verdict = series.worst_excess <= 0.0;
  return series;
}

std::string series_to_csv(const FlowSeries& series) {
  std::string out = "t,value\n";
  char line[96];
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    std::snprintf(line, sizeof line, "%.17g,%.17g\n", series.times[k], series.values[k]);
    out += line;
  }
  std::snprintf(line, sizeof line, "# kind: %s\n", series_kind_name(series.kind).c_str());
  out += line;
  std::snprintf(line, sizeof line, "# worst_excess: %.17g\n", series.worst_excess);
  out += line;
  out += series.verdict ? "# verdict: PASS\n" : "# verdict: FAIL\n";
  return out;
}

}  // namespace hmindex
