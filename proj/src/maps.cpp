#include "hmindex/maps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <regex>
#include <stdexcept>

namespace hmindex {

namespace {

constexpr double kImageRankThreshold = 1e-10;
constexpr double kNormalTolerance = 1e-10;
constexpr double kImmersionDetFloor = 1e-12;

Mat pullback_in_frame(const std::vector<Vec>& images) {
  const int m = static_cast<int>(images.size());
  Mat a(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) a(i, j) = images[i].dot(images[j]);
  }
  return a;
}

// Ambient second derivative of f along the domain geodesic through p with
// initial velocity v.
Vec second_difference(const ZooMap& f, const Vec& p, const Vec& v, const Vec& center, double step) {
  const Manifold& m = f.grid().manifold();
  const Vec plus = f.value(manifold_geodesic(m, p, v, step));
  const Vec minus = f.value(manifold_geodesic(m, p, v, -step));
  return (plus - 2.0 * center + minus) / (step * step);
}

Vec second_difference_trace(const ZooMap& f, std::size_t node, double step) {
  const Vec& p = f.grid().node(node).position;
  const Vec center = f.value(p);
  Vec trace = Vec::Zero(center.size());
  for (const Vec& e : f.grid().frame_at(node)) trace += second_difference(f, p, e, center, step);
  return trace;
}

ZooMap make_identity(int n, int resolution) {
  MapFlags flags;
  flags.harmonic = true;
  flags.isometric = true;
  flags.minimal_immersion = true;
  flags.totally_geodesic = true;
  return ZooMap(
      "identity(" + std::to_string(n) + ")", make_grid(SphereDomain{n}, resolution), n, flags,
      [](const Vec& p) { return p; }, [](const Vec&, const Vec& v) { return v; });
}

ZooMap make_equator(int m, int n, int resolution) {
  MapFlags flags;
  flags.harmonic = true;
  flags.isometric = true;
  flags.minimal_immersion = true;
  flags.totally_geodesic = true;
  auto pad = [n](const Vec& x) {
    Vec out = Vec::Zero(n + 1);
    out.head(x.size()) = x;
    return out;
  };
  return ZooMap(
      "equator(" + std::to_string(m) + "," + std::to_string(n) + ")", make_grid(SphereDomain{m}, resolution), n,
      flags, [pad](const Vec& p) { return pad(p); }, [pad](const Vec&, const Vec& v) { return pad(v); },
      [m, n](const Vec&) { return std::vector<Vec>(static_cast<std::size_t>(m * m), Vec::Zero(n + 1)); });
}

ZooMap make_clifford(int resolution) {
  MapFlags flags;
  flags.harmonic = true;
  flags.isometric = true;
  flags.minimal_immersion = true;
  flags.totally_geodesic = false;
  const double r = 1.0 / std::sqrt(2.0);
  FlatTorusDomain torus;
  torus.periods = {2.0 * M_PI, 2.0 * M_PI};
  torus.scale = 0.5;
  auto value = [r](const Vec& q) {
    Vec y(4);
    y << std::cos(q[0]), std::sin(q[0]), std::cos(q[1]), std::sin(q[1]);
    return Vec(r * y);
  };
  auto push = [r](const Vec& q, const Vec& v) {
    Vec y(4);
    y << -std::sin(q[0]) * v[0], std::cos(q[0]) * v[0], -std::sin(q[1]) * v[1], std::cos(q[1]) * v[1];
    return Vec(r * y);
  };
  // Principal curvatures -1, +1 along the unit u and v directions with
  // respect to nu = (cos u, sin u, -cos v, -sin v) / sqrt 2.
  auto second_form = [r](const Vec& q) {
    Vec nu(4);
    nu << std::cos(q[0]), std::sin(q[0]), -std::cos(q[1]), -std::sin(q[1]);
    nu *= r;
    return std::vector<Vec>{Vec(-nu), Vec::Zero(4), Vec::Zero(4), nu};
  };
  return ZooMap("clifford_torus", make_grid(torus, resolution), 3, flags, value, push, second_form);
}

ZooMap make_constant(int n, int resolution) {
  MapFlags flags;
  flags.harmonic = true;
  Vec point = Vec::Zero(n + 1);
  point[0] = 1.0;
  return ZooMap(
      "constant(" + std::to_string(n) + ")", make_grid(SphereDomain{n}, resolution), n, flags,
      [point](const Vec&) { return point; }, [n](const Vec&, const Vec&) { return Vec(Vec::Zero(n + 1)); });
}

}  // namespace

ZooMap::ZooMap(std::string name, DomainGrid grid, int target_dim, MapFlags flags, ValueFn value, PushFn push,
               SecondFormFn analytic_second_form)
    : name_(std::move(name)), grid_(std::move(grid)), target_dim_(target_dim), flags_(flags),
      value_(std::move(value)), push_(std::move(push)), second_form_(std::move(analytic_second_form)) {}

SpherePoint ZooMap::value_at(std::size_t node) const { return SpherePoint(value(grid_.node(node).position)); }

std::vector<Vec> ZooMap::frame_images(std::size_t node) const {
  const Vec& p = grid_.node(node).position;
  std::vector<Vec> out;
  for (const Vec& e : grid_.frame_at(node)) out.push_back(push(p, e));
  return out;
}

std::vector<TangentVec> ZooMap::differential_at(std::size_t node) const {
  const SpherePoint y = value_at(node);
  std::vector<TangentVec> out;
  for (const Vec& v : frame_images(node)) out.emplace_back(y, v);
  return out;
}

std::vector<Vec> ZooMap::analytic_second_form(std::size_t node) const {
  if (!second_form_) throw std::logic_error("ZooMap: no analytic second fundamental form");
  return second_form_(grid_.node(node).position);
}

ZooMap make_zoo_map(const std::string& tag, int resolution) {
  static const std::regex identity_re(R"(identity\(?(\d)\)?)");
  static const std::regex equator_re(R"(equator\(?(\d),?(\d)\)?)");
  static const std::regex constant_re(R"(constant\(?(\d)\)?)");
  std::smatch match;
  if (std::regex_match(tag, match, identity_re)) {
    const int n = std::stoi(match[1]);
    if (n < 2 || n > 4) throw std::invalid_argument("identity(n) requires 2 <= n <= 4");
    return make_identity(n, resolution);
  }
  if (std::regex_match(tag, match, equator_re)) {
    const int m = std::stoi(match[1]);
    const int n = std::stoi(match[2]);
    if (m < 2 || n <= m || n > 4) throw std::invalid_argument("equator(m,n) requires 2 <= m < n <= 4");
    return make_equator(m, n, resolution);
  }
  if (tag == "clifford_torus" || tag == "clifford") return make_clifford(resolution);
  if (std::regex_match(tag, match, constant_re)) {
    const int n = std::stoi(match[1]);
    if (n < 2 || n > 4) throw std::invalid_argument("constant(n) requires 2 <= n <= 4");
    return make_constant(n, resolution);
  }
  throw std::invalid_argument("unknown zoo map tag: " + tag);
}

std::vector<std::string> zoo_tags() { return {"identity2", "identity3", "equator23", "clifford", "constant3"}; }

double energy_density(const ZooMap& f, std::size_t node) {
  double sum = 0.0;
  for (const Vec& v : f.frame_images(node)) sum += v.squaredNorm();
  return 0.5 * sum;
}

double total_energy(const ZooMap& f) {
  double sum = 0.0;
  for (std::size_t i = 0; i < f.grid().size(); ++i) sum += f.grid().node(i).weight * energy_density(f, i);
  return sum;
}

double tension_residual(const ZooMap& f, double step) {
  double worst = 0.0;
  for (std::size_t i = 0; i < f.grid().size(); ++i) {
    const Vec y = f.value(f.grid().node(i).position);
    const Vec tau = ambient::tangent_part(y, second_difference_trace(f, i, step));
    worst = std::max(worst, tau.norm());
  }
  return worst;
}

TensionConvergence tension_convergence(const ZooMap& f, double step) {
  TensionConvergence out;
  for (std::size_t i = 0; i < f.grid().size(); ++i) {
    const Vec t1 = second_difference_trace(f, i, step);
    const Vec t2 = second_difference_trace(f, i, 0.5 * step);
    const Vec t4 = second_difference_trace(f, i, 0.25 * step);
    out.coarse_change = std::max(out.coarse_change, (t1 - t2).norm());
    out.fine_change = std::max(out.fine_change, (t2 - t4).norm());
  }
  if (out.coarse_change > 1e-13 && out.fine_change > 0.0) {
    out.order = std::log2(out.coarse_change / out.fine_change);
  }
  return out;
}

StressReport stress_energy(const ZooMap& f) {
  StressReport report;
  const std::size_t count = f.grid().size();
  report.s_min.resize(count);
  report.trace.resize(count);
  report.global_min = std::numeric_limits<double>::infinity();
  const int m = f.domain_dim();
  for (std::size_t i = 0; i < count; ++i) {
    const Mat pullback = pullback_in_frame(f.frame_images(i));
    const double e = 0.5 * pullback.trace();
    const Mat stress = e * Mat::Identity(m, m) - pullback;
    const Eigen::SelfAdjointEigenSolver<Mat> eig(stress, Eigen::EigenvaluesOnly);
    report.s_min[i] = eig.eigenvalues()[0];
    report.trace[i] = stress.trace();
    report.global_min = std::min(report.global_min, report.s_min[i]);
  }
  return report;
}

double volume(const ZooMap& f) {
  double sum = 0.0;
  for (std::size_t i = 0; i < f.grid().size(); ++i) {
    const double det = pullback_in_frame(f.frame_images(i)).determinant();
    if (!(det > kImmersionDetFloor)) throw std::domain_error("not an immersion");
    sum += f.grid().node(i).weight * std::sqrt(det);
  }
  return sum;
}

std::vector<Vec> image_frame(const ZooMap& f, const Vec& position) {
  const auto basis = manifold_tangent_basis(f.grid().manifold(), position);
  std::vector<Vec> out;
  double scale = 0.0;
  std::vector<Vec> images;
  for (const Vec& e : basis) {
    images.push_back(f.push(position, e));
    scale = std::max(scale, images.back().norm());
  }
  for (Vec v : images) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vec& q : out) v -= q.dot(v) * q;
    }
    const double len = v.norm();
    if (len > kImageRankThreshold * std::max(1.0, scale)) out.push_back(v / len);
  }
  return out;
}

std::vector<Vec> second_fundamental_tensor(const ZooMap& f, std::size_t node, double step) {
  const Vec& p = f.grid().node(node).position;
  const Vec center = f.value(p);
  const auto frame = f.grid().frame_at(node);
  const auto images = image_frame(f, p);
  const int m = static_cast<int>(frame.size());
  auto normal_part = [&](Vec v) {
    v = ambient::tangent_part(center, v);
    for (const Vec& q : images) v -= q.dot(v) * q;
    return v;
  };
  std::vector<Vec> second(static_cast<std::size_t>(m * m));
  for (int a = 0; a < m; ++a) {
    second[a * m + a] = normal_part(second_difference(f, p, frame[a], center, step));
    for (int b = 0; b < a; ++b) {
      const Vec sum = second_difference(f, p, Vec(frame[a] + frame[b]), center, step);
      const Vec diff = second_difference(f, p, Vec(frame[a] - frame[b]), center, step);
      const Vec mixed = normal_part(0.25 * (sum - diff));
      second[a * m + b] = mixed;
      second[b * m + a] = mixed;
    }
  }
  return second;
}

namespace {

void require_normal(const ZooMap& f, std::size_t node, const TangentVec& w) {
  const Vec& p = f.grid().node(node).position;
  const Vec y = f.value(p);
  if ((w.base().ambient() - y).norm() > 1e-12) {
    throw std::invalid_argument("second_fundamental_form: vector is not based at f(node)");
  }
  const double scale = std::max(1.0, w.norm());
  for (const Vec& q : image_frame(f, p)) {
    if (std::abs(q.dot(w.vec())) > kNormalTolerance * scale) {
      throw std::invalid_argument("second_fundamental_form: vector is not normal to the image");
    }
  }
}

double contract(const std::vector<Vec>& second, const Vec& w) {
  double sum = 0.0;
  for (const Vec& s : second) sum += std::pow(s.dot(w), 2);
  return sum;
}

}  // namespace

double second_fundamental_form(const ZooMap& f, std::size_t node, const TangentVec& w_normal) {
  require_normal(f, node, w_normal);
  return contract(second_fundamental_tensor(f, node), w_normal.vec());
}

std::optional<double> second_fundamental_form_analytic(const ZooMap& f, std::size_t node,
                                                       const TangentVec& w_normal) {
  if (!f.has_analytic_second_form()) return std::nullopt;
  require_normal(f, node, w_normal);
  return contract(f.analytic_second_form(node), w_normal.vec());
}

}  // namespace hmindex
