// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "hmindex/cli.hpp"
#include "hmindex/conformal.hpp"
#include "hmindex/flow.hpp"
#include "hmindex/maps.hpp"
#include "hmindex/spectral.hpp"
#include "hmindex/variation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace hmindex;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

std::shared_ptr<const Eigenbasis> shared_basis(int n, int k) {
  return std::make_shared<const Eigenbasis>(make_eigenbasis(n, k));
}

FieldFamily family_on(int n, std::uint64_t seed, int resolution) {
  const auto basis = shared_basis(n, 1);
  return build_family(basis, choose_basepoints(*basis, seed), resolution);
}

Outcome quadrature_volumes() {
  const double s2 = std::abs(make_grid(SphereDomain{2}, 64).total_weight() - 4 * M_PI);
  const double s3 = std::abs(make_grid(SphereDomain{3}, 48).total_weight() - 2 * M_PI * M_PI);
  const double t = std::abs(make_grid(FlatTorusDomain{{2 * M_PI, 2 * M_PI}, 0.5}, 64).total_weight() - 2 * M_PI * M_PI);
  return {s2 <= 1e-10 && s3 <= 1e-8 && t <= 1e-10, fmt("S2 %.2e, S3 %.2e, torus %.2e", s2, s3, t)};
}

Outcome strong_harmonicity() {
  double worst = 0.0;
  for (auto [n, k] : {std::pair{2, 1}, std::pair{3, 1}, std::pair{2, 2}}) {
    const Eigenbasis basis = make_eigenbasis(n, k);
    std::mt19937_64 rng(2024 + 10 * n + k);
    for (int i = 0; i < 1000; ++i) {
      const SpherePoint x = random_point(n, rng);
      const SpherePoint y = random_point(n, rng);
      const double closed = xi_closed_form_cos(n, k, std::clamp(x.ambient().dot(y.ambient()), -1.0, 1.0));
      worst = std::max(worst, std::abs(closed - basis.values(x.ambient()).dot(basis.values(y.ambient()))));
    }
  }
  return {worst <= 1e-10, fmt("max error %.2e over 3000 pairs", worst)};
}

Outcome gram_determinants() {
  double worst = 0.0;
  for (int n : {2, 3}) {
    const Eigenbasis basis = make_eigenbasis(n, 1);
    const double xi0 = make_xi(basis).at_zero();
    std::mt19937_64 rng(77 + n);
    for (int p = 1; p <= 4; ++p) {
      std::vector<SpherePoint> pts;
      for (int j = 0; j < p; ++j) pts.push_back(random_point(n, rng));
      const GramDeterminant g = gram_det_check(pts, basis);
      worst = std::max(worst, std::abs(g.lhs - g.rhs) / std::max(std::abs(g.rhs), std::pow(xi0, p)));
    }
  }
  return {worst <= 1e-9, fmt("max relative error %.2e", worst)};
}

Outcome kernel_second_derivative() {
  double worst = 0.0;
  for (int n = 2; n <= kMaxSphereDim; ++n) {
    for (int k = 1; k <= kMaxDegree; ++k) worst = std::max(worst, xi_second_derivative_check(make_xi(make_eigenbasis(n, k))));
  }
  return {worst <= 1e-6, fmt("max residual %.2e over n=2..4, k=1..3", worst)};
}

Outcome hessian_identity() {
  double worst = 0.0;
  for (int n = 2; n <= 4; ++n) {
    const auto basis = shared_basis(n, 1);
    std::mt19937_64 rng(300 + n);
    std::vector<TestFunction> us;
    for (const auto& m : choose_basepoints(*basis, 42)) us.emplace_back(basis, m);
    for (int i = 0; i < 200; ++i) worst = std::max(worst, hessian_residual(us[i % us.size()], random_point(n, rng)));
  }
  const auto basis2 = shared_basis(2, 2);
  std::mt19937_64 rng(400);
  const TestFunction u2(basis2, random_point(2, rng));
  double xfail = 0.0;
  for (int i = 0; i < 200; ++i) xfail = std::max(xfail, hessian_residual(u2, random_point(2, rng)));
  return {worst <= 1e-6 && xfail > 0.1, fmt("degree 1 max %.2e; degree 2 on S2 XFAIL with %.3f", worst, xfail)};
}

Outcome conformality() {
  double worst = 0.0;
  for (int n = 2; n <= 4; ++n) {
    const auto basis = shared_basis(n, 1);
    std::mt19937_64 rng(500 + n);
    const auto pts = choose_basepoints(*basis, 42);
    for (int i = 0; i < 200; ++i) {
      const TestFunction u(basis, pts[i % pts.size()]);
      worst = std::max(worst, conformality_residual(u, random_point(n, rng), 9000 + i));
    }
  }
  return {worst <= 1e-6, fmt("max |L(X,Y)| %.2e over 200 pairs per sphere", worst)};
}

Outcome energy_certificate() {
  const ZooMap f = make_zoo_map("identity3", 32);
  bool ok = true;
  double worst_diff = 0.0;
  for (std::uint64_t seed : {42u, 1u, 2u, 3u, 4u}) {
    const FieldFamily fam = family_on(3, seed, 32);
    const IndexCertificate c = certify_energy_index(f, fam, 1.0);
    const Eigen::MatrixXd expected = -3.0 * xi_matrix(make_xi(*fam.basis), fam.points);
    const double diff = (c.q_matrix - expected).cwiseAbs().maxCoeff();
    worst_diff = std::max(worst_diff, diff);
    ok = ok && c.accepted && c.hypotheses.lambda == 3.0 && c.hypotheses.lambda_bound_ok &&
         std::abs(c.hypotheses.stress_min - 0.5) < 1e-10 && diff <= 1e-4 && c.eigenvalues.back() < 0.0 &&
         c.certified_bound == 4;
  }
  return {ok, fmt("bound 4 on 5 seeds, max |Q + 3 Xi| %.2e", worst_diff)};
}

Outcome bound_slack() {
  double worst = std::numeric_limits<double>::infinity();
  int checked = 0;
  for (const auto& tag : {"identity2", "identity3", "identity4", "equator23", "clifford", "constant3"}) {
    const ZooMap f = make_zoo_map(tag, std::string(tag) == "identity4" ? 16 : 24);
    if (!f.flags().harmonic) continue;
    const IndexCertificate c = certify_energy_index(f, family_on(f.target_dim(), 42, f.target_dim() == 4 ? 16 : 24));
    if (!c.accepted) continue;
    ++checked;
    for (double s : c.bound_slack) worst = std::min(worst, s);
  }
  return {checked >= 1 && worst >= -1e-6, fmt("min slack %.2e over %.0f accepted maps", worst, checked)};
}

Outcome volume_certificate() {
  const FieldFamily fam = family_on(3, 42, 32);
  const IndexCertificate cl = certify_volume_index(make_zoo_map("clifford", 32), fam);
  const IndexCertificate eq = certify_volume_index(make_zoo_map("equator23", 24), fam);
  bool eq_declined_geodesic = false;
  for (const auto& r : eq.declined_reasons) eq_declined_geodesic = eq_declined_geodesic || r.find("totally geodesic") != std::string::npos;
  const bool ok = cl.accepted && cl.span_dim == 4 && !cl.eigenvalues.empty() && cl.eigenvalues.back() < 0.0 &&
                  cl.certified_bound == 4 && !eq.accepted && eq.certified_bound == 0 && eq_declined_geodesic;
  return {ok, fmt("clifford span %.0f bound %.0f max eigenvalue %.3f; equator declined", cl.span_dim,
                  cl.certified_bound, cl.eigenvalues.empty() ? 0.0 : cl.eigenvalues.back())};
}

Outcome flow_monotonicity() {
  const FieldFamily fam = family_on(3, 42, 24);
  const ZooMap id3 = make_zoo_map("identity3", 16);
  const ZooMap cl = make_zoo_map("clifford", 32);
  bool ok = true;
  double energy_excess = -1.0, volume_excess = -1.0, pointwise = -1.0;
  for (const TestFunction& u : fam.functions) {
    const FlowSeries e = energy_series(id3, u, 1.0, 21);
    const FlowSeries v = volume_series(cl, u, 0.5, 21);
    const FlowSeries p1 = u_along_flow(id3, u, 1.0, 21);
    const FlowSeries p2 = u_along_flow(cl, u, 0.5, 21);
    energy_excess = std::max(energy_excess, e.worst_excess);
    volume_excess = std::max(volume_excess, v.worst_excess);
    pointwise = std::max({pointwise, p1.worst_excess, p2.worst_excess});
    ok = ok && e.verdict && v.verdict && p1.verdict && p2.verdict &&
         std::abs(e.values[0] - total_energy(id3)) <= 1e-10 && std::abs(v.values[0] - 2 * M_PI * M_PI) <= 1e-10;
  }
  return {ok, fmt("worst excess: energy %.2e, volume %.2e, pointwise %.2e", energy_excess, volume_excess, pointwise)};
}

Outcome tension() {
  double worst = 0.0, order = 1e9;
  for (const auto& tag : zoo_tags()) {
    const ZooMap f = make_zoo_map(tag, 24);
    if (!f.flags().harmonic) continue;
    worst = std::max(worst, tension_residual(f));
    const TensionConvergence c = tension_convergence(f);
    if (c.order) order = std::min(order, *c.order);
    else if (c.coarse_change != 0.0) order = 0.0;
  }
  return {worst <= 1e-5 && order >= 1.9, fmt("max |tau| %.2e, min observed order %.3f", worst, order)};
}

std::string read_tree(const fs::path& dir) {
  std::string all;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    all += p.filename().string() + "\n" + ss.str();
  }
  return all;
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "hmindex_acceptance_determinism";
  std::string runs[2];
  for (auto& r : runs) {
    fs::remove_all(dir);
    const std::string cmd = std::string(HMINDEX_CLI_PATH) + " report-all --resolution 12 --flow-resolution 10 --samples 5 --output " +
                            dir.string() + " > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, "report-all failed"};
    r = read_tree(dir);
  }
  return {runs[0] == runs[1] && !runs[0].empty(), fmt("two runs, %.0f bytes each", static_cast<double>(runs[0].size()))};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 geometry quadrature", quadrature_volumes},
      {"2 strong harmonicity", strong_harmonicity},
      {"3 gram determinant identity", gram_determinants},
      {"4 kernel second derivative", kernel_second_derivative},
      {"5 hessian identity", hessian_identity},
      {"6 conformality", conformality},
      {"7 energy-index certificate", energy_certificate},
      {"8 bound slack", bound_slack},
      {"9 volume-index certificate", volume_certificate},
      {"10 flow monotonicity", flow_monotonicity},
      {"11 tension residuals", tension},
      {"12 determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
