#include "hmindex/variation.hpp"

#include <doctest.h>

#include <cmath>

using namespace hmindex;

namespace {

FieldFamily family_on(int n, std::uint64_t seed, int resolution = 16) {
  auto basis = std::make_shared<const Eigenbasis>(make_eigenbasis(n, 1));
  return build_family(basis, choose_basepoints(*basis, seed), resolution);
}

std::vector<VariationField> gradient_fields(const ZooMap& f, const FieldFamily& family) {
  std::vector<VariationField> out;
  for (const auto& u : family.functions) out.push_back(restrict_field(u, f));
  return out;
}

}  // namespace

TEST_SUITE("variation") {
  TEST_CASE("Q on the identity of S^3 has the closed form -3 Xi") {
    const ZooMap f = make_zoo_map("identity3", 16);
    const FieldFamily family = family_on(3, 42);
    const Eigen::MatrixXd q = q_matrix(f, gradient_fields(f, family));
    const Eigen::MatrixXd expected = -3.0 * xi_matrix(make_xi(*family.basis), family.points);
    CHECK((q - expected).cwiseAbs().maxCoeff() < 1e-4);
    CHECK(q(0, 0) == doctest::Approx(-6.0 / (M_PI * M_PI)).epsilon(1e-5));
  }

  TEST_CASE("Q is symmetric and bilinear") {
    const ZooMap f = make_zoo_map("identity3", 10);
    const FieldFamily family = family_on(3, 5, 12);
    const auto w = gradient_fields(f, family);
    CHECK(q_form(f, w[0], w[1]) == doctest::Approx(q_form(f, w[1], w[0])).epsilon(1e-12));
    const VariationField combo = linear_combination(2.0, w[0], -1.0, w[1]);
    const double lhs = q_form(f, combo, w[2]);
    const double rhs = 2.0 * q_form(f, w[0], w[2]) - q_form(f, w[1], w[2]);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
    CHECK(q_form(f, w[0].scaled(3.0), w[0]) == doctest::Approx(3.0 * q_form(f, w[0], w[0])).epsilon(1e-10));
    CHECK(q_form(f, zero_field(f), w[0]) == 0.0);
  }

  TEST_CASE("Q requires a harmonic map") {
    // A map that is not flagged harmonic: a non-equatorial small sphere.
    const ZooMap base = make_zoo_map("equator23", 8);
    const double c = std::cos(0.4), s = std::sin(0.4);
    const ZooMap f("latitude", base.grid(), 3, MapFlags{},
                   [c, s](const Vec& p) {
                     Vec y(4);
                     y << c * p[0], c * p[1], c * p[2], s;
                     return y;
                   },
                   [c](const Vec&, const Vec& v) {
                     Vec y(4);
                     y << c * v[0], c * v[1], c * v[2], 0.0;
                     return y;
                   });
    const FieldFamily family = family_on(3, 1, 10);
    const auto w = gradient_fields(f, family);
    CHECK_THROWS_WITH_AS(q_form(f, w[0], w[0]), "Q_f defined for harmonic maps", std::invalid_argument);
    CHECK_THROWS_AS(h_form(f, w[0]), std::invalid_argument);
    const IndexCertificate cert = certify_energy_index(f, family);
    CHECK_FALSE(cert.accepted);
    CHECK(cert.certified_bound == 0);
  }

  TEST_CASE("covariant derivative of a parallel field vanishes") {
    // Along the equator, e_4 is parallel in S^3.
    const ZooMap f = make_zoo_map("equator23", 10);
    const VariationField e4(f, [](const Vec&) { return Vec(Vec::Unit(4, 3)); });
    for (std::size_t i = 0; i < f.grid().size(); i += 13) {
      for (const Vec& e : f.grid().frame_at(i)) {
        CHECK(covariant_derivative(f, e4, f.grid().node(i).position, e).norm() < 1e-10);
      }
    }
  }

  TEST_CASE("normal projection") {
    const ZooMap f = make_zoo_map("clifford", 10);
    const FieldFamily family = family_on(3, 3, 12);
    const VariationField w = normal_projection(f, restrict_field(family.functions[0], f));
    for (std::size_t i = 0; i < f.grid().size(); i += 7) {
      const Vec v = w(f.grid().node(i).position);
      for (const Vec& x : f.frame_images(i)) CHECK(std::abs(v.dot(x)) < 1e-12);
    }
    const ZooMap c = make_zoo_map("constant3", 8);
    const VariationField wc = normal_projection(c, restrict_field(family.functions[0], c));
    CHECK_THROWS_AS(wc(c.grid().node(0).position), std::domain_error);
  }

  TEST_CASE("H on the clifford torus") {
    const ZooMap f = make_zoo_map("clifford", 16);
    const FieldFamily family = family_on(3, 42);
    // For a normal field phi nu: H = int |grad phi|^2 - 2 phi^2 - 2 phi^2 = -2 int phi^2
    // whenever phi is a restricted degree-one function (|grad phi|^2 integrates to 2 int phi^2).
    const VariationField phi_nu(f, [&f](const Vec& p) {
      Vec nu(4);
      nu << std::cos(p[0]), std::sin(p[0]), -std::cos(p[1]), -std::sin(p[1]);
      nu /= std::sqrt(2.0);
      return Vec(f.value(p)[0] * nu);
    });
    double norm_sq = 0.0;
    for (const GridNode& node : f.grid().nodes()) norm_sq += node.weight * std::pow(f.value(node.position)[0], 2);
    CHECK(h_form(f, phi_nu) == doctest::Approx(-2.0 * norm_sq).epsilon(1e-5));

    const VariationField tangent = restrict_field(family.functions[0], f);
    CHECK_THROWS_AS(h_form(f, tangent), std::invalid_argument);
  }

  TEST_CASE("energy certificate for the identity of S^3") {
    const ZooMap f = make_zoo_map("identity3", 16);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const IndexCertificate cert = certify_energy_index(f, family_on(3, seed));
      CHECK(cert.accepted);
      CHECK(cert.hypotheses.lambda == 3.0);
      CHECK(cert.hypotheses.lambda_bound_ok);
      CHECK(cert.hypotheses.stress_min == doctest::Approx(0.5));
      CHECK(cert.negative_count == 4);
      CHECK(cert.certified_bound == 4);
      CHECK(cert.eigenvalues.back() < 0.0);
      for (double s : cert.bound_slack) CHECK(s >= -1e-6);
      CHECK(certificate_passes(cert));
    }
  }

  TEST_CASE("energy certificates decline with reasons") {
    const IndexCertificate id2 = certify_energy_index(make_zoo_map("identity2", 12), family_on(2, 1, 12));
    CHECK_FALSE(id2.accepted);
    CHECK(id2.certified_bound == 0);
    CHECK_FALSE(id2.declined_reasons.empty());
    const IndexCertificate eq = certify_energy_index(make_zoo_map("equator23", 12), family_on(3, 1, 12));
    CHECK_FALSE(eq.accepted);
    CHECK_FALSE(eq.hypotheses.stress_positive);
    CHECK(certificate_passes(eq));
    const IndexCertificate big_kappa = certify_energy_index(make_zoo_map("identity3", 10), family_on(3, 1, 12), 1.5);
    CHECK_FALSE(big_kappa.hypotheses.curvature_bound_ok);
    CHECK(big_kappa.certified_bound == 0);
    const IndexCertificate small_kappa = certify_energy_index(make_zoo_map("identity3", 10), family_on(3, 1, 12), 0.5);
    CHECK_FALSE(small_kappa.hypotheses.lambda_bound_ok);
    CHECK_THROWS_AS(certify_energy_index(make_zoo_map("identity2", 8), family_on(3, 1, 12)), std::invalid_argument);
  }

  TEST_CASE("volume certificates") {
    const FieldFamily family = family_on(3, 42);
    const IndexCertificate cl = certify_volume_index(make_zoo_map("clifford", 16), family);
    CHECK(cl.accepted);
    CHECK(cl.span_dim == 4);
    CHECK(cl.certified_bound == 4);
    CHECK(cl.eigenvalues.back() < 0.0);
    // Each projected field still has H < 0 under the degree-one closed form.
    for (double d : cl.diagonal_predicted) CHECK(d < 0.0);
    CHECK(certificate_passes(cl));

    const IndexCertificate eq = certify_volume_index(make_zoo_map("equator23", 12), family);
    CHECK_FALSE(eq.accepted);
    CHECK(eq.span_dim == 1);
    CHECK(eq.certified_bound == 0);
    CHECK(eq.hypotheses.totally_geodesic);

    const IndexCertificate c = certify_volume_index(make_zoo_map("constant3", 8), family);
    CHECK_FALSE(c.accepted);
    CHECK(c.span_dim == 0);
  }

  TEST_CASE("certificate serialization") {
    const IndexCertificate cert = certify_energy_index(make_zoo_map("identity3", 10), family_on(3, 1, 12));
    const auto j = certificate_to_json(cert);
    for (const char* key : {"kind", "hypotheses", "eigenvalues", "certified_bound", "thresholds", "resolution", "seed"}) {
      CHECK(j.contains(key));
    }
    const auto eig = j["eigenvalues"].get<std::vector<double>>();
    CHECK(std::is_sorted(eig.begin(), eig.end()));
    CHECK(j["kind"] == "energy");
  }
}
