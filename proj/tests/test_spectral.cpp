#include "hmindex/conformal.hpp"
#include "hmindex/grid.hpp"
#include "hmindex/spectral.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hmindex;

namespace {

const std::vector<std::pair<int, int>> kImplemented = {{2, 1}, {2, 2}, {2, 3}, {3, 1}, {3, 2},
                                                       {3, 3}, {4, 1}, {4, 2}, {4, 3}};

}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("eigenspace dimensions") {
    CHECK(eigenspace_dimension(2, 1) == 3);
    CHECK(eigenspace_dimension(2, 2) == 5);
    CHECK(eigenspace_dimension(3, 1) == 4);
    CHECK(eigenspace_dimension(3, 2) == 9);
    CHECK(eigenspace_dimension(4, 3) == 30);
    for (auto [n, k] : kImplemented) CHECK(make_eigenbasis(n, k).size() == eigenspace_dimension(n, k));
  }

  TEST_CASE("unsupported degree or dimension") {
    CHECK_THROWS_WITH_AS(make_eigenbasis(5, 1), "unsupported degree/dimension", std::invalid_argument);
    CHECK_THROWS_AS(make_eigenbasis(2, 4), std::invalid_argument);
    CHECK_THROWS_AS(make_eigenbasis(3, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_eigenbasis(1, 1), std::invalid_argument);
  }

  TEST_CASE("eigenvalues k(k+n-1)") {
    CHECK(make_eigenbasis(2, 1).eigenvalue() == 2.0);
    CHECK(make_eigenbasis(3, 1).eigenvalue() == 3.0);
    CHECK(make_eigenbasis(2, 2).eigenvalue() == 6.0);
    CHECK(make_eigenbasis(4, 3).eigenvalue() == 18.0);
  }

  TEST_CASE("basis is orthonormal under grid quadrature") {
    for (auto [n, k] : kImplemented) {
      const Eigenbasis basis = make_eigenbasis(n, k);
      const DomainGrid grid = make_grid(SphereDomain{n}, n == 4 ? 20 : 16);
      Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(basis.size(), basis.size());
      for (const GridNode& node : grid.nodes()) {
        const Eigen::VectorXd v = basis.values(node.position);
        gram += node.weight * v * v.transpose();
      }
      CAPTURE(n);
      CAPTURE(k);
      CHECK((gram - Eigen::MatrixXd::Identity(basis.size(), basis.size())).cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  TEST_CASE("basis functions are Laplace eigenfunctions") {
    std::mt19937_64 rng(5);
    for (auto [n, k] : kImplemented) {
      const Eigenbasis basis = make_eigenbasis(n, k);
      for (int i = 0; i < basis.size(); i += 2) {
        const SpherePoint y = random_point(n, rng);
        const auto fn = [&basis, i](const Vec& p) { return basis.polynomial(i).value(p); };
        const double lap = fd_laplacian(fn, y.ambient(), 1e-3);
        CHECK(lap == doctest::Approx(basis.eigenvalue() * basis.evaluate(i, y)).epsilon(1e-5).scale(1.0));
      }
    }
  }

  TEST_CASE("degree-one basis is proportional to the coordinates") {
    const Eigenbasis basis = make_eigenbasis(3, 1);
    std::mt19937_64 rng(1);
    const SpherePoint y = random_point(3, rng);
    CHECK(basis.values(y.ambient()).squaredNorm() == doctest::Approx(4.0 / (2 * M_PI * M_PI)));
  }

  TEST_CASE("gegenbauer recurrence") {
    CHECK(gegenbauer(0, 0.7, 0.3) == 1.0);
    CHECK(gegenbauer(1, 0.7, 0.3) == doctest::Approx(2 * 0.7 * 0.3));
    CHECK(gegenbauer(2, 0.7, 0.3) == doctest::Approx(2 * 0.7 * 1.7 * 0.09 - 0.7));
    // nu = 1/2 gives Legendre: P_3(t) = (5t^3 - 3t) / 2.
    CHECK(gegenbauer(3, 0.5, 0.4) == doctest::Approx((5 * 0.064 - 1.2) / 2));
  }

  TEST_CASE("kernel values at the diagonal") {
    CHECK(make_xi(make_eigenbasis(2, 1)).at_zero() == doctest::Approx(3.0 / (4 * M_PI)).epsilon(1e-14));
    CHECK(make_xi(make_eigenbasis(3, 1)).at_zero() == doctest::Approx(2.0 / (M_PI * M_PI)).epsilon(1e-14));
    CHECK(make_xi(make_eigenbasis(2, 2)).at_zero() == doctest::Approx(5.0 / (4 * M_PI)).epsilon(1e-14));
  }

  TEST_CASE("strong harmonicity on random pairs") {
    for (auto [n, k] : kImplemented) {
      const Eigenbasis basis = make_eigenbasis(n, k);
      const XiKernel xi = make_xi(basis);
      std::mt19937_64 rng(100 + n * 10 + k);
      double worst = 0.0;
      for (int i = 0; i < 200; ++i) {
        const SpherePoint x = random_point(n, rng);
        const SpherePoint y = random_point(n, rng);
        worst = std::max(worst, std::abs(xi.between(x, y) - basis.values(x.ambient()).dot(basis.values(y.ambient()))));
      }
      CAPTURE(n);
      CAPTURE(k);
      CHECK(worst <= 1e-10);
    }
  }

  TEST_CASE("kernel curvature at zero") {
    for (auto [n, k] : kImplemented) CHECK(xi_second_derivative_check(make_xi(make_eigenbasis(n, k))) <= 1e-6);
  }

  TEST_CASE("kernel dimension mismatch") {
    const XiKernel xi = make_xi(make_eigenbasis(3, 1));
    CHECK_THROWS_AS(xi.between(SpherePoint::basis(2, 0), SpherePoint::basis(2, 1)), std::invalid_argument);
  }

  TEST_CASE("heat kernel") {
    std::mt19937_64 rng(9);
    const SpherePoint x = random_point(2, rng);
    const SpherePoint y = random_point(2, rng);
    CHECK(heat_kernel_partial(x, y, 0.2) == doctest::Approx(heat_kernel_partial(y, x, 0.2)).epsilon(1e-14));
    CHECK(heat_kernel_partial(x, y, 50.0) == doctest::Approx(1.0 / (4 * M_PI)).epsilon(1e-12));
    CHECK(heat_kernel_partial(x, y, 0.2, 0) == doctest::Approx(1.0 / (4 * M_PI)));
    CHECK_THROWS_AS(heat_kernel_partial(x, y, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(heat_kernel_partial(x, SpherePoint::basis(3, 0), 1.0), std::invalid_argument);

    // Total mass one: every non-constant mode integrates to zero.
    const DomainGrid grid = make_grid(SphereDomain{2}, 32);
    double mass = 0.0;
    for (const GridNode& node : grid.nodes()) mass += node.weight * heat_kernel_partial(x, SpherePoint(node.position), 0.3);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));

    // Depends on distance only.
    const double rho = geodesic_distance(x, y);
    const SpherePoint z = exp_map(x, TangentVec(x, Vec(rho * random_unit_tangent(x, rng).vec())));
    CHECK(heat_kernel_partial(x, z, 0.2) == doctest::Approx(heat_kernel_partial(x, y, 0.2)).epsilon(1e-12));
  }

  TEST_CASE("gram determinant identity") {
    for (int n : {2, 3}) {
      const Eigenbasis basis = make_eigenbasis(n, 1);
      std::mt19937_64 rng(n);
      for (int p = 1; p <= 4; ++p) {
        std::vector<SpherePoint> pts;
        for (int j = 0; j < p; ++j) pts.push_back(random_point(n, rng));
        const GramDeterminant g = gram_det_check(pts, basis);
        const double scale = std::max(std::abs(g.rhs), std::pow(make_xi(basis).at_zero(), p));
        CAPTURE(p);
        CHECK(std::abs(g.lhs - g.rhs) / scale <= 1e-9);
        if (p > n + 1) CHECK(std::abs(g.lhs) / scale < 1e-12);
      }
    }
    const Eigenbasis s2 = make_eigenbasis(2, 1);
    const GramDeterminant single = gram_det_check({SpherePoint::basis(2, 0)}, s2);
    CHECK(single.lhs == doctest::Approx(3.0 / (4 * M_PI)));
    CHECK(single.rhs == doctest::Approx(3.0 / (4 * M_PI)));
  }

  TEST_CASE("gram determinant limits") {
    const Eigenbasis s2 = make_eigenbasis(2, 1);
    std::vector<SpherePoint> five(5, SpherePoint::basis(2, 0));
    CHECK_THROWS_AS(gram_det_check(five, s2), std::invalid_argument);
    CHECK_THROWS_AS(gram_det_check({}, s2), std::invalid_argument);
    CHECK_THROWS_AS(gram_det_check({SpherePoint::basis(4, 0)}, make_eigenbasis(4, 2)), std::invalid_argument);
  }

  TEST_CASE("kernel matrix is symmetric with Xi(0) on the diagonal") {
    std::mt19937_64 rng(4);
    std::vector<SpherePoint> pts;
    for (int j = 0; j < 4; ++j) pts.push_back(random_point(3, rng));
    const XiKernel xi = make_xi(make_eigenbasis(3, 1));
    const Eigen::MatrixXd m = xi_matrix(xi, pts);
    CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (int j = 0; j < 4; ++j) CHECK(m(j, j) == doctest::Approx(xi.at_zero()));
  }
}
