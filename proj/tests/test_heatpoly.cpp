#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>

#include "cmslab/heatpoly.hpp"
#include "cmslab/orthopoly.hpp"
#include "test_helpers.hpp"

using namespace cmslab;
using cmslab::testing::random_interior;
using std::numbers::pi;

namespace {

ModelSpec make(Family f, int n, double nu = 1.0, double p = 0.0, double q = 0.0) {
  ModelSpec m;
  m.family = f;
  m.n = n;
  m.nu = nu;
  m.p = p;
  m.q = q;
  return m;
}

}  // namespace

TEST_CASE("poly_from_roots: sign convention") {
  auto p = poly_from_roots(make(Family::HermiteA, 2), std::vector<double>{-1.0, 1.0});
  CHECK(p.coeffs[0].real() == doctest::Approx(-1.0));
  CHECK(std::abs(p.coeffs[1]) < 1e-15);
  CHECK(p.coeffs[2].real() == doctest::Approx(1.0));

  // Torus roots at angles (0, pi): w = (1, -1), e_1 = 0, e_2 = -1.
  p = poly_from_roots(make(Family::Torus, 2), std::vector<double>{0.0, pi});
  CHECK(p.coeffs[0].real() == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(p.coeffs[0].imag()) < 1e-12);
  CHECK(std::abs(p.coeffs[1]) < 1e-12);
}

TEST_CASE("roots_from_poly: round trips for every family, N <= 8") {
  const RngStream rng{21, 0};
  for (int n = 1; n <= 8; ++n) {
    for (Family fam : {Family::HermiteA, Family::LaguerreB, Family::JacobiCompact,
                       Family::JacobiNoncompact, Family::Torus}) {
      const ModelSpec m = make(fam, n, 1.5, n + 1.0, n + 2.0);
      auto x = random_interior(m, rng, 17 * n + static_cast<int>(fam));
      auto back = roots_from_poly(poly_from_roots(m, x));
      REQUIRE(back.size() == x.size());
      for (int i = 0; i < n; ++i) {
        double want = x[i];
        if (fam == Family::Torus && want > pi) want -= 2.0 * pi;  // arg convention
        if (fam == Family::Torus) {
          // Angles come back sorted in (-pi, pi]; compare as sets on the circle.
          double best = 10.0;
          for (double got : back)
            best = std::min(best, std::abs(std::polar(1.0, got) - std::polar(1.0, x[i])));
          CHECK(best < 1e-10);
        } else {
          CHECK(back[i] == doctest::Approx(want).epsilon(1e-10));
        }
      }
    }
  }
}

TEST_CASE("roots_from_poly: leaves of the chamber are detected") {
  PolyRep p;
  p.family = Family::HermiteA;
  p.coeffs = {1.0, 0.0, 1.0};  // z^2 + 1
  CHECK_THROWS_AS(roots_from_poly(p), NonRealRoots);

  p.family = Family::LaguerreB;
  p.coeffs = {1.0, 2.0, 1.0};  // (s+1)^2: negative squared coordinates
  CHECK_THROWS_AS(roots_from_poly(p), NonRealRoots);
}

TEST_CASE("operator_matrix: worked entries") {
  auto a = operator_matrix(make(Family::HermiteA, 2));
  CHECK(a(0, 2) == doctest::Approx(-1.0));
  CHECK(a.cwiseAbs().sum() == doctest::Approx(1.0));  // single nonzero entry

  a = operator_matrix(make(Family::Torus, 2));
  CHECK(a(0, 0) == doctest::Approx(0.0));
  CHECK(a(1, 1) == doctest::Approx(-1.0));
  CHECK(a(2, 2) == doctest::Approx(0.0));

  a = operator_matrix(make(Family::JacobiCompact, 1, 1.0, 3.0, 2.0));
  CHECK(a(0, 0) == doctest::Approx(-5.0));  // -(p+q)
  CHECK(a(0, 1) == doctest::Approx(-1.0));  // -(p-q)
  CHECK(a(1, 0) == doctest::Approx(0.0));
  CHECK(a(1, 1) == doctest::Approx(0.0));  // monic: top coefficient is frozen

  // The noncompact operator is exactly the negative of the compact one.
  auto ac = operator_matrix(make(Family::JacobiCompact, 3, 1.0, 4.0, 3.5));
  auto an = operator_matrix(make(Family::JacobiNoncompact, 3, 1.0, 4.0, 3.5));
  CHECK((ac + an).cwiseAbs().maxCoeff() < 1e-14);

  // Degree preservation: the monic top coefficient never moves.
  for (Family fam : {Family::HermiteA, Family::LaguerreB, Family::JacobiCompact,
                     Family::JacobiNoncompact, Family::Torus}) {
    auto op = operator_matrix(make(fam, 4, 1.5, 5.0, 6.0));
    CHECK(op.row(4).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("coefficient_flow: worked values") {
  const ModelSpec m = make(Family::HermiteA, 2);
  PolyRep p0 = poly_from_roots(m, std::vector<double>{-1.0, 1.0});
  auto pt = coefficient_flow(m, p0, 1.0);
  CHECK(pt.coeffs[0].real() == doctest::Approx(-2.0).epsilon(1e-12));  // z^2 - 2
  CHECK(std::abs(pt.coeffs[1]) < 1e-12);
  auto roots = roots_from_poly(pt);
  CHECK(roots[0] == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-10));

  auto same = coefficient_flow(m, p0, 0.0);
  CHECK(same.coeffs == p0.coeffs);

  // Torus diagonal law: e_l(t) = exp(-l(N-l)t) e_l(0).
  const ModelSpec mt = make(Family::Torus, 3);
  PolyRep q0 = poly_from_roots(mt, std::vector<double>{0.3, 1.4, 3.0});
  const double t = 0.7;
  auto qt = coefficient_flow(mt, q0, t);
  for (int mdeg = 0; mdeg <= 3; ++mdeg) {
    const int l = 3 - mdeg;  // coefficient of z^m carries e_l
    const std::complex<double> want = q0.coeffs[mdeg] * std::exp(-l * (3.0 - l) * t);
    CHECK(std::abs(qt.coeffs[mdeg] - want) < 1e-12);
  }
}

TEST_CASE("heat-polynomial basis coordinates are constant in time") {
  const int n = 3;
  const ModelSpec m = make(Family::HermiteA, n);
  PolyRep p0 = poly_from_roots(m, std::vector<double>{-1.1, 0.2, 1.4});

  auto expand = [&](double t) {
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(n + 1, n + 1);
    for (int l = 0; l <= n; ++l) {
      auto c = hermite_heat_poly_coeffs(l, t);
      for (int mm = 0; mm <= l; ++mm) basis(mm, l) = c[mm];
    }
    Eigen::VectorXd rhs(n + 1);
    auto pt = coefficient_flow(m, p0, t);
    for (int mm = 0; mm <= n; ++mm) rhs(mm) = pt.coeffs[mm].real();
    return Eigen::VectorXd(basis.fullPivLu().solve(rhs));
  };

  auto a1 = expand(0.3);
  auto a2 = expand(0.7);
  CHECK((a1 - a2).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("Jacobi potential term is forced by monicity") {
  const int n = 2;
  const ModelSpec m = make(Family::JacobiCompact, n, 1.0, 3.0, 2.5);
  auto a = operator_matrix(m);
  const double potential = n * (m.p + m.q - n + 1.0);
  Eigen::MatrixXd without = a + potential * Eigen::MatrixXd::Identity(n + 1, n + 1);
  Eigen::VectorXd monic(n + 1);
  monic << 0.3, -0.1, 1.0;
  CHECK(std::abs((without * monic)(n)) > 0.1);  // degree-N coefficient would drift
}

TEST_CASE("heat_polynomial: worked values") {
  CHECK(heat_polynomial(Family::HermiteA, 1, 0.3, 1.7) == doctest::Approx(2.0 * 1.7));
  CHECK(heat_polynomial(Family::HermiteA, 2, 1.0, 0.0) == doctest::Approx(-4.0));

  // Consistency with the scaled classical polynomial for t > 0.
  const double t = 0.4, z = 0.9;
  CHECK(heat_polynomial(Family::HermiteA, 4, t, z) ==
        doctest::Approx(std::pow(2.0 * t, 2.0) *
                        eval_classical(PolyFamily::Hermite, 4, {}, z / std::sqrt(2.0 * t)))
            .epsilon(1e-12));

  // Bessel-type degree 1 with nu = 1 is z^2 - 2t; vanishes on z = sqrt(2t).
  CHECK(std::abs(heat_polynomial(Family::LaguerreB, 1, t, std::sqrt(2.0 * t), 1.0)) < 1e-12);

  // Product form over scaled Laguerre zeros.
  const double nu = 1.5;
  auto zl = zeros(PolyFamily::Laguerre, 2, {nu - 1.0, 0.0}).zeros;
  const double want = (z * z - 2.0 * t * zl[0]) * (z * z - 2.0 * t * zl[1]);
  CHECK(heat_polynomial(Family::LaguerreB, 2, t, z, nu) == doctest::Approx(want).epsilon(1e-12));

  CHECK_THROWS_AS(heat_polynomial(Family::HermiteA, 2, 0.0, 1.0), InvalidParams);
  CHECK_THROWS_AS(heat_polynomial(Family::Torus, 2, 1.0, 1.0), Unsupported);
}

TEST_CASE("pde_residual: consistency and sensitivity") {
  // Single particle: constant root, vanishing second derivative.
  const ModelSpec m1 = make(Family::HermiteA, 1);
  Trajectory flat{m1, {}, {}, {}};
  for (double t : {0.0999, 0.1, 0.1001}) flat.samples.push_back({t, {0.4}});
  CHECK(pde_residual(flat) < 1e-12);

  // Genuine N=2 solution.
  const ModelSpec m2 = make(Family::HermiteA, 2);
  SolveConfig cfg;
  const double h = 1e-4;
  std::vector<double> grid;
  for (double tc : {0.1, 0.5, 1.0}) {
    grid.push_back(tc - h);
    grid.push_back(tc);
    grid.push_back(tc + h);
  }
  cfg.t_end = grid.back();
  auto traj = solve(m2, {0.0, {-0.8, 0.7}}, cfg, grid);
  double worst = 0.0;
  for (size_t i = 1; i + 2 < traj.samples.size(); i += 3) {
    Trajectory triple{traj.model, {traj.samples[i], traj.samples[i + 1], traj.samples[i + 2]},
                      traj.config, traj.stats};
    worst = std::max(worst, pde_residual(triple));
  }
  CHECK(worst < 1e-6);

  // A perturbed middle sample breaks the equation.
  Trajectory broken{traj.model, {traj.samples[1], traj.samples[2], traj.samples[3]},
                    traj.config, traj.stats};
  broken.samples[1].coords[1] += 1e-3;
  CHECK(pde_residual(broken) > 1e-2);
}

TEST_CASE("elementary_symmetric") {
  auto e = elementary_symmetric(std::span<const double>(std::vector<double>{1.0, 2.0, 3.0}));
  CHECK(e[0] == doctest::Approx(1.0));
  CHECK(e[1] == doctest::Approx(6.0));
  CHECK(e[2] == doctest::Approx(11.0));
  CHECK(e[3] == doctest::Approx(6.0));
}
