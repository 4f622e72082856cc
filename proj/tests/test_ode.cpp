#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cmslab/ode.hpp"
#include "cmslab/orthopoly.hpp"
#include "test_helpers.hpp"

using namespace cmslab;
using cmslab::testing::norm_sq;
using cmslab::testing::random_interior;
using cmslab::testing::sup_dist;
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

TEST_CASE("solve: worked values") {
  SolveConfig cfg;

  // Gap law s(t) = sqrt(s0^2 + 4t) with a fixed center.
  cfg.t_end = 1.0;
  auto traj = solve(make(Family::HermiteA, 2), {0.0, {-1.0, 1.0}}, cfg);
  CHECK(traj.back().coords[0] == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-8));
  CHECK(traj.back().coords[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));

  // Fully degenerate start follows sqrt(2t) times the Hermite zeros.
  traj = solve(make(Family::HermiteA, 2), {0.0, {0.0, 0.0}}, cfg);
  CHECK(std::abs(traj.back().coords[0] + 1.0) < 1e-6);
  CHECK(std::abs(traj.back().coords[1] - 1.0) < 1e-6);

  // Scalar Bessel-type flow x(t) = sqrt(2 nu t + x0^2) from the wall.
  cfg.t_end = 2.0;
  traj = solve(make(Family::LaguerreB, 1, 1.0), {0.0, {0.0}}, cfg);
  CHECK(traj.back().coords[0] == doctest::Approx(2.0).epsilon(1e-8));

  // Scalar linear Jacobi flow relaxes to (p-q)/(p+q), here from the wall x=1.
  cfg.t_end = 5.0;
  traj = solve(make(Family::JacobiCompact, 1, 1.0, 3.0, 2.0), {0.0, {1.0}}, cfg);
  CHECK(traj.back().coords[0] == doctest::Approx(0.2).epsilon(1e-8));
}

TEST_CASE("solve: sample-time validation and chamber membership") {
  SolveConfig cfg;
  cfg.t_end = 1.0;
  const ModelSpec m = make(Family::HermiteA, 2);
  CHECK_THROWS_AS(solve(m, {0.0, {-1.0, 1.0}}, cfg, std::vector<double>{-0.5}), InvalidParams);
  CHECK_THROWS_AS(solve(m, {0.0, {-1.0, 1.0}}, cfg, std::vector<double>{0.5, 0.5}), InvalidParams);
  CHECK_THROWS_AS(solve(m, {0.0, {1.0, -1.0}}, cfg), InvalidParams);

  auto traj = solve(m, {0.0, {-1.0, 1.0}}, cfg, std::vector<double>{0.25, 0.5, 0.75});
  REQUIRE(traj.samples.size() == 5);  // x0, three targets, t_end
  for (size_t i = 1; i < traj.samples.size(); ++i) {
    CHECK(traj.samples[i].time > traj.samples[i - 1].time);
    CHECK(in_chamber(m, traj.samples[i].coords));
  }
}

TEST_CASE("desingularize_start: cluster profiles") {
  const double delta = 1e-4;
  auto s = desingularize_start(make(Family::HermiteA, 2), {0.0, {3.0, 3.0}}, delta);
  CHECK(s.coords[0] == doctest::Approx(3.0 - std::sqrt(delta)).epsilon(1e-10));
  CHECK(s.coords[1] == doctest::Approx(3.0 + std::sqrt(delta)).epsilon(1e-10));
  CHECK(s.time == doctest::Approx(delta));

  s = desingularize_start(make(Family::LaguerreB, 1, 1.0), {0.0, {0.0}}, delta);
  CHECK(s.coords[0] == doctest::Approx(std::sqrt(2.0 * delta)).epsilon(1e-10));

  const ParticleState interior{0.0, {-1.0, 1.0}};
  s = desingularize_start(make(Family::HermiteA, 2), interior, delta);
  CHECK(s.coords == interior.coords);

  CHECK_THROWS_AS(desingularize_start(make(Family::HermiteA, 2), {0.0, {0.0, 0.0}}, -1.0),
                  InvalidParams);
}

TEST_CASE("self_similar: explicit solutions") {
  auto s = self_similar(make(Family::HermiteA, 2), 1.0);
  CHECK(s.coords[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(s.coords[1] == doctest::Approx(1.0).epsilon(1e-12));

  s = self_similar(make(Family::LaguerreB, 1, 1.0), 0.5);
  CHECK(s.coords[0] == doctest::Approx(1.0).epsilon(1e-12));

  s = self_similar(make(Family::Torus, 2), 0.0, pi / 4.0);
  CHECK(s.coords[0] == doctest::Approx(-pi / 4.0).epsilon(1e-12));
  CHECK(s.coords[1] == doctest::Approx(3.0 * pi / 4.0).epsilon(1e-12));

  // The compact Jacobi profile is the stationary configuration.
  const ModelSpec jac = make(Family::JacobiCompact, 3, 1.0, 4.0, 3.5);
  s = self_similar(jac, 0.0);
  auto v = drift(jac, s);
  for (double c : v) CHECK(std::abs(c) < 1e-9);

  CHECK_THROWS_AS(self_similar(make(Family::JacobiNoncompact, 2, 1.0, 3.0, 3.0), 1.0), Unsupported);
}

TEST_CASE("ou_transform_check: confined flow vs time-changed free flow") {
  SolveConfig cfg;
  const ModelSpec m1 = make(Family::HermiteA, 1);
  auto [d1, m1v] = ou_transform_check(m1, 2.0, {0.0, {0.7}}, 0.8, cfg);
  CHECK(d1.coords[0] == doctest::Approx(0.7 * std::exp(-1.6)).epsilon(1e-9));
  CHECK(m1v.coords[0] == doctest::Approx(0.7 * std::exp(-1.6)).epsilon(1e-9));

  const ModelSpec m2 = make(Family::HermiteA, 2);
  auto [direct, mapped] = ou_transform_check(m2, 1.0, {0.0, {-1.0, 1.0}}, 1.0, cfg);
  CHECK(sup_dist(direct.coords, mapped.coords) < 1e-8);

  auto [a, b] = ou_transform_check(m2, 1.0, {0.0, {-1.0, 1.0}}, 0.0, cfg);
  CHECK(a.coords == std::vector<double>{-1.0, 1.0});
  CHECK(b.coords == a.coords);
}

TEST_CASE("angular_transform: self-similar input has constant angular part") {
  const int n = 3;
  const ModelSpec m = make(Family::HermiteA, n);
  auto z = zeros(PolyFamily::Hermite, n, {}).zeros;
  const double nrm = std::sqrt(norm_sq(z));
  SolveConfig cfg;
  auto path = angular_transform(m, {0.0, z}, std::vector<double>{0.2, 0.5, 1.0}, cfg);
  REQUIRE(path.psi.size() == 3);
  for (const auto& psi : path.psi) {
    CHECK(std::abs(norm_sq(psi) - 1.0) < 1e-12);
    for (int i = 0; i < n; ++i) CHECK(psi[i] == doctest::Approx(z[i] / nrm).epsilon(1e-8));
  }
}

TEST_CASE("angular_transform: satisfies the confined unit-sphere flow") {
  const ModelSpec m = make(Family::HermiteA, 2);
  const ParticleState x0{0.0, {0.3, 1.1}};
  const double t = 0.4, h = 1e-4;
  SolveConfig cfg;
  auto path = angular_transform(m, x0, std::vector<double>{t - h, t, t + h}, cfg);
  REQUIRE(path.psi.size() == 3);
  auto rhs = stationary_drift(m, {t, path.psi[1]});  // canonical confinement rate
  for (int i = 0; i < 2; ++i) {
    const double fd = (path.psi[2][i] - path.psi[0][i]) / (2.0 * h);
    CHECK(std::abs(fd - rhs[i]) < 1e-6);
  }
  CHECK_THROWS_AS(
      angular_transform(make(Family::Torus, 2), x0, std::vector<double>{1.0}, cfg),
      InvalidParams);
}

TEST_CASE("norm laws along the free flows") {
  SolveConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  cfg.t_end = 10.0;
  std::vector<double> grid;
  for (int i = 1; i <= 20; ++i) grid.push_back(0.5 * i);

  const ModelSpec mh = make(Family::HermiteA, 3);
  ParticleState x0{0.0, random_interior(mh, RngStream{7, 0}, 0)};
  double n0 = norm_sq(x0.coords);
  auto traj = solve(mh, x0, cfg, grid);
  for (const auto& s : traj.samples)
    CHECK(std::abs(norm_sq(s.coords) - 6.0 * s.time - n0) < 1e-9 * (1.0 + n0));

  const ModelSpec ml = make(Family::LaguerreB, 3, 1.5);
  x0 = {0.0, random_interior(ml, RngStream{7, 0}, 1)};
  n0 = norm_sq(x0.coords);
  traj = solve(ml, x0, cfg, grid);
  for (const auto& s : traj.samples)
    CHECK(std::abs(norm_sq(s.coords) - 2.0 * 3.0 * 3.5 * s.time - n0) < 1e-9 * (1.0 + n0));
}

TEST_CASE("conserved sums along the flow") {
  SolveConfig cfg;
  cfg.t_end = 2.0;
  const ModelSpec mh = make(Family::HermiteA, 4);
  ParticleState x0{0.0, random_interior(mh, RngStream{8, 0}, 0)};
  const double sum0 = testing::coord_sum(x0.coords);
  auto traj = solve(mh, x0, cfg, std::vector<double>{0.5, 1.0, 1.5});
  for (const auto& s : traj.samples)
    CHECK(std::abs(testing::coord_sum(s.coords) - sum0) < 1e-10 * (1.0 + std::abs(sum0)));

  const ModelSpec mt = make(Family::Torus, 4);
  x0 = {0.0, random_interior(mt, RngStream{8, 0}, 1)};
  const double tsum0 = testing::coord_sum(x0.coords);
  traj = solve(mt, x0, cfg, std::vector<double>{0.5, 1.0, 1.5});
  for (const auto& s : traj.samples)
    CHECK(std::abs(testing::coord_sum(s.coords) - tsum0) < 1e-10 * (1.0 + std::abs(tsum0)));
}

TEST_CASE("torus flow converges to the equally spaced configuration") {
  const ModelSpec m = make(Family::Torus, 3);
  const ParticleState x0{0.0, random_interior(m, RngStream{9, 0}, 0)};
  SolveConfig cfg;
  cfg.t_end = 8.0;
  auto traj = solve(m, x0, cfg);
  auto target = self_similar(m, cfg.t_end, testing::coord_sum(x0.coords) / 3.0);
  CHECK(sup_dist(traj.back().coords, target.coords) < 1e-6);
}

TEST_CASE("paired free flows are contractive") {
  for (Family fam : {Family::HermiteA, Family::LaguerreB}) {
    const ModelSpec m = make(fam, 3, 1.5);
    const ParticleState a{0.0, random_interior(m, RngStream{10, 0}, 0)};
    const ParticleState b{0.0, random_interior(m, RngStream{10, 1}, 1)};
    SolveConfig cfg;
    cfg.t_end = 2.0;
    std::vector<double> grid;
    for (int i = 1; i <= 10; ++i) grid.push_back(0.2 * i);
    auto ta = solve(m, a, cfg, grid);
    auto tb = solve(m, b, cfg, grid);
    double prev = sup_dist(a.coords, b.coords) * 3.0;  // loose initial cap
    for (size_t i = 0; i < ta.samples.size(); ++i) {
      double d = 0.0;
      for (int j = 0; j < 3; ++j) {
        const double diff = ta.samples[i].coords[j] - tb.samples[i].coords[j];
        d += diff * diff;
      }
      d = std::sqrt(d);
      CHECK(d <= prev + 1e-12);
      prev = d;
    }
  }
}

TEST_CASE("boundary starts from every wall type stay consistent under delta refinement") {
  SolveConfig coarse, fine;
  coarse.t_end = fine.t_end = 0.5;
  coarse.desing_step = 1e-8;
  fine.desing_step = 1e-9;

  const ModelSpec mc = make(Family::JacobiCompact, 3, 1.0, 4.0, 3.5);
  const ParticleState wall_c{0.0, {-1.0, -1.0, 0.5}};
  CHECK(sup_dist(solve(mc, wall_c, coarse).back().coords,
                 solve(mc, wall_c, fine).back().coords) < 1e-6);

  const ModelSpec mn = make(Family::JacobiNoncompact, 3, 1.0, 4.0, 3.5);
  const ParticleState wall_n{0.0, {1.0, 1.0, 1.5}};
  CHECK(sup_dist(solve(mn, wall_n, coarse).back().coords,
                 solve(mn, wall_n, fine).back().coords) < 1e-6);
}
