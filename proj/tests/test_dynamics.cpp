#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

#include "dampdyn/dynamics.hpp"

#include <cmath>

using namespace dampdyn;
using testsupport::Gen;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

// Root of s + a·s² = b on [0, b] by bisection.
double bisect_quadratic(double a, double b) {
  double lo = 0.0, hi = b;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (mid + a * mid * mid < b ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double tail_max_speed(const Trajectory& tr, double from) {
  double m = 0.0;
  for (std::size_t k = 0; k < tr.size(); ++k)
    if (tr.t[k] >= from) m = std::max(m, tr.v[k].norm());
  return m;
}

Trajectory run(System sys, const ProblemCatalogEntry& e, Vec x0, Vec v0, double h, double T,
               double t0 = 0.0) {
  DynamicsSpec spec{std::move(sys), e.objective, std::move(x0), std::move(v0), t0};
  IntegratorConfig ic;
  ic.h = h;
  ic.T = T;
  return simulate(spec, ic);
}

}  // namespace

TEST_CASE("ADIGE-V step examples") {
  const auto f = problems::quad1d().objective;
  const auto s = step_adige_v(DampingPotential::viscous(1.0), f, {v1(1.0), v1(0.0)}, 0.1);
  CHECK(s.u[0] == doctest::Approx(-0.1 / 1.1));
  CHECK(s.x[0] == doctest::Approx(1.0 - 0.01 / 1.1));

  const auto stick = step_adige_v(DampingPotential::dry(10.0), f, {v1(0.5), v1(0.0)}, 0.1);
  CHECK(stick.u[0] == 0.0);
  CHECK(stick.x[0] == 0.5);
}

TEST_CASE("ADIGE-VH step examples") {
  const auto f = problems::quad1d().objective;
  const auto phi = DampingPotential::power(1.0, 3.0);
  const auto s = step_adige_vh(phi, f, {v1(1.0), v1(-1.0)}, 1.0, 0.1);
  const double root = bisect_quadratic(0.1, 1.0);
  CHECK(root == doctest::Approx(0.9160798).epsilon(1e-7));
  CHECK(s.u[0] == doctest::Approx(-root).epsilon(1e-10));
  CHECK(s.x[0] == doctest::Approx(1.0 - 0.1 * root).epsilon(1e-10));

  const auto f_no_hessian = problems::power_law(1.0, 1.5).objective;
  CHECK_THROWS_AS(step_adige_vh(phi, f_no_hessian, {v1(1.0), v1(0.0)}, 0.0, 0.1), CapabilityError);
}

TEST_CASE("ADIGE-VGH step example follows steepest descent once stuck") {
  const auto f = problems::quad1d().objective;
  const auto s = step_adige_vgh(DampingPotential::dry(0.5), f, {v1(0.1), v1(0.0)}, 1.0, 0.1);
  CHECK(s.u[0] == 0.0);
  CHECK(s.x[0] == doctest::Approx(0.09));
}

TEST_CASE("beta = 0 reduces VH and VGH to V bit for bit") {
  Gen gen(5);
  for (const auto& e : catalog()) {
    if (!e.objective.has_hvp()) continue;
    for (int k = 0; k < 40; ++k) {
      const auto phi = gen.potential(static_cast<Eigen::Index>(e.objective.dim));
      const PhaseState s{gen.vec(static_cast<Eigen::Index>(e.objective.dim), 3.0),
                         gen.vec(static_cast<Eigen::Index>(e.objective.dim), 3.0)};
      const double h = gen.uniform(1e-3, 0.5);
      const auto a = step_adige_v(phi, e.objective, s, h);
      const auto b = step_adige_vh(phi, e.objective, s, 0.0, h);
      const auto c = step_adige_vgh(phi, e.objective, s, 0.0, h);
      CHECK(a.x == b.x);
      CHECK(a.u == b.u);
      CHECK(a.x == c.x);
      CHECK(a.u == c.u);
    }
  }
}

TEST_CASE("equilibria are fixed points of every step") {
  Gen gen(6);
  const auto f = problems::illcond2d().objective;
  const PhaseState eq{Vec::Zero(2), Vec::Zero(2)};
  for (int k = 0; k < 30; ++k) {
    const auto phi = gen.potential(2);
    const double h = gen.uniform(1e-3, 1.0);
    CHECK(step_adige_v(phi, f, eq, h).x == eq.x);
    CHECK(step_adige_vh(phi, f, eq, 1.0, h).u == eq.u);
    const auto g = step_adige_vgh(phi, f, eq, 1.0, h);
    CHECK(g.x == eq.x);
    CHECK(g.u == eq.u);
    const auto o = step_open_loop([](double t) { return 3.0 / t; }, f, eq, 1.0, 1.0, h);
    CHECK(o.x == eq.x);
    CHECK(o.u == eq.u);
  }
  // Every point of the flat bottom is an equilibrium.
  const auto fb = problems::flatbottom().objective;
  const PhaseState rest{v1(0.7), v1(0.0)};
  CHECK(step_adige_v(DampingPotential::viscous(1.0), fb, rest, 0.3).x == rest.x);
}

TEST_CASE("open-loop step validation") {
  const auto f = problems::quad1d().objective;
  CHECK_THROWS_AS(step_open_loop([](double) { return -1.0; }, f, {v1(1), v1(0)}, 0.0, 0.0, 0.1),
                  DomainError);
  const auto g = problems::power_law(1.0, 1.5).objective;
  CHECK_THROWS_AS(step_open_loop([](double) { return 1.0; }, g, {v1(1), v1(0)}, 0.5, 0.0, 0.1),
                  CapabilityError);
  CHECK_NOTHROW(step_open_loop([](double) { return 1.0; }, g, {v1(1), v1(0)}, 0.0, 0.0, 0.1));
}

TEST_CASE("critically damped heavy ball tracks (1+t)e^{-t}") {
  const auto tr = run(systems::OpenLoop{[](double) { return 2.0; }, 0.0}, problems::quad1d(), v1(1.0),
                      v1(0.0), 1e-4, 1.0);
  CHECK(tr.t.back() == 1.0);
  CHECK(std::abs(tr.x.back()[0] - 2.0 * std::exp(-1.0)) <= 1e-3);
}

TEST_CASE("AVD started on the closed form stays on it") {
  const auto e = problems::avd_power_family(4.0, 4.0);
  const auto tr = run(systems::OpenLoop{[](double t) { return 4.0 / t; }, 0.0}, e, v1(1.0), v1(-1.0),
                      1e-3, 5.0, 1.0);
  for (std::size_t k = 0; k < tr.size(); ++k) CHECK(std::abs(tr.x[k][0] - 1.0 / tr.t[k]) < 20 * 1e-3);
}

TEST_CASE("sampling grid ends exactly at T and honors record_every") {
  DynamicsSpec spec{systems::AdigeV{DampingPotential::viscous(1.0)}, problems::quad1d().objective,
                    v1(3.0), v1(1.0), 0.0};
  IntegratorConfig ic;
  ic.h = 0.3;
  ic.T = 1.0;
  auto tr = simulate(spec, ic);
  REQUIRE(tr.size() == 5);  // 0, 0.3, 0.6, 0.9, 1.0
  CHECK(tr.t.back() == 1.0);
  CHECK(tr.t[3] == doctest::Approx(0.9));

  ic.h = 0.01;
  ic.T = 1.0;
  ic.record_every = 7;
  tr = simulate(spec, ic);
  CHECK(tr.t.front() == 0.0);
  CHECK(tr.t.back() == 1.0);
  CHECK(tr.t[1] == doctest::Approx(0.07));
  CHECK(tr.size() == 100 / 7 + 2);
}

TEST_CASE("energy channel is recomputable and nonincreasing") {
  DynamicsSpec spec{systems::AdigeV{DampingPotential::viscous(1.0)}, problems::quad1d().objective,
                    v1(3.0), v1(1.0), 0.0};
  IntegratorConfig ic;
  ic.h = 1e-3;
  ic.T = 20.0;
  const auto tr = simulate(spec, ic);
  for (std::size_t k = 0; k + 1 < tr.size(); ++k) REQUIRE(tr.energy[k + 1] <= tr.energy[k] + 1e-9);
  for (std::size_t k = 0; k < tr.size(); k += 97) {
    const double direct = 0.5 * tr.x[k].squaredNorm() + 0.5 * tr.v[k].squaredNorm();
    CHECK(tr.energy[k] == doctest::Approx(direct).epsilon(1e-12));
    CHECK(trajectory_energy(spec, tr.x[k], tr.v[k], tr.f_ref) == tr.energy[k]);
  }
}

TEST_CASE("energy decreases for random potentials and starts") {
  Gen gen(21);
  for (int trial = 0; trial < 25; ++trial) {
    const auto e = gen.integer(0, 1) ? problems::quad1d() : problems::flatbottom();
    const auto phi = gen.potential(1);
    const int sys = gen.integer(0, 1);
    System s = sys == 0 ? System{systems::AdigeV{phi}}
                        : System{systems::AdigeVGH{phi, gen.uniform(0.0, 1.0)}};
    const auto tr = run(s, e, v1(gen.uniform(-3, 3)), v1(gen.uniform(-2, 2)), 1e-3, 5.0);
    for (std::size_t k = 0; k + 1 < tr.size(); ++k) REQUIRE(tr.energy[k + 1] <= tr.energy[k] + 1e-9);
  }
}

TEST_CASE("VGH records the companion u and its energy") {
  const double beta = 0.5;
  const auto tr = run(systems::AdigeVGH{DampingPotential::viscous(1.0), beta}, problems::quad1d(),
                      v1(2.0), v1(0.0), 1e-3, 3.0);
  REQUIRE(tr.has_u());
  for (std::size_t k = 0; k < tr.size(); k += 101) {
    CHECK((tr.u[k] - (tr.v[k] + beta * tr.x[k])).norm() < 1e-12);
    CHECK(tr.energy[k] == doctest::Approx(0.5 * tr.x[k].squaredNorm() + 0.5 * tr.u[k].squaredNorm()));
  }
}

TEST_CASE("velocity vanishes in the tail") {
  const auto phi = DampingPotential::power(1.0, 2.0);
  const auto short_run = run(systems::AdigeV{phi}, problems::quad1d(), v1(3.0), v1(1.0), 1e-3, 10.0);
  const auto long_run = run(systems::AdigeV{phi}, problems::quad1d(), v1(3.0), v1(1.0), 1e-3, 100.0);
  const double a = tail_max_speed(short_run, 9.0), b = tail_max_speed(long_run, 90.0);
  CHECK(b < a);
  CHECK(b < 1e-2);
}

TEST_CASE("acceleration vanishes in the tail") {
  auto accel_tail = [](const Trajectory& tr, double from) {
    double m = 0.0;
    for (std::size_t k = 0; k + 1 < tr.size(); ++k)
      if (tr.t[k] >= from)
        m = std::max(m, (tr.v[k + 1] - tr.v[k]).norm() / (tr.t[k + 1] - tr.t[k]));
    return m;
  };
  const auto phi = DampingPotential::viscous(0.5);
  System vh = systems::AdigeVH{phi, 0.5};
  const auto a = run(vh, problems::quad1d(), v1(3.0), v1(1.0), 1e-3, 10.0);
  const auto b = run(vh, problems::quad1d(), v1(3.0), v1(1.0), 1e-3, 100.0);
  CHECK(accel_tail(b, 90.0) < accel_tail(a, 9.0));
}

TEST_CASE("f_ref is the known minimum or the path minimum") {
  const auto tr = run(systems::AdigeV{DampingPotential::viscous(1.0)}, problems::quad1d(), v1(3.0),
                      v1(0.0), 1e-2, 5.0);
  CHECK(tr.f_ref == 0.0);

  auto e = problems::quad1d();
  e.objective.min_value.reset();
  const auto tr2 = run(systems::AdigeV{DampingPotential::viscous(1.0)}, e, v1(3.0), v1(0.0), 1e-2, 5.0);
  double lowest = INFINITY;
  for (const auto& x : tr2.x) lowest = std::min(lowest, 0.5 * x.squaredNorm());
  CHECK(tr2.f_ref == lowest);
}

TEST_CASE("divergence is reported with its time") {
  // Explicit Hessian term with β·h·L ≫ 2 is unstable.
  try {
    run(systems::OpenLoop{[](double) { return 0.0; }, 50.0}, problems::illcond2d(),
        Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(0.0, 0.0), 0.1, 100.0);
    FAIL("expected divergence");
  } catch (const DivergenceError& err) {
    CHECK(err.when() > 0.0);
    CHECK(err.when() < 100.0);
  }
}

TEST_CASE("simulate rejects bad configurations") {
  DynamicsSpec spec{systems::AdigeV{DampingPotential::viscous(1.0)}, problems::quad1d().objective,
                    v1(1.0), v1(0.0), 0.0};
  IntegratorConfig ic;
  ic.h = -1.0;
  CHECK_THROWS_AS(simulate(spec, ic), DomainError);
  ic.h = 1e-3;
  ic.T = -1.0;
  CHECK_THROWS_AS(simulate(spec, ic), DomainError);
  ic.T = 1.0;
  spec.x0 = Eigen::Vector2d(1, 1);
  CHECK_THROWS(simulate(spec, ic));
}

TEST_CASE("Yosida path: gaps shrink and match the prox reference") {
  DynamicsSpec spec{systems::AdigeV{DampingPotential::dry(1.0)}, problems::quad1d().objective,
                    v1(3.0), v1(1.0), 0.0};
  IntegratorConfig ic;
  ic.h = 1e-3;
  ic.T = 5.0;
  const std::vector<double> lambdas{0.1, 0.05, 0.025};
  const auto path = yosida_path(spec, ic, lambdas);
  REQUIRE(path.size() == 3);
  const auto ref = simulate(spec, ic);
  auto dist = [&](const Trajectory& a) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
      m = std::max(m, std::hypot((a.x[k] - ref.x[k]).norm(), (a.v[k] - ref.v[k]).norm()));
    return m;
  };
  // Distance to the nonsmooth reference shrinks with λ.
  CHECK(dist(path[2].second) < dist(path[1].second));
  CHECK(dist(path[1].second) < dist(path[0].second));

  CHECK(yosida_path(spec, ic, {}).empty());
  CHECK_THROWS_AS(yosida_path(spec, ic, {0.1, 0.2}), InputError);
}

TEST_CASE("Yosida runs of a smooth potential agree to O(h)") {
  DynamicsSpec spec{systems::AdigeV{DampingPotential::viscous(1.0)}, problems::quad1d().objective,
                    v1(3.0), v1(1.0), 0.0};
  IntegratorConfig ic;
  ic.h = 1e-3;
  ic.T = 5.0;
  const auto path = yosida_path(spec, ic, {1e-4, 5e-5});
  const auto ref = simulate(spec, ic);
  for (const auto& [lambda, tr] : path)
    for (std::size_t k = 0; k < tr.size(); ++k) REQUIRE((tr.x[k] - ref.x[k]).norm() < 10 * ic.h);
}
