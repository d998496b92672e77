#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

#include "dampdyn/diagnostics.hpp"
#include "dampdyn/dynamics.hpp"

#include <cmath>
#include <numbers>

using namespace dampdyn;
using testsupport::Gen;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

Trajectory run(System sys, const ProblemCatalogEntry& e, Vec x0, Vec v0, double h, double T,
               double t0 = 0.0) {
  DynamicsSpec spec{std::move(sys), e.objective, std::move(x0), std::move(v0), t0};
  IntegratorConfig ic;
  ic.h = h;
  ic.T = T;
  return simulate(spec, ic);
}

Trajectory synthetic(const std::vector<double>& t, const std::vector<double>& x) {
  Trajectory tr;
  tr.t = t;
  for (double xi : x) {
    tr.x.push_back(v1(xi));
    tr.v.push_back(v1(0.0));
    tr.energy.push_back(0.0);
    tr.grad_norm.push_back(0.0);
  }
  return tr;
}

std::vector<double> grid(double a, double b, int n) {
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) t[static_cast<std::size_t>(k)] = a + (b - a) * k / (n - 1);
  return t;
}

}  // namespace

TEST_CASE("energy monotonicity on prox and open-loop runs") {
  const auto a = run(systems::AdigeV{DampingPotential::viscous(1.0)}, problems::quad1d(), v1(3.0),
                     v1(1.0), 1e-3, 20.0);
  CHECK(check_energy_monotone(a, 1e-9).violations == 0);

  const auto c = synthetic(grid(0, 1, 20), std::vector<double>(20, 0.0));
  CHECK(check_energy_monotone(c, 0.0).violations == 0);

  const auto avd = run(systems::OpenLoop{[](double t) { return 3.1 / t; }, 0.0}, problems::illcond2d(),
                       Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(0.0, 0.0), 1e-4, 15.0, 1.0);
  CHECK(check_energy_monotone(avd, 1e-6).violations == 0);

  const auto r = check_energy_monotone(std::vector<double>{3.0, 2.0, 2.5, 1.0, 1.0}, 0.1);
  CHECK(r.violations == 1);
  CHECK(r.worst_slack == doctest::Approx(0.5));
}

TEST_CASE("rate fits on synthetic data") {
  const auto t = grid(1, 5, 200);
  std::vector<double> y(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) y[k] = 3.0 * std::exp(-2.0 * t[k]);
  auto fit = fit_rate(t, y, RateModel::Exponential, Window{1, 5});
  CHECK(fit.c == doctest::Approx(3.0));
  CHECK(fit.rate == doctest::Approx(2.0));
  CHECK(fit.r2 >= 0.999999);

  const auto s = grid(10, 100, 200);
  for (std::size_t k = 0; k < s.size(); ++k) y[k] = 5.0 / (s[k] * s[k]);
  fit = fit_rate(s, y, RateModel::Power, Window{10, 100});
  CHECK(fit.rate == doctest::Approx(2.0));
  CHECK(fit.c == doctest::Approx(5.0));
  CHECK(fit.r2 >= 0.999999);
}

TEST_CASE("rate fits recover random exact-model parameters") {
  Gen gen(8);
  for (int trial = 0; trial < 50; ++trial) {
    const bool expo = gen.integer(0, 1) == 1;
    const double c = gen.uniform(0.1, 10.0), rate = gen.uniform(0.1, 4.0);
    const auto t = grid(gen.uniform(1.0, 2.0), gen.uniform(5.0, 20.0), 100);
    std::vector<double> y(t.size());
    for (std::size_t k = 0; k < t.size(); ++k)
      y[k] = expo ? c * std::exp(-rate * t[k]) : c * std::pow(t[k], -rate);
    const auto fit = fit_rate(t, y, expo ? RateModel::Exponential : RateModel::Power,
                              Window{t.front(), t.back()});
    CHECK(fit.rate == doctest::Approx(rate).epsilon(1e-6));
    CHECK(fit.c == doctest::Approx(c).epsilon(1e-6));
  }
}

TEST_CASE("default window drops the first tenth, and sparse data is rejected") {
  const auto t = grid(0, 10, 101);
  std::vector<double> y(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) y[k] = t[k] < 1.0 ? 1e9 : std::exp(-t[k]);
  const auto fit = fit_rate(t, y, RateModel::Exponential);
  CHECK(fit.window.lo == doctest::Approx(1.0));
  CHECK(fit.rate == doctest::Approx(1.0));

  std::vector<double> zeros(t.size(), 0.0);
  for (std::size_t k = 0; k < 5; ++k) zeros[50 + k] = 1.0;
  CHECK_THROWS_AS(fit_rate(t, zeros, RateModel::Exponential), InsufficientDataError);
}

TEST_CASE("HBF f-values decay at rate at least one") {
  const auto e = problems::strongquad(1.0);
  const auto tr = run(systems::OpenLoop{[](double) { return 2.0; }, 0.0}, e, v1(1.0), v1(0.0), 1e-3, 10.0);
  std::vector<double> f(tr.size());
  for (std::size_t k = 0; k < tr.size(); ++k) f[k] = e.objective.eval(tr.x[k]);
  const auto fit = fit_rate(tr.t, f, RateModel::Exponential, Window{2, 10});
  CHECK(fit.rate >= 1.0);
}

TEST_CASE("level crossings use strict sign changes") {
  const auto t = grid(0, 4 * std::numbers::pi, 4001);
  std::vector<double> s(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) s[k] = std::sin(t[k]);
  // Interior zeros at π, 2π, 3π; the endpoints lie on the level.
  CHECK(count_level_crossings(s, 0.0) == 3);

  CHECK(count_level_crossings({1.0, 0.0, -1.0}, 0.0) == 1);
  CHECK(count_level_crossings({1.0, 0.0, 1.0}, 0.0) == 0);
  CHECK(count_level_crossings({1.0, 1e-13, -1e-13, 1.0}, 0.0) == 0);
  CHECK(count_level_crossings({1.0, -1.0, 1.0, -1.0}, 0.0) == 3);
  CHECK(count_level_crossings({}, 0.0) == 0);
}

TEST_CASE("band crossings per level") {
  const auto t = grid(0, 10, 11);
  const auto tr = synthetic(t, {0, 2, 0, -2, 0, 2, 0.5, 0.5, -0.5, 1.5, 3});
  const auto c = count_band_crossings(tr, -1.0, 1.0, 0);
  CHECK(c.a == 2);  // 0→−2, −2→0
  CHECK(c.b == 5);  // 0→2, 2→0, 0→2, 2→0.5, −0.5→1.5
  CHECK_THROWS(count_band_crossings(tr, -1.0, 1.0, 3));
}

TEST_CASE("flatbottom crossings grow with the horizon for strong damping exponents") {
  const auto e = problems::flatbottom();
  const auto phi = DampingPotential::power(1.0, 3.5);
  const auto a = run(systems::AdigeV{phi}, e, v1(3.0), v1(1.0), 1e-3, 200.0);
  const auto b = run(systems::AdigeV{phi}, e, v1(3.0), v1(1.0), 1e-3, 400.0);
  const auto ca = count_band_crossings(a, -1, 1, 0), cb = count_band_crossings(b, -1, 1, 0);
  CHECK(ca.a + ca.b >= 6);
  CHECK(cb.a + cb.b > ca.a + ca.b);
}

TEST_CASE("ergodic averages") {
  const auto c = synthetic(grid(0, 5, 51), std::vector<double>(51, 2.5));
  CHECK(ergodic_average(c).tail[0] == doctest::Approx(2.5));

  // Trapezoid on x = t gives exactly t/2.
  const auto t = grid(0, 4, 41);
  const auto lin = synthetic(t, t);
  const auto avg = ergodic_average(lin);
  CHECK(avg.mean.front()[0] == 0.0);
  for (std::size_t k = 1; k < t.size(); ++k) CHECK(avg.mean[k][0] == doctest::Approx(t[k] / 2));

  const auto phi = DampingPotential::power(1.0, 6.0);
  const auto a = run(systems::AdigeV{phi}, problems::quad1d(), v1(3.0), v1(1.0), 1e-2, 250.0);
  const auto b = run(systems::AdigeV{phi}, problems::quad1d(), v1(3.0), v1(1.0), 1e-2, 500.0);
  const double ta = ergodic_average(a).tail.norm(), tb = ergodic_average(b).tail.norm();
  CHECK(tb <= 0.1);
  CHECK(tb < ta);
}

TEST_CASE("dry friction leaves the terminal point in the stiction band") {
  const auto tr = run(systems::AdigeV{DampingPotential::dry(0.5)}, problems::quad1d(), v1(3.0), v1(1.0),
                      1e-3, 50.0);
  CHECK(std::abs(tr.x.back()[0]) <= 0.5 + 1e-6);
  CHECK(basic_report(tr).terminal_grad_norm <= 0.5 + 1e-6);
}

TEST_CASE("finite stabilization for sharp potentials only") {
  const auto e = problems::quad1d();
  const auto dry = run(systems::AdigeVGH{DampingPotential::dry(0.5), 1.0}, e, v1(2.0), v1(0.0), 1e-3, 30.0);
  const auto ts = detect_stabilization(dry, 1e-8);
  REQUIRE(ts.has_value());
  CHECK(*ts < 30.0);

  const auto visc =
      run(systems::AdigeVGH{DampingPotential::viscous(1.0), 1.0}, e, v1(2.0), v1(0.0), 1e-3, 30.0);
  // Viscous damping only decays exponentially: u never reaches zero and T*
  // drifts by about ln(100) per two decades of tol. Dry friction reaches u = 0.
  CHECK_FALSE(detect_stabilization(visc, 0.0).has_value());
  const double t10 = *detect_stabilization(visc, 1e-10), t12 = *detect_stabilization(visc, 1e-12);
  CHECK(t12 - t10 == doctest::Approx(std::log(100.0)).epsilon(0.1));
  CHECK(detect_stabilization(dry, 0.0) == ts);

  // Monotone in tol.
  std::optional<double> prev;
  for (double tol : {1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2}) {
    const auto cur = detect_stabilization(visc, tol);
    if (prev && cur) CHECK(*cur <= *prev);
    if (prev) CHECK(cur.has_value());
    prev = cur;
  }

  auto still = dry;
  for (auto& u : still.u) u.setZero();
  CHECK(detect_stabilization(still, 0.0) == still.t.front());

  const auto no_u = run(systems::AdigeV{DampingPotential::dry(0.5)}, e, v1(2.0), v1(0.0), 1e-2, 1.0);
  CHECK_THROWS_AS(detect_stabilization(no_u, 1e-8), InputError);
}

TEST_CASE("Yosida gaps") {
  DynamicsSpec spec{systems::AdigeV{DampingPotential::dry(1.0)}, problems::quad1d().objective, v1(3.0),
                    v1(1.0), 0.0};
  IntegratorConfig ic;
  ic.h = 1e-3;
  ic.T = 5.0;
  const auto path = yosida_path(spec, ic, {0.2, 0.1, 0.05, 0.025});
  const auto gaps = yosida_cauchy_check(path);
  REQUIRE(gaps.gaps.size() == 3);
  CHECK(gaps.strictly_decreasing);
  // Direct comparison of the first pair.
  double m = 0.0;
  for (std::size_t k = 0; k < path[0].second.size(); ++k)
    m = std::max(m, std::hypot((path[0].second.x[k] - path[1].second.x[k]).norm(),
                               (path[0].second.v[k] - path[1].second.v[k]).norm()));
  CHECK(gaps.gaps[0] == doctest::Approx(m));

  CHECK(yosida_cauchy_check({path[0]}).gaps.empty());

  IntegratorConfig coarse = ic;
  coarse.h = 2e-3;
  auto mismatched = path;
  mismatched[1].second = simulate(spec, coarse);
  CHECK_THROWS_AS(yosida_cauchy_check(mismatched), InputError);
}

TEST_CASE("Yosida gaps of a smooth potential are negligible") {
  DynamicsSpec spec{systems::AdigeV{DampingPotential::viscous(1.0)}, problems::quad1d().objective,
                    v1(3.0), v1(1.0), 0.0};
  IntegratorConfig ic;
  ic.h = 1e-4;
  ic.T = 2.0;
  const auto path = yosida_path(spec, ic, {1e-6, 5e-7, 2.5e-7});
  double scale = 0.0;
  for (std::size_t k = 0; k < path[0].second.size(); ++k)
    scale = std::max(scale, std::hypot(path[0].second.x[k].norm(), path[0].second.v[k].norm()));
  for (double g : yosida_cauchy_check(path).gaps) CHECK(g <= 1e-6 * scale);
}

TEST_CASE("angle certificate example") {
  const auto f = problems::quad1d().objective;
  const auto cert = angle_certificate(f, DampingPotential::viscous(1.0), 0.25, 0.0, Box{2.0, 1.0}, 101,
                                      AngleConstants{0.5, 1.0, 1.0});
  CHECK(cert.alpha_bound == doctest::Approx(0.025));
  CHECK(cert.empirical_min_ratio >= 0.025);
  CHECK(cert.passed);
  CHECK_FALSE(cert.M_estimated);
  REQUIRE(cert.domination_holds.has_value());
  CHECK(*cert.domination_holds);
}

TEST_CASE("angle certificate ratio oracle") {
  // Recompute the minimum ratio directly on a coarse lattice.
  const auto f = problems::quad1d().objective;
  const double lambda = 0.2;
  double worst = INFINITY;
  for (int i = -20; i <= 20; ++i) {
    for (int j = -20; j <= 20; ++j) {
      const double x = 2.0 * i / 20, u = 1.0 * j / 20;
      const double gx = x + lambda * u, gu = u + lambda * x;  // ∇E_λ for f = ½x²
      const double Fx = -u, Fu = u + x;                       // φ = ½u²
      const double n = std::hypot(gx, gu) * std::hypot(Fx, Fu);
      if (n > 1e-14) worst = std::min(worst, (gx * Fx + gu * Fu) / n);
    }
  }
  const auto cert = angle_certificate(f, DampingPotential::viscous(1.0), lambda, 0.0, Box{2.0, 1.0}, 41,
                                      AngleConstants{0.5, 1.0, 1.0});
  CHECK(cert.empirical_min_ratio == doctest::Approx(worst).epsilon(1e-9));
}

TEST_CASE("angle certificate at lambda zero and refusal") {
  const auto f = problems::quad1d().objective;
  const auto phi = DampingPotential::viscous(1.0);
  const auto zero = angle_certificate(f, phi, 0.0, 0.0, Box{2.0, 1.0}, 51, AngleConstants{0.5, 1.0, 1.0});
  CHECK(zero.empirical_min_ratio >= 0.0);

  try {
    angle_certificate(f, phi, 1.0, 0.0, Box{2.0, 1.0}, 51, AngleConstants{0.5, 1.0, 1.0});
    FAIL("expected refusal");
  } catch (const ConditionError& err) {
    CHECK(std::string(err.what()).find("γ > λ(M + δ²/2)") != std::string::npos);
  }
  try {
    angle_certificate(f, phi, 0.3, 1.0, Box{2.0, 1.0}, 51, AngleConstants{0.5, 1.0, 1.0});
    FAIL("expected refusal");
  } catch (const ConditionError& err) {
    CHECK(std::string(err.what()).find("γ > λ(M + δ²/2 + β²M²)") != std::string::npos);
  }
}

TEST_CASE("angle certificate holds for admissible lambdas with Hessian damping") {
  Gen gen(4);
  const auto f = problems::illcond2d().objective;
  const auto phi = DampingPotential::viscous(1.0);
  for (int trial = 0; trial < 6; ++trial) {
    const double beta = gen.uniform(0.0, 0.01);
    const double M = 1000.0;
    const double limit = 0.5 / (M + 0.5 + beta * beta * M * M);
    const double lambda = gen.uniform(0.05, 0.95) * limit;
    const auto cert =
        angle_certificate(f, phi, lambda, beta, Box{1.0, 1.0}, 9, AngleConstants{0.5, 1.0, std::nullopt}, 7);
    CAPTURE(beta);
    CAPTURE(lambda);
    CHECK(cert.M_estimated);
    CHECK(cert.M == doctest::Approx(1000.0).epsilon(1e-6));
    CHECK(cert.passed);
  }
}

TEST_CASE("Hessian bound estimate") {
  CHECK(estimate_hessian_bound(problems::illcond2d().objective, 1.0, 1) ==
        doctest::Approx(1000.0).epsilon(1e-9));
  const auto p = problems::power_law(1.0, 4.0).objective;  // f'' = 12x²
  const double M = estimate_hessian_bound(p, 2.0, 3);
  CHECK(M <= 48.0 + 1e-9);
  CHECK(M >= 30.0);
}

TEST_CASE("closed-form residuals and refusal") {
  std::vector<double> t;
  for (int k = 0; k < 100; ++k) t.push_back(1.0 + 99.0 * k / 99);
  CHECK(closed_form_residual(problems::avd_power_family(4.0, 4.0), t) <= 1e-12);
  CHECK(closed_form_residual(problems::avd_power_family(5.0, 3.0), t) <= 1e-12);
  CHECK(closed_form_residual(problems::adige_v_power_family(6.0, 4.0), t) <= 1e-10);
  CHECK_THROWS_AS(closed_form_residual(problems::quad1d(), t), InputError);
}

TEST_CASE("phase distance and basic report") {
  const auto a = run(systems::AdigeV{DampingPotential::viscous(1.0)}, problems::quad1d(), v1(3.0), v1(1.0),
                     1e-2, 5.0);
  CHECK(phase_sup_distance(a, a) == 0.0);
  const auto rep = basic_report(a);
  CHECK(rep.energy.violations == 0);
  CHECK(rep.terminal_grad_norm == doctest::Approx(std::abs(a.x.back()[0])));
  CHECK_FALSE(rep.stabilization_time.has_value());
}
