#include "dampdyn/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace dampdyn {

namespace {

constexpr double kDeadBand = 1e-12;

int sign_with_deadband(double v) {
  if (v > kDeadBand) return 1;
  if (v < -kDeadBand) return -1;
  return 0;
}

void require_same_grid(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size() || a.dim() != b.dim())
    throw InputError("trajectories are not on a shared grid");
  for (std::size_t k = 0; k < a.size(); ++k)
    if (std::abs(a.t[k] - b.t[k]) > 1e-12 * (1.0 + std::abs(a.t[k])))
      throw InputError("trajectories are not on a shared grid");
}

// All points of the lattice {−R + 2Rk/(n−1)}^d that lie in the closed R-ball.
std::vector<Vec> ball_lattice(std::size_t d, double R, int n) {
  std::vector<double> axis(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    axis[static_cast<std::size_t>(k)] = n == 1 ? 0.0 : -R + 2.0 * R * k / (n - 1);
  std::vector<Vec> pts;
  std::vector<int> idx(d, 0);
  const double limit = R * (1.0 + 1e-12);
  while (true) {
    Vec p(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) p[static_cast<Eigen::Index>(i)] = axis[static_cast<std::size_t>(idx[i])];
    if (p.norm() <= limit) pts.push_back(std::move(p));
    std::size_t i = 0;
    while (i < d && ++idx[i] == n) idx[i++] = 0;
    if (i == d) break;
  }
  return pts;
}

Vec random_in_ball(std::mt19937_64& rng, std::size_t d, double R) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  Vec dir(static_cast<Eigen::Index>(d));
  for (auto& v : dir) v = normal(rng);
  const double n = dir.norm();
  if (n == 0.0) return Vec::Zero(static_cast<Eigen::Index>(d));
  return dir / n * R * std::pow(unif(rng), 1.0 / static_cast<double>(d));
}

}  // namespace

EnergyCheck check_energy_monotone(const std::vector<double>& energy, double per_step_slack) {
  EnergyCheck out;
  out.worst_slack = energy.size() < 2 ? 0.0 : -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < energy.size(); ++k) {
    const double inc = energy[k + 1] - energy[k];
    out.worst_slack = std::max(out.worst_slack, inc);
    if (inc > per_step_slack) ++out.violations;
  }
  return out;
}

EnergyCheck check_energy_monotone(const Trajectory& traj, double per_step_slack) {
  return check_energy_monotone(traj.energy, per_step_slack);
}

RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& y, RateModel model,
                 std::optional<Window> window) {
  if (t.size() != y.size()) throw InputError("fit_rate: t and y differ in length");
  if (t.empty()) throw InsufficientDataError("fit_rate: empty series");
  Window w = window.value_or(Window{t.front() + 0.1 * (t.back() - t.front()), t.back()});

  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < w.lo || t[k] > w.hi || !(y[k] > 0.0) || !std::isfinite(y[k])) continue;
    if (model == RateModel::Power && !(t[k] > 0.0)) continue;
    xs.push_back(model == RateModel::Power ? std::log(t[k]) : t[k]);
    ys.push_back(std::log(y[k]));
  }
  if (xs.size() < 10)
    throw InsufficientDataError("fit_rate: " + std::to_string(xs.size()) +
                                " positive samples in window, need 10");

  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  if (!(sxx > 0.0)) throw InsufficientDataError("fit_rate: window holds a single abscissa");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double r = ys[k] - (intercept + slope * xs[k]);
    ss_res += r * r;
  }

  RateFit fit;
  fit.model = model;
  fit.c = std::exp(intercept);
  fit.rate = -slope;
  fit.window = w;
  fit.samples = xs.size();
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity());
  return fit;
}

long count_level_crossings(const std::vector<double>& series, double level) {
  long count = 0;
  int last = 0;
  for (double v : series) {
    const int s = sign_with_deadband(v - level);
    if (s == 0) continue;
    if (last != 0 && s != last) ++count;
    last = s;
  }
  return count;
}

BandCrossings count_band_crossings(const Trajectory& traj, double a, double b,
                                   std::size_t component) {
  if (component >= traj.dim()) throw InputError("crossing component out of range");
  std::vector<double> xs(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) xs[k] = traj.x[k][static_cast<Eigen::Index>(component)];
  return {count_level_crossings(xs, a), count_level_crossings(xs, b)};
}

ErgodicAverage ergodic_average(const Trajectory& traj) {
  ErgodicAverage out;
  if (traj.size() == 0) return out;
  out.t = traj.t;
  out.mean.reserve(traj.size());
  Vec integral = Vec::Zero(traj.x.front().size());
  out.mean.push_back(traj.x.front());
  for (std::size_t k = 1; k < traj.size(); ++k) {
    integral += 0.5 * (traj.t[k] - traj.t[k - 1]) * (traj.x[k] + traj.x[k - 1]);
    out.mean.push_back(integral / (traj.t[k] - traj.t.front()));
  }
  out.tail = out.mean.back();
  return out;
}

std::optional<double> detect_stabilization(const Trajectory& traj, double tol) {
  if (!traj.has_u()) throw InputError("detect_stabilization needs the u channel");
  std::optional<double> t_star;
  for (std::size_t k = traj.size(); k-- > 0;) {
    if (traj.u[k].norm() > tol) break;
    t_star = traj.t[k];
  }
  return t_star;
}

double phase_sup_distance(const Trajectory& a, const Trajectory& b) {
  require_same_grid(a, b);
  double gap = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d2 = (a.x[k] - b.x[k]).squaredNorm() + (a.v[k] - b.v[k]).squaredNorm();
    gap = std::max(gap, std::sqrt(d2));
  }
  return gap;
}

YosidaGaps yosida_cauchy_check(const std::vector<std::pair<double, Trajectory>>& path) {
  YosidaGaps out;
  for (std::size_t i = 0; i + 1 < path.size(); ++i)
    out.gaps.push_back(phase_sup_distance(path[i].second, path[i + 1].second));
  for (std::size_t i = 0; i + 1 < out.gaps.size(); ++i)
    if (!(out.gaps[i + 1] < out.gaps[i])) out.strictly_decreasing = false;
  return out;
}

double estimate_hessian_bound(const Objective& f, double R, std::uint64_t seed) {
  if (!f.has_hvp()) throw CapabilityError("Hessian bound needs a Hessian-vector product");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double best = 0.0;
  for (int s = 0; s < 20; ++s) {
    const Vec x = random_in_ball(rng, f.dim, R);
    Vec v(static_cast<Eigen::Index>(f.dim));
    for (auto& c : v) c = normal(rng);
    v.normalize();
    double est = 0.0;
    for (int it = 0; it < 50; ++it) {
      Vec w = f.hvp(x, v);
      est = w.norm();
      if (est == 0.0) break;
      v = w / est;
    }
    best = std::max(best, est);
  }
  return best;
}

AngleCertificate angle_certificate(const Objective& f, const DampingPotential& phi, double lambda,
                                   double beta, Box box, int grid_n, AngleConstants k,
                                   std::uint64_t seed) {
  if (!(lambda >= 0.0)) throw DomainError("lambda must be >= 0");
  if (!(beta >= 0.0)) throw DomainError("beta must be >= 0");
  if (!(box.R > 0.0) || !(box.eps > 0.0)) throw DomainError("box radii must be positive");
  if (grid_n < 2) throw DomainError("grid_n must be >= 2");
  if (!(k.gamma > 0.0) || !(k.delta >= 0.0)) throw DomainError("need gamma > 0 and delta >= 0");

  AngleCertificate cert;
  cert.lambda = lambda;
  cert.beta = beta;
  cert.domain = box;
  if (k.M) {
    cert.M = *k.M;
  } else {
    cert.M = estimate_hessian_bound(f, box.R, seed);
    cert.M_estimated = true;
  }
  const double M = cert.M;
  const double d2 = k.delta * k.delta;
  const double E1 = 1.0 + lambda * std::max(1.0, M);

  if (beta == 0.0) {
    if (!(k.gamma > lambda * (M + 0.5 * d2)))
      throw ConditionError("lambda not admissible: requires gamma > lambda(M + delta^2/2), i.e. "
                           "γ > λ(M + δ²/2)");
    const double a0 = std::min(k.gamma - lambda * (M + 0.5 * d2), 0.5 * lambda);
    cert.alpha_bound = a0 / (2.0 * E1 * (1.0 + k.delta));
    // ‖∇E_λ‖² ≤ C1(‖u‖² + ‖∇f‖²) and ‖F‖² ≥ C3(‖u‖² + ‖∇f‖²) with the
    // Young parameter σ balancing both coefficients of the lower bound.
    const double C1 = 2.0 * E1 * E1;
    const double sigma = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 / std::max(d2, 1e-300)));
    const double C3 = 1.0 - 1.0 / sigma;
    cert.b = std::sqrt(C1 / C3);
  } else {
    const double bM2 = beta * beta * M * M;
    if (!(k.gamma > lambda * (M + 0.5 * d2 + bM2)))
      throw ConditionError("lambda not admissible: requires gamma > lambda(M + delta^2/2 + "
                           "beta^2 M^2), i.e. γ > λ(M + δ²/2 + β²M²)");
    const double a0 = std::min(k.gamma - lambda * (M + 0.5 * d2 + bM2), 0.25 * lambda);
    const double C1 = std::sqrt(2.0) * E1;
    const double C2 = std::sqrt(4.0 + 3.0 * d2 + 3.0 * bM2);
    cert.alpha_bound = a0 / (C1 * C2);
  }

  const bool need_hvp = lambda > 0.0 || beta > 0.0;
  if (need_hvp && !f.has_hvp())
    throw CapabilityError("angle certificate needs a Hessian-vector product");

  const std::vector<Vec> xs = ball_lattice(f.dim, box.R, grid_n);
  const std::vector<Vec> us = ball_lattice(f.dim, box.eps, grid_n);
  if (static_cast<double>(xs.size()) * static_cast<double>(us.size()) > 1e8)
    throw InputError("angle certificate lattice exceeds 1e8 samples");

  double min_ratio = std::numeric_limits<double>::infinity();
  double max_dom = 0.0;
  std::size_t counted = 0;
  for (const Vec& x : xs) {
    const Vec g = f.grad(x);
    for (const Vec& u : us) {
      const Vec Hu = need_hvp ? f.hvp(x, u) : Vec::Zero(u.size());
      const Vec dphi = phi_min_section(phi, u);
      const Vec ex = g + lambda * Hu;
      const Vec eu = u + lambda * g;
      const Vec fx = -u;
      const Vec fu = dphi + g + beta * Hu;
      const double nE = std::sqrt(ex.squaredNorm() + eu.squaredNorm());
      const double nF = std::sqrt(fx.squaredNorm() + fu.squaredNorm());
      if (nE * nF <= 1e-14) continue;
      ++counted;
      min_ratio = std::min(min_ratio, (ex.dot(fx) + eu.dot(fu)) / (nE * nF));
      if (nF > 0.0) max_dom = std::max(max_dom, nE / nF);
    }
  }
  cert.samples = counted;
  cert.empirical_min_ratio = counted ? min_ratio : 0.0;
  cert.passed = cert.empirical_min_ratio >= cert.alpha_bound - 1e-9;
  cert.max_domination_ratio = max_dom;
  if (cert.b) cert.domination_holds = max_dom <= *cert.b * (1.0 + 1e-12);
  return cert;
}

double closed_form_residual(const ProblemCatalogEntry& entry, const std::vector<double>& times) {
  if (!entry.closed_form) throw InputError("problem " + entry.id + " has no closed form");
  const ClosedForm& cf = *entry.closed_form;
  double worst = 0.0;
  if (const auto* avd = std::get_if<AvdGoverning>(&cf.governing)) {
    const double ratio = cf.gamma / (cf.gamma - 2.0);
    if (!(cf.gamma > 2.0) || !(avd->alpha > ratio))
      throw ConditionError("AVD closed form requires gamma > 2 and alpha > gamma/(gamma-2)");
    for (double t : times) {
      if (!(t >= cf.t0())) throw DomainError("closed form is valid for t >= 1 only");
      const double res = cf.xddot(t) + avd->alpha / t * cf.xdot(t) +
                         entry.objective.grad(Vec::Constant(1, cf.x(t)))[0];
      worst = std::max(worst, std::abs(res));
    }
  } else {
    const auto& g = std::get<AdigeVGoverning>(cf.governing);
    const double threshold = (cf.theta + 1.0) / std::pow(cf.theta, g.p - 2.0);
    if (!(g.r > threshold))
      throw ConditionError("ADIGE-V closed form requires r > (theta+1)/theta^(p-2) (c > 0)");
    const DampingPotential phi = DampingPotential::power(g.r, g.p);
    for (double t : times) {
      if (!(t >= cf.t0())) throw DomainError("closed form is valid for t >= 1 only");
      const double res = cf.xddot(t) + phi_min_section(phi, Vec::Constant(1, cf.xdot(t)))[0] +
                         entry.objective.grad(Vec::Constant(1, cf.x(t)))[0];
      worst = std::max(worst, std::abs(res));
    }
  }
  return worst;
}

DiagnosticsReport basic_report(const Trajectory& traj) {
  DiagnosticsReport rep;
  rep.energy = check_energy_monotone(traj, 1e-9);
  if (traj.size() > 0) {
    rep.ergodic_mean_tail = ergodic_average(traj).tail;
    rep.terminal_grad_norm = traj.grad_norm.back();
  }
  if (traj.has_u()) rep.stabilization_time = detect_stabilization(traj, 1e-8);
  return rep;
}

}  // namespace dampdyn
