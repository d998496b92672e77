#include "dampdyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dampdyn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kBlowUp = 1e12;
constexpr double kMaxSteps = 1e8;

void require_step(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("step size must be positive and finite");
}

void require_beta(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be >= 0");
}

Vec hessian_times(const Objective& f, const Vec& x, const Vec& v) {
  if (!f.has_hvp()) throw CapabilityError("objective provides no Hessian-vector product");
  return f.hvp(x, v);
}

const DampingPotential* potential_of(const System& sys) {
  return std::visit(overloaded{[](const systems::AdigeV& s) { return &s.phi; },
                               [](const systems::AdigeVH& s) { return &s.phi; },
                               [](const systems::AdigeVGH& s) { return &s.phi; },
                               [](const systems::OpenLoop&) -> const DampingPotential* {
                                 return nullptr;
                               }},
                    sys);
}

double beta_of(const System& sys) {
  return std::visit(overloaded{[](const systems::AdigeV&) { return 0.0; },
                               [](const auto& s) { return s.beta; }},
                    sys);
}

bool is_vgh(const System& sys) { return std::holds_alternative<systems::AdigeVGH>(sys); }

void validate(const DynamicsSpec& spec, const IntegratorConfig& cfg) {
  require_step(cfg.h);
  if (!(cfg.T > spec.t0)) throw DomainError("horizon T must exceed t0");
  if ((cfg.T - spec.t0) / cfg.h > kMaxSteps) throw DomainError("(T - t0)/h exceeds 1e8 steps");
  if (cfg.record_every < 1) throw DomainError("record_every must be >= 1");
  const auto d = static_cast<Eigen::Index>(spec.objective.dim);
  if (spec.x0.size() != d || spec.v0.size() != d)
    throw DomainError("initial state dimension does not match the objective");
  if (!spec.x0.allFinite() || !spec.v0.allFinite()) throw DomainError("initial state must be finite");
  require_beta(beta_of(spec.system));
  if (const auto* phi = potential_of(spec.system)) {
    const std::size_t pd = phi->required_dim();
    if (pd != 0 && pd != spec.objective.dim)
      throw DomainError("damping potential dimension does not match the objective");
  }
  if (const auto* yos = std::get_if<schemes::YosidaRK4>(&cfg.scheme)) {
    if (!(yos->lambda > 0.0)) throw DomainError("Yosida parameter must be positive");
  }
}

// Vector field of the smoothed first-order system in (x, w) coordinates,
// where w is the stored companion (ẋ, or ẋ + β∇f(x) for VGH).
struct Smoothed {
  const System& sys;
  const Objective& f;
  double lambda;

  std::pair<Vec, Vec> operator()(double t, const Vec& x, const Vec& w) const {
    const Vec g = f.grad(x);
    return std::visit(
        overloaded{
            [&](const systems::AdigeV& s) -> std::pair<Vec, Vec> {
              return {w, -moreau_grad(s.phi, lambda, w) - g};
            },
            [&](const systems::AdigeVH& s) -> std::pair<Vec, Vec> {
              return {w, -moreau_grad(s.phi, lambda, w) - s.beta * hessian_times(f, x, w) - g};
            },
            [&](const systems::AdigeVGH& s) -> std::pair<Vec, Vec> {
              return {w - s.beta * g, -moreau_grad(s.phi, lambda, w) - g};
            },
            [&](const systems::OpenLoop& s) -> std::pair<Vec, Vec> {
              Vec acc = -s.gamma(t) * w - g;
              if (s.beta != 0.0) acc -= s.beta * hessian_times(f, x, w);
              return {w, acc};
            }},
        sys);
  }
};

PhaseState rk4_step(const Smoothed& field, const PhaseState& s, double t, double h) {
  const auto [k1x, k1w] = field(t, s.x, s.u);
  const auto [k2x, k2w] = field(t + 0.5 * h, s.x + 0.5 * h * k1x, s.u + 0.5 * h * k1w);
  const auto [k3x, k3w] = field(t + 0.5 * h, s.x + 0.5 * h * k2x, s.u + 0.5 * h * k2w);
  const auto [k4x, k4w] = field(t + h, s.x + h * k3x, s.u + h * k3w);
  return {s.x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
          s.u + (h / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)};
}

PhaseState prox_step(const System& sys, const Objective& f, const PhaseState& s, double t,
                     double h) {
  return std::visit(
      overloaded{
          [&](const systems::AdigeV& k) { return step_adige_v(k.phi, f, s, h); },
          [&](const systems::AdigeVH& k) { return step_adige_vh(k.phi, f, s, k.beta, h); },
          [&](const systems::AdigeVGH& k) { return step_adige_vgh(k.phi, f, s, k.beta, h); },
          [&](const systems::OpenLoop& k) { return step_open_loop(k.gamma, f, s, k.beta, t, h); }},
      sys);
}

bool escaped(const PhaseState& s) {
  if (!s.x.allFinite() || !s.u.allFinite()) return true;
  return s.x.norm() > kBlowUp || s.u.norm() > kBlowUp;
}

}  // namespace

// ---------------------------------------------------------------------------

PhaseState step_adige_v(const DampingPotential& phi, const Objective& f, const PhaseState& s,
                        double h) {
  require_step(h);
  Vec u_next = prox_phi(phi, h, s.u - h * f.grad(s.x));
  Vec x_next = s.x + h * u_next;
  return {std::move(x_next), std::move(u_next)};
}

PhaseState step_adige_vh(const DampingPotential& phi, const Objective& f, const PhaseState& s,
                         double beta, double h) {
  require_step(h);
  require_beta(beta);
  const Vec drive = f.grad(s.x) + beta * hessian_times(f, s.x, s.u);
  Vec u_next = prox_phi(phi, h, s.u - h * drive);
  Vec x_next = s.x + h * u_next;
  return {std::move(x_next), std::move(u_next)};
}

PhaseState step_adige_vgh(const DampingPotential& phi, const Objective& f, const PhaseState& s,
                          double beta, double h) {
  require_step(h);
  require_beta(beta);
  const Vec g = f.grad(s.x);
  Vec u_next = prox_phi(phi, h, s.u - h * g);
  Vec x_next = s.x + h * (u_next - beta * g);
  return {std::move(x_next), std::move(u_next)};
}

PhaseState step_open_loop(const std::function<double(double)>& gamma, const Objective& f,
                          const PhaseState& s, double beta, double t, double h) {
  require_step(h);
  require_beta(beta);
  const double damping = gamma(t);
  if (!(damping >= 0.0)) throw DomainError("open-loop damping must be >= 0");
  Vec drive = f.grad(s.x);
  if (beta != 0.0) drive += beta * hessian_times(f, s.x, s.u);
  Vec u_next = (s.u - h * drive) / (1.0 + h * damping);
  Vec x_next = s.x + h * u_next;
  return {std::move(x_next), std::move(u_next)};
}

double trajectory_energy(const DynamicsSpec& spec, const Vec& x, const Vec& v, double f_ref) {
  const double fx = spec.objective.eval(x);
  if (is_vgh(spec.system)) {
    const double beta = beta_of(spec.system);
    return fx - f_ref + 0.5 * (v + beta * spec.objective.grad(x)).squaredNorm();
  }
  return fx - f_ref + 0.5 * v.squaredNorm();
}

Trajectory simulate(const DynamicsSpec& spec, const IntegratorConfig& cfg) {
  validate(spec, cfg);
  const Objective& f = spec.objective;
  const bool vgh = is_vgh(spec.system);
  const double beta = beta_of(spec.system);

  const auto n_steps = static_cast<long long>(std::ceil((cfg.T - spec.t0) / cfg.h - 1e-9));

  PhaseState state{spec.x0, vgh ? Vec(spec.v0 + beta * f.grad(spec.x0)) : spec.v0};

  std::vector<double> ts;
  std::vector<PhaseState> samples;
  const auto expected = static_cast<std::size_t>(n_steps / cfg.record_every + 2);
  ts.reserve(expected);
  samples.reserve(expected);
  ts.push_back(spec.t0);
  samples.push_back(state);

  const auto* yosida = std::get_if<schemes::YosidaRK4>(&cfg.scheme);
  std::optional<Smoothed> field;
  if (yosida) field.emplace(Smoothed{spec.system, f, yosida->lambda});

  for (long long k = 0; k < n_steps; ++k) {
    const double t = spec.t0 + static_cast<double>(k) * cfg.h;
    const bool last = (k == n_steps - 1);
    const double t_next = last ? cfg.T : spec.t0 + static_cast<double>(k + 1) * cfg.h;
    const double h = t_next - t;
    state = yosida ? rk4_step(*field, state, t, h) : prox_step(spec.system, f, state, t, h);
    if (escaped(state)) throw DivergenceError(t_next);
    if (last || (k + 1) % cfg.record_every == 0) {
      ts.push_back(t_next);
      samples.push_back(state);
    }
  }

  Trajectory traj;
  const std::size_t n = ts.size();
  traj.t = std::move(ts);
  traj.x.reserve(n);
  traj.v.reserve(n);
  if (vgh) traj.u.reserve(n);
  std::vector<double> fvals(n);
  std::vector<Vec> grads(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& s = samples[i];
    fvals[i] = f.eval(s.x);
    grads[i] = f.grad(s.x);
    if (vgh) {
      traj.v.push_back(s.u - beta * grads[i]);
      traj.u.push_back(std::move(s.u));
    } else {
      traj.v.push_back(std::move(s.u));
    }
    traj.x.push_back(std::move(s.x));
  }
  traj.f_ref = f.min_value ? *f.min_value : *std::min_element(fvals.begin(), fvals.end());
  traj.energy.resize(n);
  traj.grad_norm.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec& w = vgh ? traj.u[i] : traj.v[i];
    traj.energy[i] = fvals[i] - traj.f_ref + 0.5 * w.squaredNorm();
    traj.grad_norm[i] = grads[i].norm();
  }
  return traj;
}

std::vector<std::pair<double, Trajectory>> yosida_path(const DynamicsSpec& spec,
                                                       const IntegratorConfig& config,
                                                       const std::vector<double>& lambdas) {
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    if (!(lambdas[i] < lambdas[i - 1])) throw InputError("lambdas must be strictly decreasing");
  std::vector<std::pair<double, Trajectory>> out;
  out.reserve(lambdas.size());
  for (double lambda : lambdas) {
    IntegratorConfig cfg = config;
    cfg.scheme = schemes::YosidaRK4{lambda};
    out.emplace_back(lambda, simulate(spec, cfg));
  }
  return out;
}

}  // namespace dampdyn
