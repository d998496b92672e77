#pragma once

#include "dampdyn/catalog.hpp"
#include "dampdyn/potentials.hpp"

#include <functional>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace dampdyn {

namespace systems {

/// ẍ + ∂φ(ẋ) + ∇f(x) ∋ 0.
struct AdigeV {
  DampingPotential phi;
};

/// ẍ + ∂φ(ẋ) + β∇²f(x)ẋ + ∇f(x) ∋ 0.
struct AdigeVH {
  DampingPotential phi;
  double beta = 0.0;
};

/// ẍ + ∂φ(ẋ + β∇f(x)) + β∇²f(x)ẋ + ∇f(x) ∋ 0, integrated in the first-order
/// form ẋ = u − β∇f(x), u̇ + ∂φ(u) + ∇f(x) ∋ 0.
struct AdigeVGH {
  DampingPotential phi;
  double beta = 0.0;
};

/// ẍ + γ(t)ẋ + β∇²f(x)ẋ + ∇f(x) = 0. Constant γ gives HBF/DIN, γ = α/t gives
/// AVD / DIN-AVD.
struct OpenLoop {
  std::function<double(double)> gamma;
  double beta = 0.0;
};

}  // namespace systems

using System = std::variant<systems::AdigeV, systems::AdigeVH, systems::AdigeVGH, systems::OpenLoop>;

struct DynamicsSpec {
  System system;
  Objective objective;
  Vec x0;
  Vec v0;
  double t0 = 0.0;
};

namespace schemes {
struct ProxSemiImplicit {};
/// Classical RK4 on the system with ∂φ replaced by ∇φ_λ.
struct YosidaRK4 {
  double lambda;
};
}  // namespace schemes

using Scheme = std::variant<schemes::ProxSemiImplicit, schemes::YosidaRK4>;

struct IntegratorConfig {
  double h = 1e-3;
  double T = 10.0;
  Scheme scheme = schemes::ProxSemiImplicit{};
  int record_every = 1;
};

/// Phase-space point. For V/VH/open-loop systems u = ẋ; for VGH
/// u = ẋ + β∇f(x).
struct PhaseState {
  Vec x;
  Vec u;
};

/// Sampled path. All channels share one length.
struct Trajectory {
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> v;
  std::vector<double> energy;
  std::vector<double> grad_norm;
  /// VGH companion u = ẋ + β∇f(x); empty for other systems.
  std::vector<Vec> u;
  double f_ref = 0.0;

  std::size_t size() const { return t.size(); }
  std::size_t dim() const { return x.empty() ? 0 : static_cast<std::size_t>(x.front().size()); }
  bool has_u() const { return !u.empty(); }
};

// One step of each scheme. These are the building blocks of simulate() and
// are exposed for direct testing.

PhaseState step_adige_v(const DampingPotential& phi, const Objective& f, const PhaseState& s,
                        double h);

PhaseState step_adige_vh(const DampingPotential& phi, const Objective& f, const PhaseState& s,
                         double beta, double h);

PhaseState step_adige_vgh(const DampingPotential& phi, const Objective& f, const PhaseState& s,
                          double beta, double h);

PhaseState step_open_loop(const std::function<double(double)>& gamma, const Objective& f,
                          const PhaseState& s, double beta, double t, double h);

/// Integrates spec on [t0, T]. Throws DivergenceError when ‖x‖ or ‖u‖ exceeds
/// 1e12 or turns non-finite.
Trajectory simulate(const DynamicsSpec& spec, const IntegratorConfig& config);

/// Runs the YosidaRK4(λ) scheme for every λ on the grid of config.
std::vector<std::pair<double, Trajectory>> yosida_path(const DynamicsSpec& spec,
                                                       const IntegratorConfig& config,
                                                       const std::vector<double>& lambdas);

/// Energy of one sample, using the same formula simulate() records.
double trajectory_energy(const DynamicsSpec& spec, const Vec& x, const Vec& v, double f_ref);

}  // namespace dampdyn
