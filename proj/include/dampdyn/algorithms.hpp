#pragma once

#include "dampdyn/catalog.hpp"
#include "dampdyn/potentials.hpp"

#include <optional>
#include <vector>

namespace dampdyn {

struct ProxInertialConfig {
  DampingPotential phi;
  Objective objective;
  double h = 0.1;
  Vec x0;
  /// Second starting point; defaults to x0 (zero initial velocity).
  std::optional<Vec> x1;
  long max_iter = 100000;
  /// Stop once ‖u_n‖ ≤ stop_tol and ‖u_{n+1}‖ ≤ stop_tol for some n ≥ 1.
  double stop_tol = 1e-10;
};

/// Iterates x_0..x_N and the per-step channels, indexed n = 0..N−1:
/// u_n = (x_{n+1} − x_n)/h, W_n = ½‖u_n‖² + f(x_{n+1}), step_norms_n = ‖x_{n+1} − x_n‖.
///
/// For the baselines h is replaced by √s and W_n stores f(x_{n+1}) − f_ref.
struct IterateLog {
  std::vector<Vec> x;
  std::vector<Vec> u;
  std::vector<double> W;
  std::vector<double> step_norms;
  double h = 0.0;
  /// True when the stopping rule fired before max_iter.
  bool stopped = false;

  std::size_t steps() const { return u.size(); }
};

/// Divergence inside a discrete method. Keeps everything logged before the
/// guard fired.
struct AlgorithmDivergence : DivergenceError {
  AlgorithmDivergence(double iteration, IterateLog partial)
      : DivergenceError(iteration), log(std::move(partial)) {}
  IterateLog log;
};

/// x_{n+2} = x_{n+1} + h prox_{hφ}((x_{n+1} − x_n)/h − h∇f(x_{n+1})).
///
/// The velocity fed into each prox is the previous prox output itself, so the
/// iterates coincide bit for bit with repeated step_adige_v calls.
IterateLog prox_inertial_run(const ProxInertialConfig& config);

struct DescentCertificate {
  long violations = 0;
  /// max over n of W_{n+1} − W_n + h(γ − ½Lh)‖u_{n+1}‖² (≤ 0 when certified).
  double worst_slack = 0.0;
  double sum_sq_steps = 0.0;
};

/// Checks W_{n+1} − W_n + h(γ − ½Lh)‖u_{n+1}‖² ≤ 1e−10(1 + |W_n|) for every n.
DescentCertificate prox_inertial_certificate(const IterateLog& log, double gamma_phi, double L);

/// y_k = x_k + (1 − α/k)(x_k − x_{k−1}), x_{k+1} = y_k − s∇f(y_k), with x_0 = x_1.
IterateLog nesterov_agm(const Objective& f, double s, double alpha, const Vec& x0, long max_iter);

/// x_{k+1} = x_k + m(x_k − x_{k−1}) − s∇f(x_k), with x_{−1} = x_0.
IterateLog heavy_ball(const Objective& f, double s, double momentum, const Vec& x0, long max_iter);

}  // namespace dampdyn
