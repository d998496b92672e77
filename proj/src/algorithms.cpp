#include "dampdyn/algorithms.hpp"

#include "dampdyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dampdyn {

namespace {

constexpr double kBlowUp = 1e12;

bool escaped(const Vec& v) { return !v.allFinite() || v.norm() > kBlowUp; }

void check_start(const Objective& f, const Vec& x0) {
  if (x0.size() != static_cast<Eigen::Index>(f.dim))
    throw DomainError("starting point dimension does not match the objective");
  if (!x0.allFinite()) throw DomainError("starting point must be finite");
}

// Fills u, step_norms and (when energy) the W channel from the x iterates.
void finish_prox_log(IterateLog& log, const Objective& f) {
  const std::size_t n = log.x.size() - 1;
  log.u.resize(n);
  log.W.resize(n);
  log.step_norms.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec dx = log.x[i + 1] - log.x[i];
    log.step_norms[i] = dx.norm();
    log.u[i] = dx / log.h;
    log.W[i] = 0.5 * log.u[i].squaredNorm() + f.eval(log.x[i + 1]);
  }
}

void finish_baseline_log(IterateLog& log, const Objective& f) {
  const std::size_t n = log.x.size() - 1;
  std::vector<double> fx(n);
  for (std::size_t i = 0; i < n; ++i) fx[i] = f.eval(log.x[i + 1]);
  double f_ref = 0.0;
  if (f.min_value) {
    f_ref = *f.min_value;
  } else if (n > 0) {
    f_ref = *std::min_element(fx.begin(), fx.end());
  }
  log.u.resize(n);
  log.W.resize(n);
  log.step_norms.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec dx = log.x[i + 1] - log.x[i];
    log.step_norms[i] = dx.norm();
    log.u[i] = dx / log.h;
    log.W[i] = fx[i] - f_ref;
  }
}

}  // namespace

IterateLog prox_inertial_run(const ProxInertialConfig& cfg) {
  if (!(cfg.h > 0.0) || !std::isfinite(cfg.h)) throw DomainError("step size must be positive");
  if (cfg.max_iter < 1) throw DomainError("max_iter must be positive");
  if (!(cfg.stop_tol >= 0.0)) throw DomainError("stop_tol must be >= 0");
  check_start(cfg.objective, cfg.x0);
  const Vec x1 = cfg.x1.value_or(cfg.x0);
  check_start(cfg.objective, x1);
  if (const std::size_t pd = cfg.phi.required_dim(); pd != 0 && pd != cfg.objective.dim)
    throw DomainError("damping potential dimension does not match the objective");

  IterateLog log;
  log.h = cfg.h;
  log.x.reserve(static_cast<std::size_t>(std::min<long>(cfg.max_iter, 1 << 20)) + 2);
  log.x.push_back(cfg.x0);
  log.x.push_back(x1);

  PhaseState s{x1, (x1 - cfg.x0) / cfg.h};
  bool still = false;  // previous computed velocity was within stop_tol
  for (long n = 0; n < cfg.max_iter; ++n) {
    s = step_adige_v(cfg.phi, cfg.objective, s, cfg.h);
    if (escaped(s.x) || escaped(s.u)) {
      finish_prox_log(log, cfg.objective);
      throw AlgorithmDivergence(static_cast<double>(n), std::move(log));
    }
    log.x.push_back(s.x);
    // A single small velocity can be a turning point; two in a row means x is a fixed point.
    const bool small = s.u.norm() <= cfg.stop_tol;
    if (small && still) {
      log.stopped = true;
      break;
    }
    still = small;
  }
  finish_prox_log(log, cfg.objective);
  return log;
}

DescentCertificate prox_inertial_certificate(const IterateLog& log, double gamma_phi, double L) {
  DescentCertificate cert;
  const double coeff = log.h * (gamma_phi - 0.5 * L * log.h);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n + 1 < log.W.size(); ++n) {
    const double lhs = log.W[n + 1] - log.W[n] + coeff * log.u[n + 1].squaredNorm();
    worst = std::max(worst, lhs);
    if (lhs > 1e-10 * (1.0 + std::abs(log.W[n]))) ++cert.violations;
  }
  cert.worst_slack = std::isfinite(worst) ? worst : 0.0;
  for (const Vec& u : log.u) cert.sum_sq_steps += u.squaredNorm();
  return cert;
}

IterateLog nesterov_agm(const Objective& f, double s, double alpha, const Vec& x0, long max_iter) {
  if (!(s > 0.0)) throw DomainError("step s must be positive");
  if (!(alpha >= 3.0)) throw DomainError("alpha must be >= 3");
  if (max_iter < 1) throw DomainError("max_iter must be positive");
  check_start(f, x0);
  IterateLog log;
  log.h = std::sqrt(s);
  log.x.push_back(x0);
  Vec prev = x0;
  Vec cur = x0;
  for (long k = 1; k <= max_iter; ++k) {
    const Vec y = cur + (1.0 - alpha / static_cast<double>(k)) * (cur - prev);
    Vec next = y - s * f.grad(y);
    if (escaped(next)) {
      finish_baseline_log(log, f);
      throw AlgorithmDivergence(static_cast<double>(k), std::move(log));
    }
    prev = std::move(cur);
    cur = std::move(next);
    log.x.push_back(cur);
  }
  finish_baseline_log(log, f);
  return log;
}

IterateLog heavy_ball(const Objective& f, double s, double momentum, const Vec& x0, long max_iter) {
  if (!(s > 0.0)) throw DomainError("step s must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw DomainError("momentum must lie in [0, 1)");
  if (max_iter < 1) throw DomainError("max_iter must be positive");
  check_start(f, x0);
  IterateLog log;
  log.h = std::sqrt(s);
  log.x.push_back(x0);
  Vec prev = x0;
  Vec cur = x0;
  for (long k = 0; k < max_iter; ++k) {
    Vec next = cur + momentum * (cur - prev) - s * f.grad(cur);
    if (escaped(next)) {
      finish_baseline_log(log, f);
      throw AlgorithmDivergence(static_cast<double>(k), std::move(log));
    }
    prev = std::move(cur);
    cur = std::move(next);
    log.x.push_back(cur);
  }
  finish_baseline_log(log, f);
  return log;
}

}  // namespace dampdyn
