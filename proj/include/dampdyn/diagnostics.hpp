#pragma once

#include "dampdyn/catalog.hpp"
#include "dampdyn/dynamics.hpp"
#include "dampdyn/potentials.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dampdyn {

struct EnergyCheck {
  long violations = 0;
  /// Largest single-step increase energy[k+1] − energy[k] (negative when strictly decreasing).
  double worst_slack = 0.0;
};

/// Counts k with energy[k+1] > energy[k] + per_step_slack.
EnergyCheck check_energy_monotone(const std::vector<double>& energy, double per_step_slack);
EnergyCheck check_energy_monotone(const Trajectory& traj, double per_step_slack);

enum class RateModel { Exponential, Power };

struct Window {
  double lo;
  double hi;
};

/// Exponential: y ≈ c·e^{−rate·t}. Power: y ≈ c·t^{−rate}.
struct RateFit {
  RateModel model;
  double c = 0.0;
  double rate = 0.0;
  Window window{0.0, 0.0};
  double r2 = 0.0;
  std::size_t samples = 0;
};

/// Least squares on (t, log y) or (log t, log y) over the samples inside the
/// window with y > 0. Without a window the first 10% of the time span is
/// dropped. Throws InsufficientDataError below 10 usable samples.
RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& y, RateModel model,
                 std::optional<Window> window = std::nullopt);

/// Strict sign changes of series − level; values within 1e−12 of the level
/// carry no sign.
long count_level_crossings(const std::vector<double>& series, double level);

struct BandCrossings {
  long a = 0;
  long b = 0;
};

BandCrossings count_band_crossings(const Trajectory& traj, double a, double b,
                                   std::size_t component);

struct ErgodicAverage {
  std::vector<double> t;
  /// Running average (1/(t − t0)) ∫_{t0}^t x; the first entry is x(t0).
  std::vector<Vec> mean;
  Vec tail;
};

ErgodicAverage ergodic_average(const Trajectory& traj);

/// Smallest recorded T* with ‖u(t)‖ ≤ tol for every recorded t ≥ T*.
/// Throws InputError when the trajectory has no u channel.
std::optional<double> detect_stabilization(const Trajectory& traj, double tol);

struct YosidaGaps {
  std::vector<double> gaps;
  bool strictly_decreasing = true;
};

/// gap_i = max_k ‖(x, v)_{λ_i}(t_k) − (x, v)_{λ_{i+1}}(t_k)‖. Throws InputError
/// when the runs are not on one grid.
YosidaGaps yosida_cauchy_check(const std::vector<std::pair<double, Trajectory>>& path);

/// max_k ‖(x, v)_a(t_k) − (x, v)_b(t_k)‖ on a shared grid.
double phase_sup_distance(const Trajectory& a, const Trajectory& b);

/// Γ = {‖x‖ ≤ R, ‖u‖ ≤ eps}.
struct Box {
  double R;
  double eps;
};

/// Local constants of φ on ‖u‖ ≤ eps: φ(u) ≥ gamma‖u‖², ‖∇φ(u)‖ ≤ delta‖u‖.
/// M bounds ‖∇²f‖ on the x-ball; estimated from hvp when absent.
struct AngleConstants {
  double gamma;
  double delta;
  std::optional<double> M;
};

struct AngleCertificate {
  double lambda = 0.0;
  double beta = 0.0;
  double alpha_bound = 0.0;
  double empirical_min_ratio = 0.0;
  Box domain{0.0, 0.0};
  std::size_t samples = 0;
  double M = 0.0;
  bool M_estimated = false;
  bool passed = false;
  /// Gradient domination ‖∇E_λ‖ ≤ b‖F‖; computed for β = 0 only.
  std::optional<double> b;
  std::optional<bool> domination_holds;
  double max_domination_ratio = 0.0;
};

/// Samples ⟨∇E_λ, F⟩/(‖∇E_λ‖‖F‖) for E_λ = ½‖u‖² + f(x) + λ⟨∇f(x), u⟩ and
/// F(x, u) = (−u, ∇φ(u) + ∇f(x) + β∇²f(x)u) on a lattice with grid_n points
/// per coordinate. Throws ConditionError, naming the inequality, when λ is
/// not admissible.
AngleCertificate angle_certificate(const Objective& f, const DampingPotential& phi, double lambda,
                                   double beta, Box box, int grid_n, AngleConstants constants,
                                   std::uint64_t seed = 0);

/// Upper bound on ‖∇²f(x)‖ over ‖x‖ ≤ R: 50 power-iteration steps of hvp at
/// 20 random points.
double estimate_hessian_bound(const Objective& f, double R, std::uint64_t seed);

/// Max |residual| of the family's governing equation at the closed form,
/// evaluated analytically at the given times.
double closed_form_residual(const ProblemCatalogEntry& entry, const std::vector<double>& times);

/// Verdicts computed from a trajectory alone.
struct DiagnosticsReport {
  EnergyCheck energy;
  std::optional<RateFit> rate;
  std::map<double, long> crossings;
  Vec ergodic_mean_tail;
  std::optional<double> stabilization_time;
  double terminal_grad_norm = 0.0;
};

/// Energy check at slack 1e−9, ergodic tail, terminal gradient, and the
/// stabilization time at tol 1e−8 when the u channel exists.
DiagnosticsReport basic_report(const Trajectory& traj);

}  // namespace dampdyn
