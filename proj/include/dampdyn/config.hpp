#pragma once

#include "dampdyn/diagnostics.hpp"
#include "dampdyn/potentials.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dampdyn {

/// Parse failure; holds one "line N: message" entry per problem found.
struct ConfigError : Error {
  explicit ConfigError(std::vector<std::string> errors);
  std::vector<std::string> errors;
};

/// Parsed damping-potential expression, e.g. "sum(viscous:1; dry:0.1)".
struct PhiSpec {
  std::string kind;  // power | dry | viscous | quadratic | sum | max
  std::vector<double> args;  // power: r, p; dry: r; viscous: gamma; quadratic: row-major entries
  std::vector<PhiSpec> children;

  DampingPotential build() const;
  std::string describe() const;
};

/// Throws ConfigError (without line numbers) on malformed text.
PhiSpec parse_phi(std::string_view text);

struct RateRequest {
  RateModel model = RateModel::Exponential;
  std::optional<Window> window;
  std::optional<double> rate_min;
  std::optional<double> rate_max;
  std::optional<double> r2_min;
};

struct CrossingRequest {
  double a = -1.0;
  double b = 1.0;
  std::size_t component = 0;
  std::optional<long> min_count;
};

struct AngleRequest {
  double lambda = 0.0;
  double gamma_phi = 0.0;
  double delta = 0.0;
  double R = 1.0;
  double eps = 1.0;
  int grid_n = 101;
};

struct DescentRequest {
  double gamma_phi = 0.0;
  double L = 0.0;
};

/// Requested checks. Each present field is one verdict in the report.
struct DiagnosticRequests {
  std::optional<double> energy_monotone;  // per-step slack
  std::optional<RateRequest> rate;        // fitted on f(x) − f_ref
  std::optional<CrossingRequest> crossings;
  std::optional<double> stabilization;    // tol; passes when T* exists
  std::optional<double> terminal_grad;    // bound on the final ‖∇f‖
  std::optional<double> ergodic_max;      // bound on ‖ergodic tail‖
  std::optional<std::size_t> sign_changes;  // component, reported only
  std::optional<AngleRequest> angle;
  std::optional<DescentRequest> descent;      // algorithm runs only

  bool empty() const;
};

enum class SystemKind { AdigeV, AdigeVH, AdigeVGH, OpenLoop, ProxInertial, Nesterov, HeavyBall };

bool is_algorithm(SystemKind k);
std::string_view system_name(SystemKind k);

struct SweepSpec {
  std::string param;
  std::vector<double> values;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::string problem;
  std::uint64_t seed = 0;
  bool plot = true;

  SystemKind system = SystemKind::AdigeV;
  std::optional<PhiSpec> phi;
  double beta = 0.0;
  std::optional<double> gamma;  // open loop: constant damping
  std::optional<double> alpha;  // open loop: α/t damping; nesterov: α
  std::vector<double> x0;
  std::vector<double> v0;
  std::vector<double> x1;
  double t0 = 0.0;
  double s = 0.0;
  double momentum = 0.0;
  long max_iter = 100000;
  double stop_tol = 1e-10;

  double h = 1e-3;
  double T = 10.0;
  bool yosida = false;
  double lambda = 0.0;
  int record_every = 1;

  DiagnosticRequests diagnostics;
  std::optional<SweepSpec> sweep;
};

/// Sections [scenario], [system], [integrator], [diagnostics], [sweep];
/// `key = value` lines; `#` starts a comment. Throws ConfigError listing
/// every problem with its line number.
ScenarioConfig parse_config(std::string_view text);

ScenarioConfig load_config(const std::string& path);

/// Copy of cfg with the sweep parameter set to value. Throws ConfigError
/// when the parameter does not resolve to a field of cfg.
ScenarioConfig apply_sweep_value(const ScenarioConfig& cfg, const std::string& param, double value);

/// Shortest round-trip decimal form, used in file names and reports.
std::string format_number(double v);

}  // namespace dampdyn
