#pragma once

#include "dampdyn/algorithms.hpp"
#include "dampdyn/config.hpp"
#include "dampdyn/dynamics.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dampdyn {

namespace fs = std::filesystem;

struct RunOptions {
  int jobs = 1;
  /// Overrides the scenario seed.
  std::optional<std::uint64_t> seed;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunArtifacts {
  std::string label;
  fs::path csv;
  fs::path report;
  std::vector<CheckResult> checks;
  /// "key: value" lines copied into the report.
  std::vector<std::string> observations;
  bool diverged = false;
  /// Non-empty when the run aborted.
  std::string error;

  bool passed() const;
};

struct RunResult {
  std::vector<RunArtifacts> runs;
  std::optional<fs::path> plot_script;
  fs::path summary;

  /// 0 all checks pass, 1 a check failed or a run aborted, 3 a run diverged.
  int exit_code() const;
};

/// One run of a scenario: the sweep point (if any) applied to the config.
struct RunPoint {
  std::string label;
  ScenarioConfig config;
};

/// Expands the sweep in the order listed. Labels are `name` or
/// `name__param=value`.
std::vector<RunPoint> plan_runs(const ScenarioConfig& cfg);

DynamicsSpec build_dynamics(const ScenarioConfig& cfg);
IntegratorConfig build_integrator(const ScenarioConfig& cfg);

/// Executes every point, writing `<label>.csv` and `<label>.report.txt` into
/// out_dir plus `<name>.summary.txt` and, when plotting is on, `<name>.gp`.
/// Points run on up to `jobs` threads; file contents do not depend on it.
RunResult run(const ScenarioConfig& cfg, const fs::path& out_dir, const RunOptions& opts = {});

/// Re-evaluates the diagnostics from CSVs previously written by run().
RunResult verify(const ScenarioConfig& cfg, const fs::path& out_dir, const RunOptions& opts = {});

// CSV columns: t, x_0.., v_0.., energy, grad_norm[, u_0..] for trajectories;
// n, x_0.., u_0.., W, step_norm for iterate logs (row n holds x_n and the
// step quantities of index n, empty on the last row).
std::string trajectory_csv(const Trajectory& traj);
Trajectory parse_trajectory_csv(const std::string& text);
std::string iterate_csv(const IterateLog& log);
IterateLog parse_iterate_csv(const std::string& text, double h);

/// Writes to a sibling temp file, then renames over path.
void write_atomic(const fs::path& path, const std::string& content);

}  // namespace dampdyn
