#include "dampdyn/runner.hpp"

#include "dampdyn/catalog.hpp"
#include "dampdyn/diagnostics.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace dampdyn {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string vec_text(const Vec& v) {
  std::string out = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? ", " : "") + short_num(v[i]);
  return out + ")";
}

Vec to_vec(const std::vector<double>& vals, std::size_t dim) {
  Vec v = Vec::Zero(static_cast<Eigen::Index>(dim));
  if (vals.size() == 1) v.setConstant(vals[0]);
  else
    for (std::size_t i = 0; i < vals.size() && i < dim; ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_cell(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InputError("malformed CSV cell '" + s + "'");
  return v;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw InputError("CSV column '" + name + "' missing");
  }
  bool has(const std::string& name) const {
    for (const auto& h : header)
      if (h == name) return true;
    return false;
  }
};

CsvTable read_table(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty CSV");
  t.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split_csv_line(line));
    if (t.rows.back().size() != t.header.size()) throw InputError("CSV row width differs from header");
  }
  return t;
}

std::size_t count_prefixed(const CsvTable& t, const std::string& prefix) {
  std::size_t n = 0;
  while (t.has(prefix + std::to_string(n))) ++n;
  return n;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// f(x) − f_ref per sample, recovered from the energy channel.
std::vector<double> objective_gap(const Trajectory& traj) {
  std::vector<double> out(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Vec& w = traj.has_u() ? traj.u[k] : traj.v[k];
    out[k] = traj.energy[k] - 0.5 * w.squaredNorm();
  }
  return out;
}

void add_check(RunArtifacts& art, std::string name, bool ok, std::string detail) {
  art.checks.push_back({std::move(name), ok, std::move(detail)});
}

void check_angle(const ScenarioConfig& cfg, std::uint64_t seed, RunArtifacts& art) {
  const auto& a = *cfg.diagnostics.angle;
  const auto entry = lookup_problem(cfg.problem);
  const auto phi = cfg.phi->build();
  const double beta = cfg.system == SystemKind::AdigeVH ? cfg.beta : 0.0;
  try {
    const auto cert = angle_certificate(entry.objective, phi, a.lambda, beta, Box{a.R, a.eps},
                                        a.grid_n, AngleConstants{a.gamma_phi, a.delta, std::nullopt},
                                        seed);
    std::string detail = "alpha_bound " + short_num(cert.alpha_bound) + ", empirical_min_ratio " +
                         short_num(cert.empirical_min_ratio) + ", samples " +
                         std::to_string(cert.samples) + ", M " + short_num(cert.M) + " (estimated)";
    bool ok = cert.passed;
    if (cert.b) {
      detail += ", b " + short_num(*cert.b) + ", max |gradE|/|F| " + short_num(cert.max_domination_ratio);
      ok = ok && cert.domination_holds.value_or(false);
    }
    add_check(art, "angle", ok, detail);
  } catch (const ConditionError& e) {
    add_check(art, "angle", false, std::string("refused: ") + e.what());
  }
}

void evaluate_trajectory(const ScenarioConfig& cfg, std::uint64_t seed, const Trajectory& traj,
                         RunArtifacts& art) {
  const auto& d = cfg.diagnostics;
  art.observations.push_back("samples: " + std::to_string(traj.size()));
  if (traj.size() == 0) return;
  art.observations.push_back("t_final: " + short_num(traj.t.back()));
  art.observations.push_back("x_final: " + vec_text(traj.x.back()));
  art.observations.push_back("terminal_grad_norm: " + short_num(traj.grad_norm.back()));
  const auto base = basic_report(traj);
  art.observations.push_back("energy_increases_above_1e-9: " + std::to_string(base.energy.violations));
  art.observations.push_back("ergodic_tail: " + vec_text(base.ergodic_mean_tail));
  if (traj.has_u()) {
    art.observations.push_back("stabilization_time_1e-8: " +
                               (base.stabilization_time ? short_num(*base.stabilization_time) : "none"));
  }

  if (d.energy_monotone) {
    const auto e = check_energy_monotone(traj, *d.energy_monotone);
    add_check(art, "energy_monotone", e.violations == 0,
              "violations " + std::to_string(e.violations) + ", worst step increase " +
                  short_num(e.worst_slack));
  }
  if (d.rate) {
    const auto& r = *d.rate;
    try {
      const auto fit = fit_rate(traj.t, objective_gap(traj), r.model, r.window);
      bool ok = true;
      if (r.rate_min) ok = ok && fit.rate >= *r.rate_min;
      if (r.rate_max) ok = ok && fit.rate <= *r.rate_max;
      if (r.r2_min) ok = ok && fit.r2 >= *r.r2_min;
      add_check(art, "rate", ok,
                std::string(r.model == RateModel::Power ? "power" : "exponential") + " rate " +
                    short_num(fit.rate) + ", c " + short_num(fit.c) + ", r2 " + short_num(fit.r2) +
                    ", window [" + short_num(fit.window.lo) + ", " + short_num(fit.window.hi) +
                    "], samples " + std::to_string(fit.samples));
    } catch (const InsufficientDataError& e) {
      add_check(art, "rate", false, e.what());
    }
  }
  if (d.crossings) {
    const auto& c = *d.crossings;
    const auto bc = count_band_crossings(traj, c.a, c.b, c.component);
    const long total = bc.a + bc.b;
    add_check(art, "crossings", !c.min_count || total >= *c.min_count,
              "level " + short_num(c.a) + ": " + std::to_string(bc.a) + ", level " + short_num(c.b) +
                  ": " + std::to_string(bc.b) + ", total " + std::to_string(total));
  }
  if (d.sign_changes) {
    std::vector<double> xs(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) xs[k] = traj.x[k][static_cast<Eigen::Index>(*d.sign_changes)];
    art.observations.push_back("sign_changes_x" + std::to_string(*d.sign_changes) + ": " +
                               std::to_string(count_level_crossings(xs, 0.0)));
  }
  if (d.stabilization) {
    const auto ts = detect_stabilization(traj, *d.stabilization);
    add_check(art, "stabilization", ts.has_value(),
              ts ? "T* " + short_num(*ts) : "no stabilization at tol " + short_num(*d.stabilization));
  }
  if (d.terminal_grad) {
    const double g = traj.grad_norm.back();
    add_check(art, "terminal_grad", g <= *d.terminal_grad,
              "|grad f(x_T)| " + short_num(g) + " vs bound " + short_num(*d.terminal_grad));
  }
  if (d.ergodic_max) {
    const double n = base.ergodic_mean_tail.norm();
    add_check(art, "ergodic_max", n <= *d.ergodic_max,
              "|ergodic tail| " + short_num(n) + " vs bound " + short_num(*d.ergodic_max));
  }
  if (d.angle) check_angle(cfg, seed, art);
}

void evaluate_log(const ScenarioConfig& cfg, const IterateLog& log, RunArtifacts& art) {
  const auto& d = cfg.diagnostics;
  const auto entry = lookup_problem(cfg.problem);
  art.observations.push_back("iterates: " + std::to_string(log.x.size()));
  art.observations.push_back("stopped_early: " + std::string(log.stopped ? "yes" : "no"));
  if (log.x.empty()) return;
  const double g = entry.objective.grad(log.x.back()).norm();
  art.observations.push_back("x_final: " + vec_text(log.x.back()));
  art.observations.push_back("terminal_grad_norm: " + short_num(g));
  double length = 0.0;
  for (double s : log.step_norms) length += s;
  art.observations.push_back("path_length: " + short_num(length));

  if (d.energy_monotone) {
    const auto e = check_energy_monotone(log.W, *d.energy_monotone);
    add_check(art, "energy_monotone", e.violations == 0,
              "violations " + std::to_string(e.violations) + ", worst step increase " +
                  short_num(e.worst_slack));
  }
  if (d.descent) {
    const auto c = prox_inertial_certificate(log, d.descent->gamma_phi, d.descent->L);
    add_check(art, "descent", c.violations == 0,
              "violations " + std::to_string(c.violations) + ", worst slack " + short_num(c.worst_slack) +
                  ", sum |u_n|^2 " + short_num(c.sum_sq_steps));
  }
  if (d.terminal_grad) {
    add_check(art, "terminal_grad", g <= *d.terminal_grad,
              "|grad f(x_N)| " + short_num(g) + " vs bound " + short_num(*d.terminal_grad));
  }
}

std::string report_text(const ScenarioConfig& cfg, const RunArtifacts& art) {
  std::ostringstream os;
  os << "scenario: " << cfg.name << "\n";
  os << "run: " << art.label << "\n";
  os << "problem: " << cfg.problem << "\n";
  os << "system: " << system_name(cfg.system) << "\n";
  if (cfg.phi) os << "phi: " << cfg.phi->describe() << "\n";
  os << "status: " << (art.diverged ? "diverged" : art.error.empty() ? "ok" : "error") << "\n";
  if (!art.error.empty()) os << "error: " << art.error << "\n";
  for (const auto& o : art.observations) os << o << "\n";
  for (const auto& c : art.checks)
    os << "check " << c.name << ": " << (c.passed ? "PASS" : "FAIL") << " (" << c.detail << ")\n";
  os << "verdict: " << (art.passed() ? "PASS" : "FAIL") << "\n";
  return os.str();
}

std::string summary_text(const ScenarioConfig& cfg, const std::vector<RunArtifacts>& runs) {
  std::ostringstream os;
  os << "scenario: " << cfg.name << "\n";
  for (const auto& r : runs) {
    os << r.label << ": " << (r.diverged ? "DIVERGED" : r.passed() ? "PASS" : "FAIL") << "\n";
    for (const auto& o : r.observations) os << "  " << o << "\n";
    for (const auto& c : r.checks)
      os << "  check " << c.name << ": " << (c.passed ? "PASS" : "FAIL") << " (" << c.detail << ")\n";
    if (!r.error.empty()) os << "  error: " << r.error << "\n";
  }
  return os.str();
}

std::string plot_script(const ScenarioConfig& cfg, const std::vector<RunArtifacts>& runs) {
  std::ostringstream os;
  const bool algo = is_algorithm(cfg.system);
  // Iterate CSVs: n, x_0.., u_0.., W, so W is column 2 + 2d (1-based).
  const std::size_t w_col = 2 + 2 * lookup_problem(cfg.problem).objective.dim;
  os << "# " << cfg.name << "\n";
  os << "set datafile separator ','\n";
  os << "set key outside\n";
  if (algo) {
    os << "set logscale y\nset xlabel 'n'\nset ylabel 'W'\n";
  } else {
    os << "set xlabel 't'\nset ylabel 'x_0'\n";
  }
  os << "plot ";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto title = runs[i].label.substr(runs[i].label.find("__") == std::string::npos
                                                ? 0
                                                : runs[i].label.find("__") + 2);
    os << (i ? ", \\\n     " : "") << "'" << runs[i].csv.filename().string() << "' using 1:"
       << (algo ? std::to_string(w_col) : std::string("2")) << " skip 1 with lines title '" << title << "'";
  }
  os << "\n";
  return os.str();
}

template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

RunArtifacts execute_point(const RunPoint& pt, const fs::path& out_dir, std::uint64_t seed) {
  RunArtifacts art;
  art.label = pt.label;
  art.csv = out_dir / (pt.label + ".csv");
  art.report = out_dir / (pt.label + ".report.txt");
  const auto& cfg = pt.config;
  try {
    if (is_algorithm(cfg.system)) {
      const auto entry = lookup_problem(cfg.problem);
      const auto dim = entry.objective.dim;
      IterateLog log;
      try {
        if (cfg.system == SystemKind::ProxInertial) {
          ProxInertialConfig pc{cfg.phi->build(), entry.objective, cfg.h, to_vec(cfg.x0, dim),
                                std::nullopt, cfg.max_iter, cfg.stop_tol};
          if (!cfg.x1.empty()) pc.x1 = to_vec(cfg.x1, dim);
          log = prox_inertial_run(pc);
        } else if (cfg.system == SystemKind::Nesterov) {
          log = nesterov_agm(entry.objective, cfg.s, cfg.alpha.value_or(3.0), to_vec(cfg.x0, dim),
                             cfg.max_iter);
        } else {
          log = heavy_ball(entry.objective, cfg.s, cfg.momentum, to_vec(cfg.x0, dim), cfg.max_iter);
        }
      } catch (const AlgorithmDivergence& e) {
        art.diverged = true;
        art.error = e.what();
        log = e.log;
      }
      write_atomic(art.csv, iterate_csv(log));
      if (!art.diverged) evaluate_log(cfg, log, art);
    } else {
      try {
        const auto traj = simulate(build_dynamics(cfg), build_integrator(cfg));
        write_atomic(art.csv, trajectory_csv(traj));
        evaluate_trajectory(cfg, seed, traj, art);
      } catch (const DivergenceError& e) {
        art.diverged = true;
        art.error = e.what();
      }
    }
  } catch (const std::exception& e) {
    art.error = e.what();
  }
  write_atomic(art.report, report_text(cfg, art));
  return art;
}

RunArtifacts verify_point(const RunPoint& pt, const fs::path& out_dir, std::uint64_t seed) {
  RunArtifacts art;
  art.label = pt.label;
  art.csv = out_dir / (pt.label + ".csv");
  art.report = out_dir / (pt.label + ".report.txt");
  const auto& cfg = pt.config;
  try {
    const std::string text = read_file(art.csv);
    if (is_algorithm(cfg.system)) {
      const double h = cfg.system == SystemKind::ProxInertial ? cfg.h : std::sqrt(cfg.s);
      auto log = parse_iterate_csv(text, h);
      log.stopped = static_cast<long>(log.steps()) < cfg.max_iter;
      evaluate_log(cfg, log, art);
    } else {
      evaluate_trajectory(cfg, seed, parse_trajectory_csv(text), art);
    }
  } catch (const std::exception& e) {
    art.error = e.what();
  }
  return art;
}

}  // namespace

bool RunArtifacts::passed() const {
  if (diverged || !error.empty()) return false;
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

int RunResult::exit_code() const {
  bool failed = false;
  for (const auto& r : runs) {
    if (r.diverged) return 3;
    failed = failed || !r.passed();
  }
  return failed ? 1 : 0;
}

std::vector<RunPoint> plan_runs(const ScenarioConfig& cfg) {
  if (!cfg.sweep) return {{cfg.name, cfg}};
  std::vector<RunPoint> out;
  for (double v : cfg.sweep->values)
    out.push_back({cfg.name + "__" + cfg.sweep->param + "=" + format_number(v),
                   apply_sweep_value(cfg, cfg.sweep->param, v)});
  return out;
}

DynamicsSpec build_dynamics(const ScenarioConfig& cfg) {
  const auto entry = lookup_problem(cfg.problem);
  const auto dim = entry.objective.dim;
  auto make_system = [&]() -> System {
    switch (cfg.system) {
      case SystemKind::AdigeV: return systems::AdigeV{cfg.phi->build()};
      case SystemKind::AdigeVH: return systems::AdigeVH{cfg.phi->build(), cfg.beta};
      case SystemKind::AdigeVGH: return systems::AdigeVGH{cfg.phi->build(), cfg.beta};
      case SystemKind::OpenLoop: {
        std::function<double(double)> g;
        if (cfg.gamma) g = [c = *cfg.gamma](double) { return c; };
        else g = [a = *cfg.alpha](double t) { return a / t; };
        return systems::OpenLoop{std::move(g), cfg.beta};
      }
      default: throw ConfigError({std::string(system_name(cfg.system)) + " is not a dynamics system"});
    }
  };
  Vec v0 = cfg.v0.empty() ? Vec::Zero(static_cast<Eigen::Index>(dim)) : to_vec(cfg.v0, dim);
  return DynamicsSpec{make_system(), entry.objective, to_vec(cfg.x0, dim), std::move(v0), cfg.t0};
}

IntegratorConfig build_integrator(const ScenarioConfig& cfg) {
  IntegratorConfig ic;
  ic.h = cfg.h;
  ic.T = cfg.T;
  ic.record_every = cfg.record_every;
  if (cfg.yosida) ic.scheme = schemes::YosidaRK4{cfg.lambda};
  return ic;
}

RunResult run(const ScenarioConfig& cfg, const fs::path& out_dir, const RunOptions& opts) {
  const auto points = plan_runs(cfg);
  fs::create_directories(out_dir);
  const std::uint64_t seed = opts.seed.value_or(cfg.seed);
  RunResult res;
  res.runs.resize(points.size());
  parallel_for(points.size(), opts.jobs,
               [&](std::size_t i) { res.runs[i] = execute_point(points[i], out_dir, seed); });
  res.summary = out_dir / (cfg.name + ".summary.txt");
  write_atomic(res.summary, summary_text(cfg, res.runs));
  if (cfg.plot) {
    res.plot_script = out_dir / (cfg.name + ".gp");
    write_atomic(*res.plot_script, plot_script(cfg, res.runs));
  }
  return res;
}

RunResult verify(const ScenarioConfig& cfg, const fs::path& out_dir, const RunOptions& opts) {
  const auto points = plan_runs(cfg);
  const std::uint64_t seed = opts.seed.value_or(cfg.seed);
  RunResult res;
  res.runs.resize(points.size());
  parallel_for(points.size(), opts.jobs,
               [&](std::size_t i) { res.runs[i] = verify_point(points[i], out_dir, seed); });
  res.summary = out_dir / (cfg.name + ".summary.txt");
  return res;
}

// ---------------------------------------------------------------------------

std::string trajectory_csv(const Trajectory& traj) {
  const std::size_t d = traj.dim();
  std::string out = "t";
  for (std::size_t i = 0; i < d; ++i) out += ",x_" + std::to_string(i);
  for (std::size_t i = 0; i < d; ++i) out += ",v_" + std::to_string(i);
  out += ",energy,grad_norm";
  if (traj.has_u())
    for (std::size_t i = 0; i < d; ++i) out += ",u_" + std::to_string(i);
  out += "\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out += num(traj.t[k]);
    for (Eigen::Index i = 0; i < traj.x[k].size(); ++i) out += "," + num(traj.x[k][i]);
    for (Eigen::Index i = 0; i < traj.v[k].size(); ++i) out += "," + num(traj.v[k][i]);
    out += "," + num(traj.energy[k]) + "," + num(traj.grad_norm[k]);
    if (traj.has_u())
      for (Eigen::Index i = 0; i < traj.u[k].size(); ++i) out += "," + num(traj.u[k][i]);
    out += "\n";
  }
  return out;
}

Trajectory parse_trajectory_csv(const std::string& text) {
  const auto tab = read_table(text);
  const std::size_t d = count_prefixed(tab, "x_");
  if (d == 0 || count_prefixed(tab, "v_") != d) throw InputError("CSV lacks x_/v_ columns");
  const std::size_t du = count_prefixed(tab, "u_");
  if (du != 0 && du != d) throw InputError("CSV u_ columns do not match x_ columns");
  const auto ct = tab.col("t"), ce = tab.col("energy"), cg = tab.col("grad_norm");
  const auto cx = tab.col("x_0"), cv = tab.col("v_0");
  Trajectory traj;
  for (const auto& row : tab.rows) {
    traj.t.push_back(parse_cell(row[ct]));
    Vec x(static_cast<Eigen::Index>(d)), v(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
      x[static_cast<Eigen::Index>(i)] = parse_cell(row[cx + i]);
      v[static_cast<Eigen::Index>(i)] = parse_cell(row[cv + i]);
    }
    traj.x.push_back(std::move(x));
    traj.v.push_back(std::move(v));
    traj.energy.push_back(parse_cell(row[ce]));
    traj.grad_norm.push_back(parse_cell(row[cg]));
    if (du) {
      const auto cu = tab.col("u_0");
      Vec u(static_cast<Eigen::Index>(d));
      for (std::size_t i = 0; i < d; ++i) u[static_cast<Eigen::Index>(i)] = parse_cell(row[cu + i]);
      traj.u.push_back(std::move(u));
    }
  }
  return traj;
}

std::string iterate_csv(const IterateLog& log) {
  const std::size_t d = log.x.empty() ? 0 : static_cast<std::size_t>(log.x.front().size());
  std::string out = "n";
  for (std::size_t i = 0; i < d; ++i) out += ",x_" + std::to_string(i);
  for (std::size_t i = 0; i < d; ++i) out += ",u_" + std::to_string(i);
  out += ",W,step_norm\n";
  for (std::size_t n = 0; n < log.x.size(); ++n) {
    out += std::to_string(n);
    for (Eigen::Index i = 0; i < log.x[n].size(); ++i) out += "," + num(log.x[n][i]);
    const bool step = n < log.u.size();
    for (std::size_t i = 0; i < d; ++i)
      out += "," + (step ? num(log.u[n][static_cast<Eigen::Index>(i)]) : std::string());
    out += "," + (step ? num(log.W[n]) : std::string());
    out += "," + (step ? num(log.step_norms[n]) : std::string());
    out += "\n";
  }
  return out;
}

IterateLog parse_iterate_csv(const std::string& text, double h) {
  const auto tab = read_table(text);
  const std::size_t d = count_prefixed(tab, "x_");
  if (d == 0 || count_prefixed(tab, "u_") != d) throw InputError("CSV lacks x_/u_ columns");
  const auto cx = tab.col("x_0"), cu = tab.col("u_0"), cw = tab.col("W"), cs = tab.col("step_norm");
  IterateLog log;
  log.h = h;
  for (const auto& row : tab.rows) {
    Vec x(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) x[static_cast<Eigen::Index>(i)] = parse_cell(row[cx + i]);
    log.x.push_back(std::move(x));
    if (row[cw].empty()) continue;
    Vec u(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) u[static_cast<Eigen::Index>(i)] = parse_cell(row[cu + i]);
    log.u.push_back(std::move(u));
    log.W.push_back(parse_cell(row[cw]));
    log.step_norms.push_back(parse_cell(row[cs]));
  }
  return log;
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace dampdyn
