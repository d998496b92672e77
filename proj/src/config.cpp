#include "dampdyn/config.hpp"

#include "dampdyn/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace dampdyn {

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
  std::string out;
  for (const auto& e : errors) out += (out.empty() ? "" : "\n") + e;
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

double to_real(const std::string& s) {
  double v = 0.0;
  const auto t = trim(s);
  const auto* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (t.empty() || ec != std::errc() || ptr != end || !std::isfinite(v))
    throw std::invalid_argument("expected a real number, got '" + t + "'");
  return v;
}

long to_int(const std::string& s) {
  long v = 0;
  const auto t = trim(s);
  const auto* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (t.empty() || ec != std::errc() || ptr != end)
    throw std::invalid_argument("expected an integer, got '" + t + "'");
  return v;
}

std::vector<double> to_reals(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : split(s, ',')) out.push_back(to_real(tok));
  return out;
}

bool to_bool(const std::string& s) {
  const auto t = lower(trim(s));
  if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
  if (t == "false" || t == "no" || t == "0" || t == "off") return false;
  throw std::invalid_argument("expected a boolean, got '" + t + "'");
}

// Splits at separators that are not nested inside parentheses.
std::vector<std::string> split_top(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

const std::map<std::string, std::set<std::string>>& section_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"scenario", {"name", "problem", "seed", "plot"}},
      {"system",
       {"system", "phi", "beta", "gamma", "alpha", "x0", "v0", "x1", "t0", "s", "momentum",
        "max_iter", "stop_tol"}},
      {"integrator", {"h", "T", "scheme", "lambda", "record_every"}},
      {"diagnostics",
       {"energy_monotone", "rate", "rate_min", "rate_max", "r2_min", "crossings",
        "crossings_component", "crossings_min", "stabilization", "terminal_grad", "ergodic_max",
        "sign_changes", "angle", "descent"}},
      {"sweep", {"param", "values"}},
  };
  return keys;
}

std::optional<SystemKind> system_from_name(const std::string& s) {
  static const std::map<std::string, SystemKind> names{
      {"adige_v", SystemKind::AdigeV},           {"adige_vh", SystemKind::AdigeVH},
      {"adige_vgh", SystemKind::AdigeVGH},       {"open_loop", SystemKind::OpenLoop},
      {"prox_inertial", SystemKind::ProxInertial}, {"nesterov", SystemKind::Nesterov},
      {"heavy_ball", SystemKind::HeavyBall}};
  auto it = names.find(lower(s));
  if (it == names.end()) return std::nullopt;
  return it->second;
}

const std::set<std::string>& sweepable() {
  static const std::set<std::string> p{"p",     "r",      "beta", "h",  "T",  "alpha",  "gamma",
                                       "lambda", "x0",    "v0",   "s", "momentum"};
  return p;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errs)
    : Error(join_errors(errs)), errors(std::move(errs)) {}

// ---------------------------------------------------------------------------
// Potentials

DampingPotential PhiSpec::build() const {
  if (kind == "power") return DampingPotential::power(args.at(0), args.at(1));
  if (kind == "dry") return DampingPotential::dry(args.at(0));
  if (kind == "viscous") return DampingPotential::viscous(args.at(0));
  if (kind == "quadratic") {
    const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(args.size()))));
    Mat A(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) A(i, j) = args[static_cast<std::size_t>(i * n + j)];
    return DampingPotential::quadratic_form(std::move(A));
  }
  std::vector<DampingPotential> parts;
  for (const auto& c : children) parts.push_back(c.build());
  if (kind == "sum") return DampingPotential::sum(std::move(parts));
  return DampingPotential::max(parts.at(0), parts.at(1));
}

std::string PhiSpec::describe() const {
  if (kind == "power") return "power:r=" + format_number(args[0]) + ",p=" + format_number(args[1]);
  if (kind == "sum" || kind == "max") {
    std::string out = kind + "(";
    for (std::size_t i = 0; i < children.size(); ++i) out += (i ? "; " : "") + children[i].describe();
    return out + ")";
  }
  std::string out = kind + ":";
  for (std::size_t i = 0; i < args.size(); ++i) out += (i ? "," : "") + format_number(args[i]);
  return out;
}

PhiSpec parse_phi(std::string_view raw) {
  const std::string text = trim(raw);
  auto fail = [&](const std::string& why) -> ConfigError {
    return ConfigError({"phi '" + text + "': " + why});
  };
  PhiSpec spec;
  if (const auto open = text.find('('); open != std::string::npos) {
    spec.kind = lower(trim(text.substr(0, open)));
    if (spec.kind != "sum" && spec.kind != "max") throw fail("only sum(...) and max(...) take parentheses");
    if (text.back() != ')') throw fail("missing closing parenthesis");
    for (const auto& part : split_top(text.substr(open + 1, text.size() - open - 2), ';'))
      spec.children.push_back(parse_phi(part));
    if (spec.kind == "max" && spec.children.size() != 2) throw fail("max takes exactly two terms");
    return spec;
  }
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw fail("expected kind:parameters");
  spec.kind = lower(trim(text.substr(0, colon)));
  const std::string params = text.substr(colon + 1);
  try {
    if (spec.kind == "power") {
      double r = 1.0, p = 2.0;
      bool have_p = false;
      const auto toks = split(params, ',');
      for (std::size_t i = 0; i < toks.size(); ++i) {
        const auto eq = toks[i].find('=');
        if (eq == std::string::npos) {
          if (toks.size() != 2) throw std::invalid_argument("use power:r=..,p=.. or power:r,p");
          (i == 0 ? r : p) = to_real(toks[i]);
          have_p = have_p || i == 1;
          continue;
        }
        const auto key = trim(toks[i].substr(0, eq));
        const double v = to_real(toks[i].substr(eq + 1));
        if (key == "r") r = v;
        else if (key == "p") { p = v; have_p = true; }
        else throw std::invalid_argument("unknown power parameter '" + key + "'");
      }
      if (!have_p) throw std::invalid_argument("power needs p");
      spec.args = {r, p};
    } else if (spec.kind == "dry" || spec.kind == "viscous") {
      auto toks = split(params, ',');
      if (toks.size() != 1) throw std::invalid_argument(spec.kind + " takes one parameter");
      auto tok = toks[0];
      if (auto eq = tok.find('='); eq != std::string::npos) tok = tok.substr(eq + 1);
      spec.args = {to_real(tok)};
    } else if (spec.kind == "quadratic") {
      spec.args = to_reals(params);
      const auto n = std::llround(std::sqrt(static_cast<double>(spec.args.size())));
      if (n * n != static_cast<long long>(spec.args.size()))
        throw std::invalid_argument("quadratic needs n*n matrix entries");
    } else {
      throw std::invalid_argument("unknown kind '" + spec.kind + "'");
    }
  } catch (const std::invalid_argument& e) {
    throw fail(e.what());
  }
  return spec;
}

// ---------------------------------------------------------------------------

bool DiagnosticRequests::empty() const {
  return !energy_monotone && !rate && !crossings && !stabilization && !terminal_grad &&
         !ergodic_max && !sign_changes && !angle && !descent;
}

bool is_algorithm(SystemKind k) {
  return k == SystemKind::ProxInertial || k == SystemKind::Nesterov || k == SystemKind::HeavyBall;
}

std::string_view system_name(SystemKind k) {
  switch (k) {
    case SystemKind::AdigeV: return "adige_v";
    case SystemKind::AdigeVH: return "adige_vh";
    case SystemKind::AdigeVGH: return "adige_vgh";
    case SystemKind::OpenLoop: return "open_loop";
    case SystemKind::ProxInertial: return "prox_inertial";
    case SystemKind::Nesterov: return "nesterov";
    case SystemKind::HeavyBall: return "heavy_ball";
  }
  return "?";
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::to_string(v);
}

// ---------------------------------------------------------------------------

namespace {

// Semantic checks shared by parse_config and apply_sweep_value.
std::vector<std::string> validate(const ScenarioConfig& c, const std::map<std::string, int>& lines) {
  std::vector<std::string> errs;
  auto at = [&](const std::string& key, const std::string& msg) {
    auto it = lines.find(key);
    errs.push_back((it != lines.end() ? "line " + std::to_string(it->second) + ": " : "") + msg);
  };

  std::optional<ProblemCatalogEntry> entry;
  if (c.problem.empty()) {
    at("problem", "missing required key 'problem'");
  } else {
    try {
      entry = lookup_problem(c.problem);
    } catch (const Error& e) {
      at("problem", e.what());
    }
  }

  const bool needs_phi = c.system == SystemKind::AdigeV || c.system == SystemKind::AdigeVH ||
                         c.system == SystemKind::AdigeVGH || c.system == SystemKind::ProxInertial;
  if (needs_phi && !c.phi) at("system", std::string(system_name(c.system)) + " needs 'phi'");
  if (c.phi) {
    try {
      const auto phi = c.phi->build();
      if (entry && phi.required_dim() != 0 && phi.required_dim() != entry->objective.dim)
        at("phi", "damping potential dimension does not match the problem");
    } catch (const Error& e) {
      at("phi", e.what());
    }
  }
  if (!(c.beta >= 0.0)) at("beta", "beta must be >= 0");
  const bool needs_hvp = c.system == SystemKind::AdigeVH ||
                         (c.system == SystemKind::OpenLoop && c.beta > 0.0) ||
                         c.diagnostics.angle.has_value();
  if (needs_hvp && entry && !entry->objective.has_hvp())
    at("problem", "problem " + entry->id + " has no Hessian-vector product");

  if (c.system == SystemKind::OpenLoop) {
    if (c.gamma.has_value() == c.alpha.has_value())
      at("system", "open_loop needs exactly one of 'gamma' (constant) or 'alpha' (alpha/t)");
    if (c.gamma && !(*c.gamma >= 0.0)) at("gamma", "gamma must be >= 0");
    if (c.alpha && !(*c.alpha >= 0.0)) at("alpha", "alpha must be >= 0");
    if (c.alpha && !(c.t0 > 0.0)) at("t0", "alpha/t damping needs t0 > 0");
  }
  if (c.system == SystemKind::Nesterov || c.system == SystemKind::HeavyBall) {
    if (!(c.s > 0.0)) at("s", "step 's' must be positive");
  }
  if (c.system == SystemKind::Nesterov && c.alpha && !(*c.alpha >= 3.0))
    at("alpha", "nesterov needs alpha >= 3");
  if (c.system == SystemKind::HeavyBall && !(c.momentum >= 0.0 && c.momentum < 1.0))
    at("momentum", "momentum must lie in [0, 1)");
  if (c.max_iter < 1) at("max_iter", "max_iter must be positive");
  if (!(c.stop_tol >= 0.0)) at("stop_tol", "stop_tol must be >= 0");

  if (c.x0.empty()) {
    at("x0", "missing required key 'x0'");
  } else if (entry) {
    const std::size_t d = entry->objective.dim;
    auto dim_ok = [&](const std::vector<double>& v, const char* key) {
      if (!v.empty() && v.size() != 1 && v.size() != d)
        at(key, std::string(key) + " has " + std::to_string(v.size()) + " entries, problem has dim " +
                    std::to_string(d));
    };
    dim_ok(c.x0, "x0");
    dim_ok(c.v0, "v0");
    dim_ok(c.x1, "x1");
  }

  if (!(c.h > 0.0)) at("h", "h must be positive");
  if (!is_algorithm(c.system)) {
    if (!(c.T > c.t0)) at("T", "T must exceed t0");
    else if (c.h > 0.0 && (c.T - c.t0) / c.h > 1e8) at("h", "(T - t0)/h exceeds 1e8 steps");
  }
  if (c.record_every < 1) at("record_every", "record_every must be >= 1");
  if (c.yosida && !(c.lambda > 0.0)) at("lambda", "scheme yosida_rk4 needs lambda > 0");

  const auto& d = c.diagnostics;
  if (d.descent && c.system != SystemKind::ProxInertial)
    at("descent", "descent certificate applies to prox_inertial only");
  if (d.stabilization && c.system != SystemKind::AdigeVGH)
    at("stabilization", "stabilization needs the u channel of adige_vgh");
  if (d.angle && (c.system != SystemKind::AdigeV && c.system != SystemKind::AdigeVH))
    at("angle", "angle certificate applies to adige_v and adige_vh");
  if (entry) {
    const std::size_t dim = entry->objective.dim;
    if (d.crossings && d.crossings->component >= dim) at("crossings_component", "component out of range");
    if (d.sign_changes && *d.sign_changes >= dim) at("sign_changes", "component out of range");
  }
  if (is_algorithm(c.system) && (d.rate || d.crossings || d.ergodic_max || d.sign_changes))
    at("system", "trajectory diagnostics need a dynamics system");
  return errs;
}

}  // namespace

ScenarioConfig parse_config(std::string_view text) {
  ScenarioConfig cfg;
  std::vector<std::string> errs;
  std::map<std::string, int> lines;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  std::optional<std::size_t> crossings_component;
  std::optional<long> crossings_min;
  std::optional<double> rate_min, rate_max, r2_min;
  std::optional<std::string> rate_text, crossings_text, sweep_param;
  std::optional<std::vector<double>> sweep_values;

  while (std::getline(in, raw)) {
    ++lineno;
    auto err = [&](const std::string& m) { errs.push_back("line " + std::to_string(lineno) + ": " + m); };
    std::string line = raw.substr(0, raw.find('#'));
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        err("malformed section header");
        continue;
      }
      section = lower(trim(line.substr(1, line.size() - 2)));
      if (!section_keys().count(section)) err("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      err("expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    bool known = false;
    for (const auto& [sec, keys] : section_keys())
      if ((section.empty() || sec == section) && keys.count(key)) known = true;
    if (!known) {
      err("unknown key '" + key + "'" + (section.empty() ? "" : " in [" + section + "]"));
      continue;
    }
    if (lines.count(key)) {
      err("duplicate key '" + key + "'");
      continue;
    }
    lines[key] = lineno;
    if (value.empty()) {
      err("empty value for '" + key + "'");
      continue;
    }
    try {
      if (key == "name") cfg.name = value;
      else if (key == "problem") cfg.problem = value;
      else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_int(value));
      else if (key == "plot") cfg.plot = to_bool(value);
      else if (key == "system") {
        auto k = system_from_name(value);
        if (!k) throw std::invalid_argument("unknown system '" + value + "'");
        cfg.system = *k;
      } else if (key == "phi") cfg.phi = parse_phi(value);
      else if (key == "beta") cfg.beta = to_real(value);
      else if (key == "gamma") cfg.gamma = to_real(value);
      else if (key == "alpha") cfg.alpha = to_real(value);
      else if (key == "x0") cfg.x0 = to_reals(value);
      else if (key == "v0") cfg.v0 = to_reals(value);
      else if (key == "x1") cfg.x1 = to_reals(value);
      else if (key == "t0") cfg.t0 = to_real(value);
      else if (key == "s") cfg.s = to_real(value);
      else if (key == "momentum") cfg.momentum = to_real(value);
      else if (key == "max_iter") cfg.max_iter = to_int(value);
      else if (key == "stop_tol") cfg.stop_tol = to_real(value);
      else if (key == "h") cfg.h = to_real(value);
      else if (key == "T") cfg.T = to_real(value);
      else if (key == "scheme") {
        const auto v = lower(value);
        if (v == "prox" || v == "prox_semi_implicit") cfg.yosida = false;
        else if (v == "yosida_rk4") cfg.yosida = true;
        else throw std::invalid_argument("scheme must be prox or yosida_rk4");
      } else if (key == "lambda") cfg.lambda = to_real(value);
      else if (key == "record_every") cfg.record_every = static_cast<int>(to_int(value));
      else if (key == "energy_monotone") cfg.diagnostics.energy_monotone = to_real(value);
      else if (key == "rate") rate_text = value;
      else if (key == "rate_min") rate_min = to_real(value);
      else if (key == "rate_max") rate_max = to_real(value);
      else if (key == "r2_min") r2_min = to_real(value);
      else if (key == "crossings") crossings_text = value;
      else if (key == "crossings_component") crossings_component = static_cast<std::size_t>(to_int(value));
      else if (key == "crossings_min") crossings_min = to_int(value);
      else if (key == "stabilization") cfg.diagnostics.stabilization = to_real(value);
      else if (key == "terminal_grad") cfg.diagnostics.terminal_grad = to_real(value);
      else if (key == "ergodic_max") cfg.diagnostics.ergodic_max = to_real(value);
      else if (key == "sign_changes") cfg.diagnostics.sign_changes = static_cast<std::size_t>(to_int(value));
      else if (key == "angle") {
        const auto v = to_reals(value);
        if (v.size() != 6) throw std::invalid_argument("angle = lambda,gamma_phi,delta,R,eps,grid_n");
        cfg.diagnostics.angle = AngleRequest{v[0], v[1], v[2], v[3], v[4], static_cast<int>(v[5])};
      } else if (key == "descent") {
        const auto v = to_reals(value);
        if (v.size() != 2) throw std::invalid_argument("descent = gamma_phi,L");
        cfg.diagnostics.descent = DescentRequest{v[0], v[1]};
      } else if (key == "param") sweep_param = value;
      else if (key == "values") sweep_values = to_reals(value);
    } catch (const ConfigError& e) {
      for (const auto& m : e.errors) err(m);
    } catch (const std::exception& e) {
      err("'" + key + "': " + e.what());
    }
  }

  auto at = [&](const std::string& key, const std::string& msg) {
    errs.push_back("line " + std::to_string(lines[key]) + ": " + msg);
  };
  if (rate_text) {
    RateRequest r;
    const auto parts = split(*rate_text, ':');
    const auto model = lower(parts[0]);
    if (model == "exponential") r.model = RateModel::Exponential;
    else if (model == "power") r.model = RateModel::Power;
    else at("rate", "rate model must be exponential or power");
    if (parts.size() == 3) {
      try {
        r.window = Window{to_real(parts[1]), to_real(parts[2])};
        if (!(r.window->hi > r.window->lo)) at("rate", "rate window must satisfy lo < hi");
      } catch (const std::exception& e) {
        at("rate", e.what());
      }
    } else if (parts.size() != 1) {
      at("rate", "rate = model or model:lo:hi");
    }
    r.rate_min = rate_min;
    r.rate_max = rate_max;
    r.r2_min = r2_min;
    cfg.diagnostics.rate = r;
  } else if (rate_min || rate_max || r2_min) {
    errs.push_back("rate_min/rate_max/r2_min need 'rate'");
  }
  if (crossings_text) {
    CrossingRequest cr;
    try {
      const auto v = to_reals(*crossings_text);
      if (v.size() != 2) throw std::invalid_argument("crossings = a,b");
      cr.a = v[0];
      cr.b = v[1];
    } catch (const std::exception& e) {
      at("crossings", e.what());
    }
    cr.component = crossings_component.value_or(0);
    cr.min_count = crossings_min;
    cfg.diagnostics.crossings = cr;
  } else if (crossings_component || crossings_min) {
    errs.push_back("crossings_component/crossings_min need 'crossings'");
  }
  if (sweep_param || sweep_values) {
    if (!sweep_param || !sweep_values || sweep_values->empty()) {
      errs.push_back("[sweep] needs both 'param' and a non-empty 'values'");
    } else if (!sweepable().count(*sweep_param)) {
      at("param", "cannot sweep '" + *sweep_param + "'");
    } else {
      cfg.sweep = SweepSpec{*sweep_param, *sweep_values};
    }
  }

  if (errs.empty()) {
    auto more = validate(cfg, lines);
    errs.insert(errs.end(), more.begin(), more.end());
  }
  if (errs.empty() && cfg.sweep) {
    for (double v : cfg.sweep->values) {
      try {
        (void)apply_sweep_value(cfg, cfg.sweep->param, v);
      } catch (const ConfigError& e) {
        for (const auto& m : e.errors)
          errs.push_back("line " + std::to_string(lines["param"]) + ": sweep " + cfg.sweep->param +
                         "=" + format_number(v) + ": " + m);
      }
    }
  }
  if (!errs.empty()) throw ConfigError(std::move(errs));
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ScenarioConfig apply_sweep_value(const ScenarioConfig& cfg, const std::string& param, double value) {
  ScenarioConfig out = cfg;
  auto phi_arg = [&](const char* name) {
    if (!out.phi) throw ConfigError({"sweep '" + param + "' needs a phi"});
    auto& k = out.phi->kind;
    if (std::string(name) == "p" && k == "power") out.phi->args[1] = value;
    else if (std::string(name) == "r" && (k == "power" || k == "dry")) out.phi->args[0] = value;
    else throw ConfigError({"sweep '" + param + "' does not apply to phi kind '" + k + "'"});
  };
  if (param == "p" || param == "r") phi_arg(param.c_str());
  else if (param == "beta") out.beta = value;
  else if (param == "h") out.h = value;
  else if (param == "T") out.T = value;
  else if (param == "alpha") out.alpha = value;
  else if (param == "gamma") out.gamma = value;
  else if (param == "lambda") out.lambda = value;
  else if (param == "x0") out.x0 = {value};
  else if (param == "v0") out.v0 = {value};
  else if (param == "s") out.s = value;
  else if (param == "momentum") out.momentum = value;
  else throw ConfigError({"cannot sweep '" + param + "'"});
  auto errs = validate(out, {});
  if (!errs.empty()) throw ConfigError(std::move(errs));
  return out;
}

}  // namespace dampdyn
