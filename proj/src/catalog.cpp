#include "dampdyn/catalog.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace dampdyn {

double ClosedForm::x(double t) const { return std::pow(t, -theta); }

double ClosedForm::xdot(double t) const { return -theta * std::pow(t, -theta - 1.0); }

double ClosedForm::xddot(double t) const {
  return theta * (theta + 1.0) * std::pow(t, -theta - 2.0);
}

namespace problems {

namespace {

Vec scalar(double v) { return Vec::Constant(1, v); }

std::string fmt_num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

ProblemCatalogEntry quad1d() {
  Objective f;
  f.dim = 1;
  f.eval = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
  f.grad = [](const Vec& x) -> Vec { return x; };
  f.hvp = [](const Vec&, const Vec& v) -> Vec { return v; };
  f.mu = 1.0;
  f.lipschitz_on_ball = [](double) { return 1.0; };
  f.min_value = 0.0;
  return {"quad1d", std::move(f), std::vector<Vec>{scalar(0.0)}, std::nullopt};
}

ProblemCatalogEntry illcond2d() {
  Objective f;
  f.dim = 2;
  f.eval = [](const Vec& x) { return 0.5 * (x[0] * x[0] + 1000.0 * x[1] * x[1]); };
  f.grad = [](const Vec& x) -> Vec { return Eigen::Vector2d(x[0], 1000.0 * x[1]); };
  f.hvp = [](const Vec&, const Vec& v) -> Vec { return Eigen::Vector2d(v[0], 1000.0 * v[1]); };
  f.mu = 1.0;
  f.lipschitz_on_ball = [](double) { return 1000.0; };
  f.min_value = 0.0;
  return {"illcond2d", std::move(f), std::vector<Vec>{Vec::Zero(2)}, std::nullopt};
}

ProblemCatalogEntry power_law(double c, double gamma) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("pow: c must be positive");
  if (!(gamma > 1.0) || !std::isfinite(gamma)) throw DomainError("pow: gamma must be > 1");
  Objective f;
  f.dim = 1;
  f.eval = [c, gamma](const Vec& x) { return c * std::pow(std::abs(x[0]), gamma); };
  f.grad = [c, gamma](const Vec& x) -> Vec {
    const double a = std::abs(x[0]);
    if (a == 0.0) return scalar(0.0);
    return scalar(c * gamma * std::pow(a, gamma - 1.0) * (x[0] > 0.0 ? 1.0 : -1.0));
  };
  if (gamma >= 2.0) {
    f.hvp = [c, gamma](const Vec& x, const Vec& v) -> Vec {
      if (gamma == 2.0) return 2.0 * c * v;
      return c * gamma * (gamma - 1.0) * std::pow(std::abs(x[0]), gamma - 2.0) * v;
    };
    f.lipschitz_on_ball = [c, gamma](double R) {
      return c * gamma * (gamma - 1.0) * std::pow(R, gamma - 2.0);
    };
  } else {
    f.lipschitz_on_ball = [](double) { return std::numeric_limits<double>::infinity(); };
  }
  if (gamma == 2.0) f.mu = 2.0 * c;
  f.min_value = 0.0;
  return {"pow(" + fmt_num(c) + "," + fmt_num(gamma) + ")", std::move(f),
          std::vector<Vec>{scalar(0.0)}, std::nullopt};
}

ProblemCatalogEntry flatbottom() {
  Objective f;
  f.dim = 1;
  f.eval = [](const Vec& x) {
    const double v = x[0];
    if (v <= -1.0) return 0.5 * (v + 1.0) * (v + 1.0);
    if (v >= 1.0) return 0.5 * (v - 1.0) * (v - 1.0);
    return 0.0;
  };
  f.grad = [](const Vec& x) -> Vec {
    const double v = x[0];
    if (v <= -1.0) return scalar(v + 1.0);
    if (v >= 1.0) return scalar(v - 1.0);
    return scalar(0.0);
  };
  // Kinks at ±1 take the outer curvature.
  f.hvp = [](const Vec& x, const Vec& v) -> Vec {
    return std::abs(x[0]) >= 1.0 ? Vec(v) : Vec(Vec::Zero(1));
  };
  f.mu = 0.0;
  f.lipschitz_on_ball = [](double) { return 1.0; };
  f.min_value = 0.0;
  return {"flatbottom", std::move(f), Interval{-1.0, 1.0}, std::nullopt};
}

ProblemCatalogEntry strongquad(double mu, std::size_t dim) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("strongquad: mu must be positive");
  if (dim == 0) throw DomainError("strongquad: dim must be positive");
  Objective f;
  f.dim = dim;
  f.eval = [mu](const Vec& x) { return 0.5 * mu * x.squaredNorm(); };
  f.grad = [mu](const Vec& x) -> Vec { return mu * x; };
  f.hvp = [mu](const Vec&, const Vec& v) -> Vec { return mu * v; };
  f.mu = mu;
  f.lipschitz_on_ball = [mu](double) { return mu; };
  f.min_value = 0.0;
  std::string id = "strongquad(" + fmt_num(mu);
  if (dim != 1) id += "," + std::to_string(dim);
  id += ")";
  return {std::move(id), std::move(f), std::vector<Vec>{Vec::Zero(static_cast<Eigen::Index>(dim))},
          std::nullopt};
}

ProblemCatalogEntry avd_power_family(double alpha, double gamma) {
  if (!(gamma > 2.0)) throw ConditionError("AVD closed form requires gamma > 2");
  const double ratio = gamma / (gamma - 2.0);
  if (!(alpha > ratio)) throw ConditionError("AVD closed form requires alpha > gamma/(gamma-2)");
  const double theta = 2.0 / (gamma - 2.0);
  const double c = 2.0 / (gamma * (gamma - 2.0)) * (alpha - ratio);
  auto entry = power_law(c, gamma);
  entry.id = "avd_family(alpha=" + fmt_num(alpha) + ",gamma=" + fmt_num(gamma) + ")";
  entry.closed_form = ClosedForm{"avd", theta, c, gamma, AvdGoverning{alpha}};
  return entry;
}

ProblemCatalogEntry adige_v_power_family(double gamma, double r) {
  if (!(gamma > 2.0)) throw ConditionError("ADIGE-V closed form requires gamma > 2");
  if (!(r > 0.0)) throw ConditionError("ADIGE-V closed form requires r > 0");
  const double theta = 2.0 / (gamma - 2.0);
  const double p = (3.0 * gamma - 2.0) / gamma;
  const double threshold = (theta + 1.0) / std::pow(theta, p - 2.0);
  if (!(r > threshold))
    throw ConditionError("ADIGE-V closed form requires r > (theta+1)/theta^(p-2) (c > 0)");
  const double c = theta / gamma * (std::pow(theta, p - 2.0) * r - (theta + 1.0));
  auto entry = power_law(c, gamma);
  entry.id = "adige_v_family(gamma=" + fmt_num(gamma) + ",r=" + fmt_num(r) + ")";
  entry.closed_form = ClosedForm{"adige_v", theta, c, gamma, AdigeVGoverning{r, p}};
  return entry;
}

}  // namespace problems

std::vector<ProblemCatalogEntry> catalog() {
  return {problems::quad1d(), problems::illcond2d(), problems::power_law(0.5, 4.0),
          problems::flatbottom(), problems::strongquad(1.0)};
}

ProblemCatalogEntry lookup_problem(std::string_view id) {
  std::string name(id);
  std::vector<double> args;
  if (auto open = name.find('('); open != std::string::npos) {
    if (name.back() != ')') throw NotFoundError("malformed problem id: " + std::string(id));
    std::string inner = name.substr(open + 1, name.size() - open - 2);
    name = name.substr(0, open);
    std::stringstream ss(inner);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (auto eq = tok.find('='); eq != std::string::npos) tok = tok.substr(eq + 1);
      try {
        std::size_t used = 0;
        args.push_back(std::stod(tok, &used));
        while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw NotFoundError("malformed problem argument '" + tok + "' in " + std::string(id));
      }
    }
  }
  auto arity = [&](std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi)
      throw NotFoundError("wrong number of arguments for problem " + name);
  };
  if (name == "quad1d") {
    arity(0, 0);
    return problems::quad1d();
  }
  if (name == "illcond2d") {
    arity(0, 0);
    return problems::illcond2d();
  }
  if (name == "flatbottom") {
    arity(0, 0);
    return problems::flatbottom();
  }
  if (name == "pow") {
    arity(0, 2);
    if (args.empty()) return problems::power_law(0.5, 4.0);
    if (args.size() != 2) throw NotFoundError("pow takes (c, gamma)");
    return problems::power_law(args[0], args[1]);
  }
  if (name == "strongquad") {
    arity(0, 2);
    const double mu = args.empty() ? 1.0 : args[0];
    std::size_t dim = 1;
    if (args.size() == 2) {
      if (args[1] < 1.0 || args[1] != std::floor(args[1]))
        throw NotFoundError("strongquad dimension must be a positive integer");
      dim = static_cast<std::size_t>(args[1]);
    }
    return problems::strongquad(mu, dim);
  }
  if (name == "avd_family") {
    arity(2, 2);
    return problems::avd_power_family(args[0], args[1]);
  }
  if (name == "adige_v_family") {
    arity(2, 2);
    return problems::adige_v_power_family(args[0], args[1]);
  }
  throw NotFoundError("unknown problem id: " + std::string(id));
}

}  // namespace dampdyn
