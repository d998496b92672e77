#pragma once

#include "dampdyn/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dampdyn {

/// A differentiable function f to minimize, with the constants the
/// certificates need. All members are pure and freely copyable.
struct Objective {
  std::size_t dim = 1;
  std::function<double(const Vec&)> eval;
  std::function<Vec(const Vec&)> grad;
  /// ∇²f(x)v; empty when the Hessian is unavailable.
  std::function<Vec(const Vec&, const Vec&)> hvp;
  /// Strong-convexity modulus, when known.
  std::optional<double> mu;
  /// Lipschitz constant of ∇f on the ball ‖x‖ ≤ R.
  std::function<double(double)> lipschitz_on_ball;
  /// inf f, when known.
  std::optional<double> min_value;

  bool has_hvp() const { return static_cast<bool>(hvp); }
};

struct Interval {
  double lo;
  double hi;
};

/// Either a finite list of minimizers or a 1-D interval of them.
using MinimizerSet = std::variant<std::vector<Vec>, Interval>;

/// Governing equation ẍ + (α/t)ẋ + ∇f(x) = 0.
struct AvdGoverning {
  double alpha;
};

/// Governing equation ẍ + r|ẋ|^{p−2}ẋ + ∇f(x) = 0, i.e. ADIGE-V with the
/// power damping potential (r/p)|u|^p.
struct AdigeVGoverning {
  double r;
  double p;
};

/// Exact solution x(t) = t^{−θ} of a 1-D problem f(x) = c|x|^γ, valid for
/// t ≥ t0 = 1.
struct ClosedForm {
  std::string family;
  double theta = 0.0;
  double c = 0.0;
  double gamma = 0.0;
  std::variant<AvdGoverning, AdigeVGoverning> governing;

  double t0() const { return 1.0; }
  double x(double t) const;
  double xdot(double t) const;
  double xddot(double t) const;
};

struct ProblemCatalogEntry {
  std::string id;
  Objective objective;
  MinimizerSet minimizers;
  std::optional<ClosedForm> closed_form;
};

namespace problems {

/// f(x) = ½x².
ProblemCatalogEntry quad1d();
/// f(x) = ½(x₁² + 1000x₂²).
ProblemCatalogEntry illcond2d();
/// f(x) = c|x|^γ in one dimension.
ProblemCatalogEntry power_law(double c, double gamma);
/// ½(x+1)² for x ≤ −1, 0 on (−1, 1), ½(x−1)² for x ≥ 1.
ProblemCatalogEntry flatbottom();
/// f(x) = (μ/2)‖x‖² on ℝ^dim.
ProblemCatalogEntry strongquad(double mu, std::size_t dim = 1);

/// Power-law problem together with the completely damped solution t^{−θ} of
/// ẍ + (α/t)ẋ + ∇f = 0: θ = 2/(γ−2), c = 2/(γ(γ−2))·(α − γ/(γ−2)).
/// Throws ConditionError naming the violated inequality.
ProblemCatalogEntry avd_power_family(double alpha, double gamma);

/// Power-law problem together with the solution t^{−θ} of
/// ẍ + r|ẋ|^{p−2}ẋ + ∇f = 0: θ = 2/(γ−2), p = (3γ−2)/γ,
/// c = (θ/γ)(θ^{p−2}r − (θ+1)). Throws ConditionError when c ≤ 0.
ProblemCatalogEntry adige_v_power_family(double gamma, double r);

}  // namespace problems

/// Default instances of every catalog problem.
std::vector<ProblemCatalogEntry> catalog();

/// Looks up "quad1d", "illcond2d", "flatbottom", "pow(c,γ)",
/// "strongquad(μ)", "strongquad(μ,dim)", "avd_family(α,γ)" or
/// "adige_v_family(γ,r)". Arguments may carry a "name=" prefix, so every
/// entry id round-trips. Throws NotFoundError.
ProblemCatalogEntry lookup_problem(std::string_view id);

}  // namespace dampdyn
