#include "dampdyn/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dampdyn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_finite(const Vec& u, const char* what) {
  if (!u.allFinite()) throw DomainError(std::string(what) + ": non-finite input");
}

void require_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw DomainError("prox parameter must be positive and finite");
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw DomainError(std::string(name) + " must be positive and finite");
}

bool contains_quadratic(const DampingPotential& phi) {
  return std::visit(
      overloaded{
          [](const damping::QuadraticForm&) { return true; },
          [](const damping::Sum& s) {
            return std::any_of(s.terms.begin(), s.terms.end(), contains_quadratic);
          },
          [](const damping::Max& m) {
            return contains_quadratic(m.pair[0]) || contains_quadratic(m.pair[1]);
          },
          [](const auto&) { return false; }},
      phi.kind());
}

// ---------------------------------------------------------------------------
// Radial profile ψ with φ(u) = ψ(‖u‖). Left/right derivatives are taken on
// [0, ∞); at s = 0 the left derivative is 0 by convention so that the
// minimal section is 0 there.

// Relative tolerance under which the two branches of a Max count as active.
constexpr double kTieTol = 1e-12;

double psi(const DampingPotential& phi, double s);

struct Slopes {
  double left;
  double right;
};

Slopes dpsi(const DampingPotential& phi, double s);

double psi(const DampingPotential& phi, double s) {
  return std::visit(
      overloaded{
          [s](const damping::Power& k) { return k.r / k.p * std::pow(s, k.p); },
          [s](const damping::Dry& k) { return k.r * s; },
          [s](const damping::Viscous& k) { return 0.5 * k.gamma * s * s; },
          [](const damping::QuadraticForm&) -> double {
            throw CapabilityError("quadratic form is not radial");
          },
          [s](const damping::Sum& k) {
            double acc = 0.0;
            for (const auto& t : k.terms) acc += psi(t, s);
            return acc;
          },
          [s](const damping::Max& k) {
            return std::max(psi(k.pair[0], s), psi(k.pair[1], s));
          }},
      phi.kind());
}

Slopes dpsi(const DampingPotential& phi, double s) {
  return std::visit(
      overloaded{
          [s](const damping::Power& k) -> Slopes {
            if (s == 0.0) return {0.0, k.p == 1.0 ? k.r : 0.0};
            const double d = k.r * std::pow(s, k.p - 1.0);
            return {d, d};
          },
          [s](const damping::Dry& k) -> Slopes {
            if (s == 0.0) return {0.0, k.r};
            return {k.r, k.r};
          },
          [s](const damping::Viscous& k) -> Slopes {
            return {k.gamma * s, k.gamma * s};
          },
          [](const damping::QuadraticForm&) -> Slopes {
            throw CapabilityError("quadratic form is not radial");
          },
          [s](const damping::Sum& k) {
            Slopes acc{0.0, 0.0};
            for (const auto& t : k.terms) {
              const Slopes d = dpsi(t, s);
              acc.left += d.left;
              acc.right += d.right;
            }
            return acc;
          },
          [s](const damping::Max& k) -> Slopes {
            const double v0 = psi(k.pair[0], s);
            const double v1 = psi(k.pair[1], s);
            const Slopes d0 = dpsi(k.pair[0], s);
            const Slopes d1 = dpsi(k.pair[1], s);
            if (std::abs(v0 - v1) <= kTieTol * std::max({1.0, std::abs(v0), std::abs(v1)}))
              return {std::min(d0.left, d1.left), std::max(d0.right, d1.right)};
            return v0 > v1 ? d0 : d1;
          }},
      phi.kind());
}

// Second derivative where ψ is twice differentiable, NaN otherwise.
double d2psi(const DampingPotential& phi, double s) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  return std::visit(
      overloaded{
          [s](const damping::Power& k) {
            if (k.p == 1.0) return 0.0;
            if (s == 0.0) return k.p >= 2.0 ? (k.p == 2.0 ? k.r : 0.0) : nan;
            return k.r * (k.p - 1.0) * std::pow(s, k.p - 2.0);
          },
          [](const damping::Dry&) { return 0.0; },
          [](const damping::Viscous& k) { return k.gamma; },
          [](const damping::QuadraticForm&) { return nan; },
          [s](const damping::Sum& k) {
            double acc = 0.0;
            for (const auto& t : k.terms) acc += d2psi(t, s);
            return acc;
          },
          [s](const damping::Max& k) {
            const double v0 = psi(k.pair[0], s);
            const double v1 = psi(k.pair[1], s);
            if (std::abs(v0 - v1) <= kTieTol * std::max({1.0, std::abs(v0), std::abs(v1)}))
              return nan;
            return v0 > v1 ? d2psi(k.pair[0], s) : d2psi(k.pair[1], s);
          }},
      phi.kind());
}

// Solves 0 ∈ s + λ∂ψ(s) − ρ on [0, ρ]: bracketed bisection with safeguarded
// Newton steps. The map s ↦ s + λψ'(s) is strictly increasing, so the
// bracket never empties.
double radial_prox_radius(const DampingPotential& phi, double lambda, double rho,
                          double tol) {
  if (rho == 0.0) return 0.0;
  if (rho <= lambda * dpsi(phi, 0.0).right) return 0.0;

  auto g = [&](double s) { return s + lambda * dpsi(phi, s).right - rho; };

  double lo = 0.0;
  double hi = rho;
  double s = 0.5 * rho;
  constexpr int kMaxIter = 200;
  for (int it = 0; it < kMaxIter; ++it) {
    const double gs = g(s);
    if (std::abs(gs) <= tol) return s;
    if (gs < 0.0)
      lo = s;
    else
      hi = s;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    const double curv = d2psi(phi, s);
    double next = 0.5 * (lo + hi);
    if (std::isfinite(curv)) {
      const double newton = s - gs / (1.0 + lambda * curv);
      if (newton > lo && newton < hi) next = newton;
    }
    s = next;
  }

  // Bracket collapsed: accept if the inclusion residual at either end is
  // within tolerance (kinks of Max branches land here).
  auto inclusion_residual = [&](double t) {
    const Slopes d = dpsi(phi, t);
    const double w = rho - t;
    if (w < lambda * d.left) return lambda * d.left - w;
    if (w > lambda * d.right) return w - lambda * d.right;
    return 0.0;
  };
  const double r_lo = inclusion_residual(lo);
  const double r_hi = inclusion_residual(hi);
  const double best = r_lo < r_hi ? lo : hi;
  const double res = std::min(r_lo, r_hi);
  if (res > tol) throw NumericalError("radial prox root solve did not converge", res);
  return best;
}

Vec radial_prox(const DampingPotential& phi, double lambda, const Vec& x, double tol_scale) {
  const double rho = x.norm();
  if (rho == 0.0) return Vec::Zero(x.size());
  const double s = radial_prox_radius(phi, lambda, rho, tol_scale * (1.0 + rho));
  return (s / rho) * x;
}

Mat summed_quadratic(const damping::Sum& k) {
  Mat A = std::get<damping::QuadraticForm>(k.terms.front().kind()).A;
  for (std::size_t i = 1; i < k.terms.size(); ++i)
    A += std::get<damping::QuadraticForm>(k.terms[i].kind()).A;
  return A;
}

bool all_quadratic(const damping::Sum& k) {
  return std::all_of(k.terms.begin(), k.terms.end(), [](const DampingPotential& t) {
    return std::holds_alternative<damping::QuadraticForm>(t.kind());
  });
}

// Least-norm point of the segment [a, b].
Vec min_norm_on_segment(const Vec& a, const Vec& b) {
  const Vec d = b - a;
  const double dd = d.squaredNorm();
  if (dd == 0.0) return a;
  const double t = std::clamp(-a.dot(d) / dd, 0.0, 1.0);
  return a + t * d;
}

}  // namespace

// ---------------------------------------------------------------------------

DampingPotential DampingPotential::power(double r, double p) {
  require_positive(r, "r");
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("p must be >= 1");
  return DampingPotential(damping::Power{r, p});
}

DampingPotential DampingPotential::dry(double r) {
  require_positive(r, "r");
  return DampingPotential(damping::Dry{r});
}

DampingPotential DampingPotential::viscous(double gamma) {
  require_positive(gamma, "gamma");
  return DampingPotential(damping::Viscous{gamma});
}

DampingPotential DampingPotential::quadratic_form(Mat A) {
  if (A.rows() == 0 || A.rows() != A.cols()) throw DomainError("A must be square and nonempty");
  if (!A.allFinite()) throw DomainError("A must be finite");
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw DomainError("A must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> eig(A);
  if (eig.eigenvalues().minCoeff() <= 0.0) throw DomainError("A must be positive definite");
  return DampingPotential(damping::QuadraticForm{std::move(A)});
}

DampingPotential DampingPotential::sum(std::vector<DampingPotential> terms) {
  if (terms.empty()) throw DomainError("sum needs at least one term");
  std::size_t dim = 0;
  for (const auto& t : terms) {
    const std::size_t d = t.required_dim();
    if (d != 0 && dim != 0 && d != dim) throw DomainError("sum terms disagree on dimension");
    if (d != 0) dim = d;
  }
  return DampingPotential(damping::Sum{std::move(terms)});
}

DampingPotential DampingPotential::max(DampingPotential a, DampingPotential b) {
  const std::size_t da = a.required_dim();
  const std::size_t db = b.required_dim();
  if (da != 0 && db != 0 && da != db) throw DomainError("max terms disagree on dimension");
  std::vector<DampingPotential> pair;
  pair.push_back(std::move(a));
  pair.push_back(std::move(b));
  return DampingPotential(damping::Max{std::move(pair)});
}

bool DampingPotential::is_radial() const { return !contains_quadratic(*this); }

std::size_t DampingPotential::required_dim() const {
  return std::visit(
      overloaded{
          [](const damping::QuadraticForm& k) { return static_cast<std::size_t>(k.A.rows()); },
          [](const damping::Sum& k) {
            for (const auto& t : k.terms)
              if (auto d = t.required_dim()) return d;
            return std::size_t{0};
          },
          [](const damping::Max& k) {
            if (auto d = k.pair[0].required_dim()) return d;
            return k.pair[1].required_dim();
          },
          [](const auto&) { return std::size_t{0}; }},
      kind_);
}

std::string DampingPotential::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const damping::Power& k) { os << "power(r=" << k.r << ",p=" << k.p << ")"; },
                 [&](const damping::Dry& k) { os << "dry(r=" << k.r << ")"; },
                 [&](const damping::Viscous& k) { os << "viscous(gamma=" << k.gamma << ")"; },
                 [&](const damping::QuadraticForm& k) { os << "quadratic(dim=" << k.A.rows() << ")"; },
                 [&](const damping::Sum& k) {
                   os << "sum(";
                   for (std::size_t i = 0; i < k.terms.size(); ++i)
                     os << (i ? ";" : "") << k.terms[i].describe();
                   os << ")";
                 },
                 [&](const damping::Max& k) {
                   os << "max(" << k.pair[0].describe() << ";" << k.pair[1].describe() << ")";
                 }},
             kind_);
  return os.str();
}

// ---------------------------------------------------------------------------

double phi_value(const DampingPotential& phi, const Vec& u) {
  require_finite(u, "phi_value");
  return std::visit(
      overloaded{
          [&](const damping::QuadraticForm& k) { return 0.5 * u.dot(k.A * u); },
          [&](const damping::Sum& k) {
            double acc = 0.0;
            for (const auto& t : k.terms) acc += phi_value(t, u);
            return acc;
          },
          [&](const damping::Max& k) {
            return std::max(phi_value(k.pair[0], u), phi_value(k.pair[1], u));
          },
          [&](const auto&) { return psi(phi, u.norm()); }},
      phi.kind());
}

Vec phi_min_section(const DampingPotential& phi, const Vec& u) {
  require_finite(u, "phi_min_section");
  if (phi.is_radial()) {
    const double s = u.norm();
    if (s == 0.0) return Vec::Zero(u.size());
    return (dpsi(phi, s).left / s) * u;
  }
  return std::visit(
      overloaded{
          [&](const damping::QuadraticForm& k) -> Vec { return k.A * u; },
          [&](const damping::Sum& k) -> Vec {
            // Radial terms are differentiable away from 0 and have 0 in
            // their subdifferential at 0, so the sum of sections is exact.
            Vec acc = Vec::Zero(u.size());
            for (const auto& t : k.terms) acc += phi_min_section(t, u);
            return acc;
          },
          [&](const damping::Max& k) -> Vec {
            const double v0 = phi_value(k.pair[0], u);
            const double v1 = phi_value(k.pair[1], u);
            const Vec g0 = phi_min_section(k.pair[0], u);
            const Vec g1 = phi_min_section(k.pair[1], u);
            if (std::abs(v0 - v1) <= kTieTol * std::max({1.0, std::abs(v0), std::abs(v1)}))
              return min_norm_on_segment(g0, g1);
            return v0 > v1 ? g0 : g1;
          },
          [&](const auto&) -> Vec { return Vec::Zero(u.size()); }},
      phi.kind());
}

Vec prox_phi(const DampingPotential& phi, double lambda, const Vec& x) {
  require_lambda(lambda);
  require_finite(x, "prox_phi");
  return std::visit(
      overloaded{
          [&](const damping::Viscous& k) -> Vec { return x / (1.0 + lambda * k.gamma); },
          [&](const damping::Dry& k) -> Vec {
            const double n = x.norm();
            const double shrink = n - lambda * k.r;
            if (shrink <= 0.0) return Vec::Zero(x.size());
            return (shrink / n) * x;
          },
          [&](const damping::Power& k) -> Vec {
            if (k.p == 1.0) return prox_phi(DampingPotential::dry(k.r), lambda, x);
            if (k.p == 2.0) return x / (1.0 + lambda * k.r);
            return radial_prox(phi, lambda, x, 1e-14);
          },
          [&](const damping::QuadraticForm& k) -> Vec {
            if (k.A.rows() != x.size()) throw DomainError("dimension mismatch in prox");
            Mat M = lambda * k.A;
            M.diagonal().array() += 1.0;
            return M.llt().solve(x);
          },
          [&](const damping::Sum& k) -> Vec {
            if (phi.is_radial()) return radial_prox(phi, lambda, x, 1e-12);
            if (all_quadratic(k))
              return prox_phi(DampingPotential::quadratic_form(summed_quadratic(k)), lambda, x);
            throw CapabilityError("prox of a sum mixing quadratic-form and radial terms is unsupported");
          },
          [&](const damping::Max&) -> Vec {
            if (phi.is_radial()) return radial_prox(phi, lambda, x, 1e-12);
            throw CapabilityError("prox of a max involving a quadratic form is unsupported");
          }},
      phi.kind());
}

double moreau_value(const DampingPotential& phi, double lambda, const Vec& u) {
  const Vec p = prox_phi(phi, lambda, u);
  return phi_value(phi, p) + (u - p).squaredNorm() / (2.0 * lambda);
}

Vec moreau_grad(const DampingPotential& phi, double lambda, const Vec& u) {
  return (u - prox_phi(phi, lambda, u)) / lambda;
}

std::optional<double> quadratic_growth_constant(const DampingPotential& phi) {
  return std::visit(
      overloaded{
          [](const damping::Viscous& k) -> std::optional<double> { return k.gamma; },
          [](const damping::Power& k) -> std::optional<double> {
            if (k.p == 2.0) return k.r;
            return std::nullopt;
          },
          [](const damping::Sum& k) -> std::optional<double> {
            std::optional<double> acc;
            for (const auto& t : k.terms)
              if (auto c = quadratic_growth_constant(t)) acc = acc.value_or(0.0) + *c;
            return acc;
          },
          [](const auto&) -> std::optional<double> { return std::nullopt; }},
      phi.kind());
}

}  // namespace dampdyn
