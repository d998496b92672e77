#pragma once

#include "dampdyn/types.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dampdyn {

class DampingPotential;

namespace damping {

/// (r/p)‖u‖^p, p ≥ 1.
struct Power {
  double r;
  double p;
};

/// r‖u‖ (Coulomb friction).
struct Dry {
  double r;
};

/// (γ/2)‖u‖².
struct Viscous {
  double gamma;
};

/// ½⟨Au, u⟩ with A symmetric positive definite.
struct QuadraticForm {
  Mat A;
};

struct Sum {
  std::vector<DampingPotential> terms;
};

/// Pointwise maximum of exactly two potentials.
struct Max {
  std::vector<DampingPotential> pair;
};

}  // namespace damping

/// A closed-loop damping law φ: convex, nonnegative, φ(0) = 0.
///
/// Construct through the static factories; they validate parameters and
/// throw DomainError on anything that would break convexity or positivity.
class DampingPotential {
 public:
  using Kind = std::variant<damping::Power, damping::Dry, damping::Viscous,
                            damping::QuadraticForm, damping::Sum, damping::Max>;

  static DampingPotential power(double r, double p);
  static DampingPotential dry(double r);
  static DampingPotential viscous(double gamma);
  static DampingPotential quadratic_form(Mat A);
  static DampingPotential sum(std::vector<DampingPotential> terms);
  static DampingPotential max(DampingPotential a, DampingPotential b);

  const Kind& kind() const noexcept { return kind_; }

  /// True when φ(u) depends on ‖u‖ only.
  bool is_radial() const;

  /// Dimension constraint: 0 means any dimension.
  std::size_t required_dim() const;

  std::string describe() const;

 private:
  explicit DampingPotential(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

double phi_value(const DampingPotential& phi, const Vec& u);

/// Least-norm element of ∂φ(u).
Vec phi_min_section(const DampingPotential& phi, const Vec& u);

/// argmin_ξ { λφ(ξ) + ½‖x − ξ‖² }.
Vec prox_phi(const DampingPotential& phi, double lambda, const Vec& x);

/// Moreau envelope φ_λ(u) = φ(p) + ‖u − p‖²/(2λ), p = prox_{λφ}(u).
double moreau_value(const DampingPotential& phi, double lambda, const Vec& u);

/// ∇φ_λ(u) = (u − prox_{λφ}(u))/λ.
Vec moreau_grad(const DampingPotential& phi, double lambda, const Vec& u);

/// Constant γ with ⟨g, u⟩ ≥ γ‖u‖² for all g ∈ ∂φ(u), when it can be read off
/// the kind: Viscous(γ) → γ, Power(r, 2) → r, and Sum adds the constants of
/// its viscous-type terms (other terms contribute ≥ 0). Empty otherwise.
std::optional<double> quadratic_growth_constant(const DampingPotential& phi);

}  // namespace dampdyn
