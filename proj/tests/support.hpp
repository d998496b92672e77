#pragma once

// Shared helpers for the unit tests: seeded generators for property tests and
// finite-difference oracles.

#include "dampdyn/catalog.hpp"
#include "dampdyn/potentials.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace testsupport {

using dampdyn::DampingPotential;
using dampdyn::Vec;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Vec vec(Eigen::Index d, double scale) {
    Vec v(d);
    for (auto& c : v) c = uniform(-scale, scale);
    return v;
  }

  /// A random potential of any radial kind, or a quadratic form when d allows.
  DampingPotential potential(Eigen::Index d, bool allow_quadratic = true) {
    const int pick = integer(0, allow_quadratic ? 6 : 5);
    switch (pick) {
      case 0: return DampingPotential::power(uniform(0.2, 3.0), uniform(1.0, 6.0));
      case 1: return DampingPotential::dry(uniform(0.1, 2.0));
      case 2: return DampingPotential::viscous(uniform(0.1, 3.0));
      case 3: return DampingPotential::power(uniform(0.2, 3.0), uniform(1.2, 1.9));
      case 4:
        return DampingPotential::sum({DampingPotential::viscous(uniform(0.1, 2.0)),
                                      DampingPotential::dry(uniform(0.1, 1.0))});
      case 5:
        return DampingPotential::max(DampingPotential::dry(uniform(0.1, 1.0)),
                                     DampingPotential::power(uniform(0.2, 2.0), uniform(2.0, 4.0)));
      default: {
        dampdyn::Mat B(d, d);
        for (Eigen::Index i = 0; i < B.size(); ++i) B.data()[i] = uniform(-1.0, 1.0);
        dampdyn::Mat A = B * B.transpose() + 0.5 * dampdyn::Mat::Identity(d, d);
        return DampingPotential::quadratic_form(A);
      }
    }
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Central-difference gradient of a scalar function.
template <class F>
Vec fd_gradient(F&& f, const Vec& x, double step = 1e-6) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a[i] += step;
    b[i] -= step;
    g[i] = (f(a) - f(b)) / (2.0 * step);
  }
  return g;
}

inline double rel_err(const Vec& a, const Vec& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

/// Brute-force argmin of λφ(ξ) + ½(x − ξ)² over a dense 1-D grid.
inline double grid_prox_1d(const DampingPotential& phi, double lambda, double x, double half_width,
                           int n) {
  double best = 0.0, best_val = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= n; ++k) {
    const double xi = x - half_width + 2.0 * half_width * k / n;
    const double val = lambda * dampdyn::phi_value(phi, Vec::Constant(1, xi)) + 0.5 * (x - xi) * (x - xi);
    if (val < best_val) {
      best_val = val;
      best = xi;
    }
  }
  return best;
}

}  // namespace testsupport
