#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "wdirac/wdirac.hpp"

namespace wdirac::testing {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline Vec random_vec(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal;
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(normal(rng), normal(rng));
  return v;
}

inline SpinorField random_field(std::mt19937_64& rng, const Grid& grid) {
  return SpinorField(random_vec(rng, grid.num_dofs()), grid.fiber_dim);
}

/// Smooth random Hermitian positive definite weight.
inline WeightField random_spd(const Grid& grid, std::uint64_t seed, double amplitude = 0.5) {
  FamilyParams p;
  p.amplitude = amplitude;
  p.seed = seed;
  return WeightFamily(FamilyKind::RandomSpdPerturbation, p, grid).member(1);
}

inline WeightedSpectrum solve(const Geometry& g, const WeightField& w, int k_max,
                              const SolveOptions& opts = {}) {
  const Problem p = make_problem(g);
  return solve_for(p, w, k_max, opts);
}

inline WeightedSpectrum solve_identity(const Geometry& g, int k_max) {
  return solve(g, WeightField::identity(build_grid(g)), k_max);
}

/// Continuum eigenvalue lambda_k(rho) = lambda_k(1) * vol / int rho for 1-D weights.
inline double one_d_oracle(double free_lambda, double volume, double integral) {
  return free_lambda * volume / integral;
}

}  // namespace wdirac::testing
