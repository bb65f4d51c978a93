#pragma once

// Spectral wave propagator U(t) = sum_l exp(i t mu_l) P_l + P_ker built from
// the A-orthogonal projectors of a weighted spectrum.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "wdirac/spectral.hpp"

namespace wdirac {

struct Propagator {
  double t = 0.0;
  int ell_max = 0;
  Mat basis;         // retained eigenvectors, kernel first
  Mat dual;          // M_A basis
  Vec phases;        // exp(i t mu) per column
  double truncation_tol = 1.0e-8;

  Vec apply(const Vec& f) const { return basis * (phases.asDiagonal() * (dual.adjoint() * f)); }
  Vec project(const Vec& f) const { return basis * (dual.adjoint() * f); }
};

struct EvolveResult {
  SpinorField value;
  double truncation_residual = 0.0;  // A-norm of the un-retained part, relative to psi0
  bool truncation_warning = false;
};

namespace detail {

// Signed indices of every complete cluster with |l| <= ell_max.
inline std::vector<int> retained_indices(const WeightedSpectrum& s, int ell_max) {
  std::vector<int> ks;
  for (const Cluster& c : s.clusters()) {
    if (std::abs(c.label) > ell_max) continue;
    if (!c.complete) {
      throw RangeError("cluster " + std::to_string(c.label) + " is cut by the retained window");
    }
    ks.insert(ks.end(), c.indices.begin(), c.indices.end());
  }
  return ks;
}

inline int complete_ell_max(const WeightedSpectrum& s) {
  return std::min(s.complete_cluster_count(1), s.complete_cluster_count(-1));
}

inline double a_norm(const OperatorMatrix& mass, const Vec& v) {
  return std::sqrt(std::abs(v.dot(mass_apply_vec(mass, v))));
}

}  // namespace detail

/// Propagator truncated to clusters |l| <= ell_max (negative: every complete cluster).
inline Propagator make_propagator(const WeightedSpectrum& s, double t, int ell_max = -1) {
  Propagator u;
  u.t = t;
  u.ell_max = ell_max < 0 ? detail::complete_ell_max(s) : ell_max;
  const std::vector<int> ks = detail::retained_indices(s, u.ell_max);
  const int h0 = s.kernel_dim();
  u.basis.resize(s.dirac().order(), h0 + static_cast<Eigen::Index>(ks.size()));
  u.phases.resize(u.basis.cols());
  if (h0 > 0) u.basis.leftCols(h0) = s.kernel_basis();
  u.phases.head(h0).setOnes();
  for (std::size_t j = 0; j < ks.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(h0 + j);
    u.basis.col(col) = s.phi(ks[j]);
    u.phases(col) = std::polar(1.0, t * s.lambda(ks[j]));
  }
  u.dual = mass_apply(s.mass(), u.basis);
  return u;
}

inline EvolveResult evolve(const WeightedSpectrum& s, double t, const SpinorField& psi0,
                           int ell_max = -1, double truncation_tol = 1.0e-8) {
  if (psi0.values().size() != s.dirac().order()) throw ShapeError("field does not match spectrum");
  const Propagator u = make_propagator(s, t, ell_max);
  const Vec& f = psi0.values();
  const double total = detail::a_norm(s.mass(), f);
  const double rest = detail::a_norm(s.mass(), f - u.project(f));
  EvolveResult r{SpinorField(u.apply(f), psi0.fiber_dim()), total > 0.0 ? rest / total : 0.0, false};
  r.truncation_warning = r.truncation_residual > truncation_tol;
  return r;
}

/// <psi_q, U_m(t) psi_p>_A with psi from the limit spectrum and the inner
/// product of the limit weight (conjugate-linear in psi_q), so the limit
/// propagator gives exp(i t lambda_p) delta_pq.
inline cplx kernel_matrix_element(const WeightedSpectrum& member, double t, int p, int q,
                                  const WeightedSpectrum& limit, int ell_max = -1) {
  if (!limit.has(p) || !limit.has(q)) throw RangeError("index missing from the limit spectrum");
  if (!member.has(p) || !member.has(q)) throw RangeError("index missing from the member spectrum");
  if (!member.dirac().same_space(limit.dirac())) throw ShapeError("spectra live on different grids");
  const Propagator u = make_propagator(member, t, ell_max);
  const Vec up = u.apply(limit.phi(p));
  return limit.phi(q).dot(mass_apply_vec(limit.mass(), up));
}

/// Dense kernel K = sum exp(i t mu) Phi Phi^dagger; K M_A f reproduces evolve.
struct KernelMatrix {
  Mat kernel;
  const OperatorMatrix* mass = nullptr;

  Vec apply(const Vec& f) const { return kernel * mass_apply_vec(*mass, f); }
};

inline KernelMatrix kernel_assemble(const WeightedSpectrum& s, double t, int ell_max = -1) {
  const Propagator u = make_propagator(s, t, ell_max);
  KernelMatrix k;
  k.kernel = u.basis * u.phases.asDiagonal() * u.basis.adjoint();
  k.mass = &s.mass();
  return k;
}

}  // namespace wdirac
