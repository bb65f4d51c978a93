#pragma once

// Discrete Dirac operators and weighted mass matrices.
//
// Clifford convention: gamma(e_j) = -i sigma_j, so gamma(e_j)^2 = -Id and the
// generators anticommute. The Dirac operator sum_j gamma(e_j) d_j is then
// -i sum_j sigma_j d_j, which is Hermitian with no extra factor.
//
// Periodic directions use exact Fourier differentiation on the shifted lattice
// (Z + twist) 2 pi / L. The chiral interval [0, L] is folded onto an
// antiperiodic circle of length 2L: writing psi = a e_+ + b e_- in the
// sigma_1 eigenbasis, f(y) = a(y) on [0, L] and f(y) = kappa b(2L - y) on
// [L, 2L] with kappa = i s turns D into -i d/dy and the two chiral boundary
// conditions into antiperiodicity of f.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "wdirac/domain.hpp"
#include "wdirac/weights.hpp"

namespace wdirac {

enum class OperatorKind { Dirac, Mass };

struct OperatorMatrix {
  OperatorKind kind = OperatorKind::Dirac;
  Mat matrix;
  std::vector<int> basis_map;  // active DOF -> grid DOF
  RVec dof_weights;            // quadrature weight of each active DOF
  int fiber_dim = 1;
  double hermitian_residual = 0.0;
  std::vector<Mat> blocks;  // per-point blocks of block-diagonal (mass) operators

  Eigen::Index order() const { return matrix.rows(); }

  SpinorField apply(const SpinorField& f) const {
    if (f.values().size() != matrix.cols()) throw ShapeError("operator/field size mismatch");
    return SpinorField(matrix * f.values(), f.fiber_dim());
  }

  bool same_space(const OperatorMatrix& other) const {
    return basis_map == other.basis_map && fiber_dim == other.fiber_dim;
  }
};

inline double relative_hermitian_residual(const Mat& m) {
  const double n = m.norm();
  return n == 0.0 ? 0.0 : (m - m.adjoint()).norm() / n;
}

// ---------------------------------------------------------------------------
// Clifford algebra on C^2.

inline Eigen::Matrix2cd pauli(int j) {
  Eigen::Matrix2cd s;
  const cplx i(0.0, 1.0);
  switch (j) {
    case 1:
      s << 0.0, 1.0, 1.0, 0.0;
      break;
    case 2:
      s << 0.0, -i, i, 0.0;
      break;
    case 3:
      s << 1.0, 0.0, 0.0, -1.0;
      break;
    default:
      throw RangeError("pauli index must be 1, 2 or 3");
  }
  return s;
}

/// gamma(e_j) for j = 1, 2.
inline Eigen::Matrix2cd clifford_generator(int j) { return cplx(0.0, -1.0) * pauli(j); }

/// Chirality operator G = s sigma_3 on the interval.
inline Eigen::Matrix2cd chirality_operator(int sign) { return double(sign) * pauli(3); }

/// B+ = (Id - gamma(n) G) / 2 with n = normal_sign * e_1 the inward normal.
inline Eigen::Matrix2cd chiral_boundary_projector(int normal_sign, int chirality_sign) {
  const Eigen::Matrix2cd gamma_n = double(normal_sign) * clifford_generator(1);
  return 0.5 * (Eigen::Matrix2cd::Identity() - gamma_n * chirality_operator(chirality_sign));
}

// ---------------------------------------------------------------------------
// One-dimensional Fourier differentiation (symbol xi).

namespace detail {

/// Wavenumbers of the N-point lattice with twist delta on a period L.
inline RVec lattice_wavenumbers(int n, double length, double delta) {
  RVec xi(n);
  const int lo = delta == 0.0 ? -n / 2 + 1 : -n / 2;
  for (int k = 0; k < n; ++k) xi(k) = 2.0 * std::numbers::pi * (lo + k + delta) / length;
  return xi;
}

/// Nodal matrix of -i d/dx on N equispaced points of a period L with twist
/// delta. D_{jl} = (1/N) sum_k xi_k exp(i xi_k (j - l) h) depends on j - l only.
inline Mat fourier_derivative(int n, double length, double delta) {
  const RVec xi = lattice_wavenumbers(n, length, delta);
  const double h = length / n;
  std::vector<cplx> c(static_cast<std::size_t>(2 * n - 1));
  for (int d = -(n - 1); d <= n - 1; ++d) {
    cplx acc = 0.0;
    for (int k = 0; k < n; ++k) acc += xi(k) * std::polar(1.0, xi(k) * d * h);
    c[static_cast<std::size_t>(d + n - 1)] = acc / double(n);
  }
  Mat dm(n, n);
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < n; ++l) dm(j, l) = c[static_cast<std::size_t>(j - l + n - 1)];
  }
  return dm;
}

/// Unitary map from interval nodal values (C^2 per point) to the folded
/// circle values f (length 2N).
inline Mat interval_fold(int n, int chirality_sign) {
  const double r = 1.0 / std::sqrt(2.0);
  const cplx kappa(0.0, double(chirality_sign));
  Mat u = Mat::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    // a = e_+^dagger psi, b = e_-^dagger psi with e_+- = (1, +-1)/sqrt 2
    u(j, 2 * j) = r;
    u(j, 2 * j + 1) = r;
    u(2 * n - 1 - j, 2 * j) = kappa * r;
    u(2 * n - 1 - j, 2 * j + 1) = -kappa * r;
  }
  return u;
}

}  // namespace detail

/// Dirac operator of the geometry on its grid (nodal form, Hermitian).
inline OperatorMatrix assemble_dirac(const Geometry& geometry, const Grid& grid) {
  geometry.validate();
  if (grid.num_points() != geometry.num_points() || grid.fiber_dim != geometry.fiber_dim()) {
    throw ShapeError("grid was not built from this geometry");
  }
  OperatorMatrix op;
  op.kind = OperatorKind::Dirac;
  op.fiber_dim = grid.fiber_dim;
  const int n = geometry.resolution;
  switch (geometry.kind) {
    case GeometryKind::CircleS1:
      op.matrix = detail::fourier_derivative(n, geometry.lengths[0], geometry.twist[0]);
      break;
    case GeometryKind::Torus2: {
      const Mat d1 = detail::fourier_derivative(n, geometry.lengths[0], geometry.twist[0]);
      const Mat d2 = detail::fourier_derivative(n, geometry.lengths[1], geometry.twist[1]);
      const Eigen::Matrix2cd s1 = pauli(1);
      const Eigen::Matrix2cd s2 = pauli(2);
      const int dofs = 2 * n * n;
      op.matrix = Mat::Zero(dofs, dofs);
      for (int i1 = 0; i1 < n; ++i1) {
        for (int i2 = 0; i2 < n; ++i2) {
          const int row = (i1 * n + i2) * 2;
          for (int l1 = 0; l1 < n; ++l1) {
            const int col = (l1 * n + i2) * 2;
            op.matrix.block<2, 2>(row, col) += d1(i1, l1) * s1;
          }
          for (int l2 = 0; l2 < n; ++l2) {
            const int col = (i1 * n + l2) * 2;
            op.matrix.block<2, 2>(row, col) += d2(i2, l2) * s2;
          }
        }
      }
      break;
    }
    case GeometryKind::IntervalChiral: {
      const Mat dc = detail::fourier_derivative(2 * n, 2.0 * geometry.lengths[0], 0.5);
      const Mat u = detail::interval_fold(n, geometry.chirality_sign);
      op.matrix = u.adjoint() * dc * u;
      break;
    }
  }
  op.basis_map.resize(static_cast<std::size_t>(grid.num_dofs()));
  for (int i = 0; i < grid.num_dofs(); ++i) op.basis_map[static_cast<std::size_t>(i)] = i;
  op.dof_weights = grid.dof_weights();
  op.hermitian_residual = relative_hermitian_residual(op.matrix);
  return op;
}

/// Block-diagonal mass matrix with block w(x) W(x) per active point.
inline OperatorMatrix assemble_mass(const WeightField& w, const Grid& grid,
                                    const std::vector<int>& basis_map) {
  w.check_on(grid);
  require_spd(w, "assemble_mass");
  if (basis_map.size() != static_cast<std::size_t>(grid.num_dofs())) {
    throw ShapeError("mass assembly expects the full active DOF map");
  }
  OperatorMatrix op;
  op.kind = OperatorKind::Mass;
  op.fiber_dim = grid.fiber_dim;
  op.basis_map = basis_map;
  op.dof_weights = grid.dof_weights();
  const int k = grid.fiber_dim;
  op.matrix = Mat::Zero(grid.num_dofs(), grid.num_dofs());
  op.blocks.reserve(static_cast<std::size_t>(grid.num_points()));
  for (int p = 0; p < grid.num_points(); ++p) {
    Mat block = grid.quad_weights(p) * w.at(p);
    op.matrix.block(p * k, p * k, k, k) = block;
    op.blocks.push_back(std::move(block));
  }
  op.hermitian_residual = relative_hermitian_residual(op.matrix);
  return op;
}

/// sqrt(<f,f> + <Df,Df>), the discrete H1 norm.
inline double norm_h1_discrete(const SpinorField& f, const OperatorMatrix& d, const Grid& grid) {
  f.check_on(grid);
  if (d.order() != grid.num_dofs()) throw ShapeError("operator does not match the grid");
  const SpinorField df = d.apply(f);
  return std::sqrt(inner_l2(f, f, grid).real() + inner_l2(df, df, grid).real());
}

/// Hermitian matrix G of the discrete H1 inner product, <f,g>_H1 = f^dagger G g.
inline Mat h1_metric(const OperatorMatrix& d, const Grid& grid) {
  if (d.order() != grid.num_dofs()) throw ShapeError("operator does not match the grid");
  const RVec w = grid.dof_weights();
  Mat g = d.matrix.adjoint() * w.asDiagonal() * d.matrix;
  g.diagonal() += w.cast<cplx>();
  return 0.5 * (g + g.adjoint());
}

/// Values of psi at x = 0 and x = L on the chiral interval, read off the
/// trigonometric interpolant of the folded field.
inline std::pair<Eigen::Vector2cd, Eigen::Vector2cd> chiral_boundary_values(
    const SpinorField& psi, const Grid& grid) {
  if (grid.geometry.kind != GeometryKind::IntervalChiral) {
    throw ConfigError("boundary values are only defined on the chiral interval");
  }
  psi.check_on(grid);
  const int n = grid.geometry.resolution;
  const double length = grid.geometry.lengths[0];
  const int s = grid.geometry.chirality_sign;
  const Vec f = detail::interval_fold(n, s) * psi.values();
  const RVec xi = detail::lattice_wavenumbers(2 * n, 2.0 * length, 0.5);
  auto eval = [&](double y) {
    cplx acc = 0.0;
    for (int i = 0; i < 2 * n; ++i) {
      const double yi = (i + 0.5) * length / n;
      for (int k = 0; k < 2 * n; ++k) acc += f(i) * std::polar(1.0, xi(k) * (y - yi));
    }
    return acc / double(2 * n);
  };
  const cplx kappa(0.0, double(s));
  const double r = 1.0 / std::sqrt(2.0);
  auto assemble = [&](cplx a, cplx b) {
    Eigen::Vector2cd v;
    v << r * (a + b), r * (a - b);
    return v;
  };
  // a(x) = f(x), b(x) = f(2L - x) / kappa
  const Eigen::Vector2cd at0 = assemble(eval(0.0), eval(2.0 * length) / kappa);
  const Eigen::Vector2cd atL = assemble(eval(length), eval(length) / kappa);
  return {at0, atL};
}

}  // namespace wdirac
