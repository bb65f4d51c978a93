#pragma once

// Flat spin model geometries, their grids and the discrete L2 pairing.
//
// Degrees of freedom are laid out point-major: the fiber component c of grid
// point p sits at index p * fiber_dim + c. On the torus the point index is
// p = i1 * N + i2 with i1 running along the first period.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wdirac/error.hpp"

namespace wdirac {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

enum class GeometryKind { CircleS1, IntervalChiral, Torus2 };

inline std::string_view to_string(GeometryKind kind) {
  switch (kind) {
    case GeometryKind::CircleS1:
      return "circle";
    case GeometryKind::IntervalChiral:
      return "interval";
    case GeometryKind::Torus2:
      return "torus";
  }
  return "unknown";
}

/// Flat spin model domain.
///
/// `twist` holds the spin-structure flag per period (0 periodic, 1/2
/// antiperiodic); the circle uses twist[0], the torus both entries and the
/// chiral interval none. `resolution` is the number of grid points per
/// dimension.
struct Geometry {
  GeometryKind kind = GeometryKind::CircleS1;
  std::array<double, 2> lengths{2.0 * std::numbers::pi, 2.0 * std::numbers::pi};
  std::array<double, 2> twist{0.0, 0.0};
  int chirality_sign = 1;
  int resolution = 16;

  static Geometry circle(double length, int resolution, double twist) {
    Geometry g;
    g.kind = GeometryKind::CircleS1;
    g.lengths = {length, length};
    g.twist = {twist, 0.0};
    g.resolution = resolution;
    g.validate();
    return g;
  }

  static Geometry interval(double length, int resolution, int chirality_sign = 1) {
    Geometry g;
    g.kind = GeometryKind::IntervalChiral;
    g.lengths = {length, length};
    g.chirality_sign = chirality_sign;
    g.resolution = resolution;
    g.validate();
    return g;
  }

  static Geometry torus(double length1, double length2, int resolution, double twist1,
                        double twist2) {
    Geometry g;
    g.kind = GeometryKind::Torus2;
    g.lengths = {length1, length2};
    g.twist = {twist1, twist2};
    g.resolution = resolution;
    g.validate();
    return g;
  }

  int dimension() const { return kind == GeometryKind::Torus2 ? 2 : 1; }
  int fiber_dim() const { return kind == GeometryKind::CircleS1 ? 1 : 2; }

  int num_points() const {
    return kind == GeometryKind::Torus2 ? resolution * resolution : resolution;
  }

  double volume() const {
    return kind == GeometryKind::Torus2 ? lengths[0] * lengths[1] : lengths[0];
  }

  /// Complex dimension of ker D for the continuum operator.
  int analytic_kernel_dimension() const {
    switch (kind) {
      case GeometryKind::CircleS1:
        return twist[0] == 0.0 ? 1 : 0;
      case GeometryKind::IntervalChiral:
        return 0;
      case GeometryKind::Torus2:
        return (twist[0] == 0.0 && twist[1] == 0.0) ? 2 : 0;
    }
    return 0;
  }

  void validate() const {
    if (resolution < 8 || resolution % 2 != 0) {
      throw ConfigError("geometry resolution must be even and >= 8, got " +
                        std::to_string(resolution));
    }
    const int dims = dimension();
    for (int d = 0; d < dims; ++d) {
      if (!(lengths[d] > 0.0) || !std::isfinite(lengths[d])) {
        throw ConfigError("geometry lengths must be positive");
      }
    }
    auto twist_ok = [](double t) { return t == 0.0 || t == 0.5; };
    if (kind == GeometryKind::CircleS1 && !twist_ok(twist[0])) {
      throw ConfigError("circle spin twist must be 0 or 1/2");
    }
    if (kind == GeometryKind::Torus2 && !(twist_ok(twist[0]) && twist_ok(twist[1]))) {
      throw ConfigError("torus spin twists must be 0 or 1/2");
    }
    if (kind == GeometryKind::IntervalChiral && chirality_sign != 1 && chirality_sign != -1) {
      throw ConfigError("chirality_sign must be +1 or -1");
    }
  }

  std::string describe() const {
    std::string s{to_string(kind)};
    s += "(L=" + std::to_string(lengths[0]);
    if (kind == GeometryKind::Torus2) s += "x" + std::to_string(lengths[1]);
    s += ",N=" + std::to_string(resolution);
    if (kind == GeometryKind::CircleS1) s += ",twist=" + std::to_string(twist[0]);
    if (kind == GeometryKind::Torus2) {
      s += ",twist=(" + std::to_string(twist[0]) + "," + std::to_string(twist[1]) + ")";
    }
    if (kind == GeometryKind::IntervalChiral) s += ",chirality=" + std::to_string(chirality_sign);
    return s + ")";
  }
};

/// Uniform grid with its quadrature.
///
/// Periodic geometries use the periodic trapezoid rule (nodes at jL/N); the
/// chiral interval uses the cell-centred midpoint rule (nodes at (j+1/2)L/N).
struct Grid {
  Geometry geometry;
  std::vector<std::array<double, 2>> points;
  RVec quad_weights;
  int fiber_dim = 1;

  int num_points() const { return static_cast<int>(points.size()); }
  int num_dofs() const { return num_points() * fiber_dim; }
  double volume() const { return quad_weights.sum(); }

  /// Quadrature weight of every degree of freedom (weight of its point).
  RVec dof_weights() const {
    RVec w(num_dofs());
    for (int p = 0; p < num_points(); ++p) {
      w.segment(p * fiber_dim, fiber_dim).setConstant(quad_weights(p));
    }
    return w;
  }

  /// Geodesic distance; minimum image on periodic directions.
  double distance(int i, int j) const {
    const auto& a = points[static_cast<std::size_t>(i)];
    const auto& b = points[static_cast<std::size_t>(j)];
    if (geometry.kind == GeometryKind::IntervalChiral) return std::abs(a[0] - b[0]);
    double sum = 0.0;
    for (int d = 0; d < geometry.dimension(); ++d) {
      const double length = geometry.lengths[static_cast<std::size_t>(d)];
      double delta = std::fmod(std::abs(a[static_cast<std::size_t>(d)] -
                                        b[static_cast<std::size_t>(d)]),
                               length);
      delta = std::min(delta, length - delta);
      sum += delta * delta;
    }
    return std::sqrt(sum);
  }

  bool same_as(const Grid& other) const {
    return fiber_dim == other.fiber_dim && num_points() == other.num_points() &&
           geometry.kind == other.geometry.kind &&
           geometry.lengths == other.geometry.lengths;
  }
};

inline Grid build_grid(const Geometry& geometry) {
  geometry.validate();
  Grid grid;
  grid.geometry = geometry;
  grid.fiber_dim = geometry.fiber_dim();
  const int n = geometry.resolution;
  switch (geometry.kind) {
    case GeometryKind::CircleS1: {
      const double h = geometry.lengths[0] / n;
      for (int j = 0; j < n; ++j) grid.points.push_back({j * h, 0.0});
      grid.quad_weights = RVec::Constant(n, h);
      break;
    }
    case GeometryKind::IntervalChiral: {
      const double h = geometry.lengths[0] / n;
      for (int j = 0; j < n; ++j) grid.points.push_back({(j + 0.5) * h, 0.0});
      grid.quad_weights = RVec::Constant(n, h);
      break;
    }
    case GeometryKind::Torus2: {
      const double h1 = geometry.lengths[0] / n;
      const double h2 = geometry.lengths[1] / n;
      for (int i1 = 0; i1 < n; ++i1) {
        for (int i2 = 0; i2 < n; ++i2) grid.points.push_back({i1 * h1, i2 * h2});
      }
      grid.quad_weights = RVec::Constant(n * n, h1 * h2);
      break;
    }
  }
  return grid;
}

/// Nodal values of a spinor field, one fiber vector per grid point.
class SpinorField {
 public:
  SpinorField() = default;
  SpinorField(Vec values, int fiber_dim) : values_(std::move(values)), fiber_dim_(fiber_dim) {
    if (fiber_dim_ <= 0 || values_.size() % fiber_dim_ != 0) {
      throw ShapeError("spinor field length is not a multiple of the fiber dimension");
    }
  }

  static SpinorField zeros(const Grid& grid) {
    return SpinorField(Vec::Zero(grid.num_dofs()), grid.fiber_dim);
  }

  /// Samples `fn(point) -> fiber vector` on the grid.
  template <typename Fn>
  static SpinorField sample(const Grid& grid, Fn&& fn) {
    Vec v(grid.num_dofs());
    for (int p = 0; p < grid.num_points(); ++p) {
      v.segment(p * grid.fiber_dim, grid.fiber_dim) = fn(grid.points[static_cast<std::size_t>(p)]);
    }
    return SpinorField(std::move(v), grid.fiber_dim);
  }

  const Vec& values() const { return values_; }
  int fiber_dim() const { return fiber_dim_; }
  int num_points() const { return static_cast<int>(values_.size()) / fiber_dim_; }

  auto at(int point) const { return values_.segment(point * fiber_dim_, fiber_dim_); }

  void check_on(const Grid& grid) const {
    if (fiber_dim_ != grid.fiber_dim || num_points() != grid.num_points()) {
      throw ShapeError("spinor field does not live on this grid");
    }
  }

 private:
  Vec values_;
  int fiber_dim_ = 1;
};

/// Discrete L2 pairing, conjugate-linear in the first slot.
inline cplx inner_l2(const SpinorField& f, const SpinorField& g, const Grid& grid) {
  f.check_on(grid);
  g.check_on(grid);
  return f.values().dot(grid.dof_weights().asDiagonal() * g.values());
}

}  // namespace wdirac
