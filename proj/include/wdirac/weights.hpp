#pragma once

// Fiberwise Hermitian weights A(x), their pointwise functional calculus and
// the built-in weakly convergent weight families.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wdirac/domain.hpp"

namespace wdirac {

namespace detail {

inline Eigen::SelfAdjointEigenSolver<Mat> hermitian_eig(const Mat& m) {
  return Eigen::SelfAdjointEigenSolver<Mat>(m);
}

// U f(d) U^dagger for a Hermitian block.
template <typename Fn>
Mat spectral_map(const Mat& m, Fn&& fn) {
  const auto es = hermitian_eig(m);
  RVec d = es.eigenvalues();
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = fn(d(i));
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

/// Per-point Hermitian fiber endomorphism.
class WeightField {
 public:
  WeightField() = default;

  WeightField(std::vector<Mat> values, int fiber_dim)
      : values_(std::move(values)), fiber_dim_(fiber_dim) {
    min_eig_ = std::numeric_limits<double>::infinity();
    max_op_ = 0.0;
    for (const auto& block : values_) {
      if (block.rows() != fiber_dim_ || block.cols() != fiber_dim_) {
        throw ShapeError("weight block size does not match the fiber dimension");
      }
      const double scale = std::max(block.norm(), 1.0e-300);
      if ((block - block.adjoint()).norm() > 1.0e-12 * scale) {
        throw DomainError("weight is not Hermitian at some grid point");
      }
      const RVec eig = detail::hermitian_eig(block).eigenvalues();
      min_eig_ = std::min(min_eig_, eig.minCoeff());
      max_op_ = std::max(max_op_, eig.cwiseAbs().maxCoeff());
    }
  }

  template <typename Fn>
  static WeightField sample(const Grid& grid, Fn&& fn) {
    std::vector<Mat> values;
    values.reserve(static_cast<std::size_t>(grid.num_points()));
    for (const auto& x : grid.points) values.push_back(fn(x));
    return WeightField(std::move(values), grid.fiber_dim);
  }

  /// rho(x) * Id.
  template <typename Fn>
  static WeightField scalar(const Grid& grid, Fn&& rho) {
    const int k = grid.fiber_dim;
    return sample(grid, [&](const std::array<double, 2>& x) -> Mat {
      return Mat::Identity(k, k) * cplx(rho(x), 0.0);
    });
  }

  static WeightField constant(const Grid& grid, const Mat& block) {
    return sample(grid, [&](const std::array<double, 2>&) { return block; });
  }

  static WeightField identity(const Grid& grid) {
    return constant(grid, Mat::Identity(grid.fiber_dim, grid.fiber_dim));
  }

  const Mat& at(int point) const { return values_[static_cast<std::size_t>(point)]; }
  const std::vector<Mat>& values() const { return values_; }
  int fiber_dim() const { return fiber_dim_; }
  int num_points() const { return static_cast<int>(values_.size()); }

  /// Cached minimum pointwise eigenvalue.
  double min_eig() const { return min_eig_; }
  double max_op_norm() const { return max_op_; }

  template <typename Fn>
  WeightField map(Fn&& fn) const {
    std::vector<Mat> out;
    out.reserve(values_.size());
    for (const auto& block : values_) out.push_back(fn(block));
    return WeightField(std::move(out), fiber_dim_);
  }

  WeightField scaled(double c) const {
    return map([c](const Mat& b) -> Mat { return b * c; });
  }

  void check_on(const Grid& grid) const {
    if (fiber_dim_ != grid.fiber_dim || num_points() != grid.num_points()) {
      throw ShapeError("weight field does not live on this grid");
    }
  }

  void check_same_shape(const WeightField& other) const {
    if (fiber_dim_ != other.fiber_dim_ || num_points() != other.num_points()) {
      throw ShapeError("weight fields have different shapes");
    }
  }

  friend WeightField operator+(const WeightField& a, const WeightField& b) {
    a.check_same_shape(b);
    std::vector<Mat> out(a.values_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values_[i] + b.values_[i];
    return WeightField(std::move(out), a.fiber_dim_);
  }

  friend WeightField operator-(const WeightField& a, const WeightField& b) {
    a.check_same_shape(b);
    std::vector<Mat> out(a.values_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values_[i] - b.values_[i];
    return WeightField(std::move(out), a.fiber_dim_);
  }

 private:
  std::vector<Mat> values_;
  int fiber_dim_ = 1;
  double min_eig_ = 0.0;
  double max_op_ = 0.0;
};

/// Pointwise product W(x) f(x).
inline SpinorField apply_pointwise(const WeightField& w, const SpinorField& f) {
  if (w.fiber_dim() != f.fiber_dim() || w.num_points() != f.num_points()) {
    throw ShapeError("weight and field shapes differ");
  }
  const int k = f.fiber_dim();
  Vec out(f.values().size());
  for (int p = 0; p < f.num_points(); ++p) out.segment(p * k, k) = w.at(p) * f.at(p);
  return SpinorField(std::move(out), k);
}

/// Weighted pairing sum_x w(x) <W(x) f(x), g(x)>, conjugate-linear in f.
inline cplx inner_a(const SpinorField& f, const SpinorField& g, const WeightField& w,
                    const Grid& grid) {
  f.check_on(grid);
  g.check_on(grid);
  w.check_on(grid);
  if (!(w.min_eig() > 0.0)) {
    throw DomainError("inner_a requires a positive definite weight");
  }
  return inner_l2(apply_pointwise(w, f), g, grid);
}

struct SpdReport {
  double min_eig = 0.0;
  bool ok = false;
};

/// Default positivity tolerance, relative to the largest pointwise norm.
inline double default_spd_tol(const WeightField& w) { return 1.0e-10 * w.max_op_norm(); }

inline SpdReport validate_spd(const WeightField& w, double tol) {
  return SpdReport{w.min_eig(), w.min_eig() > tol};
}

inline SpdReport validate_spd(const WeightField& w) { return validate_spd(w, default_spd_tol(w)); }

inline void require_spd(const WeightField& w, std::string_view what) {
  if (!validate_spd(w).ok) {
    throw DomainError(std::string(what) + ": weight is not positive definite (min eig " +
                      std::to_string(w.min_eig()) + ")");
  }
}

/// Symmetric square root and inverse square root of an SPD weight.
inline std::pair<WeightField, WeightField> sqrt_pair(const WeightField& w) {
  require_spd(w, "sqrt_pair");
  return {w.map([](const Mat& b) { return detail::spectral_map(b, [](double d) { return std::sqrt(d); }); }),
          w.map([](const Mat& b) {
            return detail::spectral_map(b, [](double d) { return 1.0 / std::sqrt(d); });
          })};
}

inline WeightField inverse(const WeightField& w) {
  require_spd(w, "inverse");
  return w.map([](const Mat& b) { return detail::spectral_map(b, [](double d) { return 1.0 / d; }); });
}

/// (sum_x w(x) |W(x)|_op^p)^(1/p).
inline double lp_norm(const WeightField& w, double p, const Grid& grid) {
  if (!(p >= 1.0)) throw ConfigError("lp_norm requires p >= 1");
  w.check_on(grid);
  double sum = 0.0;
  for (int x = 0; x < grid.num_points(); ++x) {
    const double op = detail::hermitian_eig(w.at(x)).eigenvalues().cwiseAbs().maxCoeff();
    sum += grid.quad_weights(x) * std::pow(op, p);
  }
  return std::pow(sum, 1.0 / p);
}

enum class LoewnerOrder { GE, LE, EQ, INCOMPARABLE };

inline std::string_view to_string(LoewnerOrder o) {
  switch (o) {
    case LoewnerOrder::GE:
      return "GE";
    case LoewnerOrder::LE:
      return "LE";
    case LoewnerOrder::EQ:
      return "EQ";
    case LoewnerOrder::INCOMPARABLE:
      return "INCOMPARABLE";
  }
  return "?";
}

inline LoewnerOrder loewner_compare(const WeightField& w1, const WeightField& w2, double tol) {
  w1.check_same_shape(w2);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int x = 0; x < w1.num_points(); ++x) {
    const RVec eig = detail::hermitian_eig(w1.at(x) - w2.at(x)).eigenvalues();
    lo = std::min(lo, eig.minCoeff());
    hi = std::max(hi, eig.maxCoeff());
  }
  const bool ge = lo >= -tol;
  const bool le = hi <= tol;
  if (ge && le) return LoewnerOrder::EQ;
  if (ge) return LoewnerOrder::GE;
  if (le) return LoewnerOrder::LE;
  return LoewnerOrder::INCOMPARABLE;
}

// ---------------------------------------------------------------------------
// Weak convergence surrogate.

/// Largest |sum_x w <(W_m - W_lim) phi, eta>| over the trigonometric test
/// dictionary: phi = e_b exp(i j.omega x), eta = e_a exp(i k.omega x) with
/// every |j_d|, |k_d| <= dictionary_size and omega_d = 2 pi / L_d.
inline double weak_convergence_residual(const WeightField& w_m, const WeightField& w_limit,
                                        int dictionary_size, const Grid& grid) {
  if (dictionary_size < 1) throw ConfigError("dictionary_size must be >= 1");
  w_m.check_on(grid);
  w_limit.check_on(grid);
  const int dims = grid.geometry.dimension();
  const int span = 2 * dictionary_size;
  const int k = grid.fiber_dim;
  const double om1 = 2.0 * std::numbers::pi / grid.geometry.lengths[0];
  const double om2 = 2.0 * std::numbers::pi / grid.geometry.lengths[1];
  double best = 0.0;
  for (int d1 = -span; d1 <= span; ++d1) {
    for (int d2 = (dims == 2 ? -span : 0); d2 <= (dims == 2 ? span : 0); ++d2) {
      Mat acc = Mat::Zero(k, k);
      for (int x = 0; x < grid.num_points(); ++x) {
        const auto& pt = grid.points[static_cast<std::size_t>(x)];
        const cplx phase = std::polar(1.0, d1 * om1 * pt[0] + d2 * om2 * pt[1]);
        acc += grid.quad_weights(x) * phase * (w_m.at(x) - w_limit.at(x)).conjugate();
      }
      best = std::max(best, acc.cwiseAbs().maxCoeff());
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Weight families.

enum class FamilyKind { OscillatorySine, OscillatorySquared, ConformalExp, RandomSpdPerturbation };

inline std::string_view to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::OscillatorySine:
      return "oscillatory-sine";
    case FamilyKind::OscillatorySquared:
      return "oscillatory-squared";
    case FamilyKind::ConformalExp:
      return "conformal-exp";
    case FamilyKind::RandomSpdPerturbation:
      return "random-spd-perturbation";
  }
  return "?";
}

inline FamilyKind family_kind_from_string(std::string_view name) {
  for (auto kind : {FamilyKind::OscillatorySine, FamilyKind::OscillatorySquared,
                    FamilyKind::ConformalExp, FamilyKind::RandomSpdPerturbation}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown family kind '" + std::string(name) + "'");
}

/// Family parameters. `amplitude` defaults per kind: 1/2 for the oscillatory
/// and random kinds, 1 for conformal-exp (u_m = amplitude sin(.)/m).
struct FamilyParams {
  std::optional<double> amplitude;
  double frequency_scale = 1.0;
  std::uint64_t seed = 0;
  std::optional<WeightField> base;  // random-spd-perturbation limit; Id if absent
};

/// Generator m -> A_m together with its declared weak limit.
class WeightFamily {
 public:
  WeightFamily(FamilyKind kind, FamilyParams params, Grid grid)
      : kind_(kind), params_(std::move(params)), grid_(std::move(grid)) {
    amplitude_ = params_.amplitude.value_or(kind_ == FamilyKind::ConformalExp ? 1.0 : 0.5);
    if (!(params_.frequency_scale > 0.0)) throw ConfigError("frequency_scale must be positive");
    switch (kind_) {
      case FamilyKind::OscillatorySine:
        if (!(std::abs(amplitude_) < 1.0)) {
          throw ConfigError("oscillatory-sine needs |amplitude| < 1");
        }
        limit_ = WeightField::identity(grid_);
        break;
      case FamilyKind::OscillatorySquared:
        if (!(amplitude_ > -1.0)) throw ConfigError("oscillatory-squared needs amplitude > -1");
        limit_ = WeightField::identity(grid_).scaled(1.0 + amplitude_ / 2.0);
        break;
      case FamilyKind::ConformalExp:
        limit_ = WeightField::identity(grid_);
        break;
      case FamilyKind::RandomSpdPerturbation:
        if (!(amplitude_ > 0.0 && amplitude_ < 1.0)) {
          throw ConfigError("random-spd-perturbation needs 0 < amplitude < 1");
        }
        limit_ = params_.base ? *params_.base : WeightField::identity(grid_);
        limit_.check_on(grid_);
        require_spd(limit_, "random-spd-perturbation base");
        if (kRandomDegree >= grid_.geometry.resolution / 4) {
          throw ConfigError("resolution too small for the random perturbation fields");
        }
        break;
    }
  }

  FamilyKind kind() const { return kind_; }
  const FamilyParams& params() const { return params_; }
  double amplitude() const { return amplitude_; }
  const Grid& grid() const { return grid_; }
  const WeightField& declared_limit() const { return limit_; }

  /// Highest member index allowed by the Nyquist guard (m f < N/4).
  int max_member() const {
    if (kind_ == FamilyKind::RandomSpdPerturbation) return std::numeric_limits<int>::max();
    const double cap = grid_.geometry.resolution / 4.0 / params_.frequency_scale;
    int m = static_cast<int>(std::ceil(cap)) - 1;
    while (m >= 1 && !(m * params_.frequency_scale < grid_.geometry.resolution / 4.0)) --m;
    return m;
  }

  WeightField member(int m) const {
    if (m < 1) throw ConfigError("family members are indexed from m = 1");
    if (m > max_member()) {
      throw ConfigError("member m = " + std::to_string(m) +
                        " oscillates above the Nyquist guard (resolution/4) of " +
                        grid_.geometry.describe());
    }
    const double omega = 2.0 * std::numbers::pi * params_.frequency_scale * m /
                         grid_.geometry.lengths[0];
    const double a = amplitude_;
    switch (kind_) {
      case FamilyKind::OscillatorySine:
        return WeightField::scalar(grid_, [&](const auto& x) { return 1.0 + a * std::sin(omega * x[0]); });
      case FamilyKind::OscillatorySquared:
        return WeightField::scalar(grid_, [&](const auto& x) {
          const double s = std::sin(omega * x[0]);
          return 1.0 + a * s * s;
        });
      case FamilyKind::ConformalExp:
        return WeightField::scalar(grid_, [&](const auto& x) {
          return std::exp(a * std::sin(omega * x[0]) / m);
        });
      case FamilyKind::RandomSpdPerturbation:
        return limit_ + random_perturbation(m).scaled(1.0 / m);
    }
    throw ConfigError("unreachable family kind");
  }

  std::string describe() const {
    return std::string(to_string(kind_)) + "[a=" + std::to_string(amplitude_) +
           ",f=" + std::to_string(params_.frequency_scale) + "] on " + grid_.geometry.describe();
  }

  static constexpr int kRandomDegree = 2;

 private:
  // Smooth random Hermitian field scaled to |S(x)|_op <= amplitude * min eig(A).
  WeightField random_perturbation(int m) const {
    std::seed_seq seq{static_cast<std::uint32_t>(params_.seed),
                      static_cast<std::uint32_t>(params_.seed >> 32),
                      static_cast<std::uint32_t>(m)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    const int k = grid_.fiber_dim;
    auto random_hermitian = [&] {
      Mat g(k, k);
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) g(i, j) = cplx(normal(rng), normal(rng));
      }
      return Mat(0.5 * (g + g.adjoint()));
    };
    const int dims = grid_.geometry.dimension();
    struct Term {
      int dim;
      int freq;
      Mat cos_coeff;
      Mat sin_coeff;
    };
    Mat c0 = random_hermitian();
    std::vector<Term> terms;
    for (int d = 0; d < dims; ++d) {
      for (int j = 1; j <= kRandomDegree; ++j) {
        Mat cc = random_hermitian();
        Mat sc = random_hermitian();
        terms.push_back(Term{d, j, std::move(cc), std::move(sc)});
      }
    }
    WeightField raw = WeightField::sample(grid_, [&](const std::array<double, 2>& x) {
      Mat s = c0;
      for (const auto& t : terms) {
        const double ph = 2.0 * std::numbers::pi * t.freq * x[static_cast<std::size_t>(t.dim)] /
                          grid_.geometry.lengths[static_cast<std::size_t>(t.dim)];
        s += std::cos(ph) * t.cos_coeff + std::sin(ph) * t.sin_coeff;
      }
      return s;
    });
    const double scale = amplitude_ * limit_.min_eig() / std::max(raw.max_op_norm(), 1.0e-300);
    return raw.scaled(scale);
  }

  FamilyKind kind_;
  FamilyParams params_;
  Grid grid_;
  double amplitude_ = 0.5;
  WeightField limit_;
};

inline WeightFamily make_family(FamilyKind kind, FamilyParams params, const Geometry& geometry) {
  return WeightFamily(kind, std::move(params), build_grid(geometry));
}

}  // namespace wdirac
