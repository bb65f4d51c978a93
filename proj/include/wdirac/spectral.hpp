#pragma once

// Generalized eigenproblem D phi = lambda M_A phi with signed indexing.
//
// Positive eigenvalues are indexed k = 1, 2, ... in increasing order and
// negative ones k = -1, -2, ... in decreasing order, so that
//   ... <= lambda_{-2} <= lambda_{-1} < 0 < lambda_1 <= lambda_2 <= ...
// Eigenvectors are A-orthonormal: phi_j^dagger M_A phi_k = delta_jk.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wdirac/assembly.hpp"

namespace wdirac {

struct SolveOptions {
  double kernel_tol = 1.0e-8;         // relative to the largest retained |lambda|
  double reliable_fraction = 0.6;     // truncation guard on max |lambda|
  double cluster_tol_rel = 1.0e-6;
  double cluster_tol_abs = 1.0e-9;    // multiplied by the spectrum scale
};

// ---------------------------------------------------------------------------
// Indexing.

struct IndexedEigenvalues {
  std::vector<int> kernel;                   // positions in the raw list
  std::vector<std::pair<int, int>> signed_;  // (k, position), ascending in lambda
  double scale = 0.0;
  double threshold = 0.0;

  int num_positive() const {
    return static_cast<int>(std::count_if(signed_.begin(), signed_.end(),
                                          [](const auto& p) { return p.first > 0; }));
  }
  int num_negative() const { return static_cast<int>(signed_.size()) - num_positive(); }
};

inline IndexedEigenvalues index_eigenvalues(std::span<const double> raw, double kernel_tol,
                                            std::optional<int> kernel_dim_hint) {
  IndexedEigenvalues out;
  for (double v : raw) out.scale = std::max(out.scale, std::abs(v));
  out.threshold = kernel_tol * out.scale;
  std::vector<int> neg;
  std::vector<int> pos;
  for (int i = 0; i < static_cast<int>(raw.size()); ++i) {
    const double v = raw[static_cast<std::size_t>(i)];
    const double a = std::abs(v);
    if (a > out.threshold / 10.0 && a < out.threshold * 10.0) {
      throw DiagnosticError("eigenvalue " + std::to_string(v) +
                            " lies within a factor 10 of the kernel threshold " +
                            std::to_string(out.threshold) + "; increase the resolution");
    }
    if (a <= out.threshold) {
      out.kernel.push_back(i);
    } else if (v < 0.0) {
      neg.push_back(i);
    } else {
      pos.push_back(i);
    }
  }
  if (kernel_dim_hint && static_cast<int>(out.kernel.size()) != *kernel_dim_hint) {
    throw DiagnosticError("kernel dimension " + std::to_string(out.kernel.size()) +
                          " contradicts the expected " + std::to_string(*kernel_dim_hint));
  }
  auto value = [&](int i) { return raw[static_cast<std::size_t>(i)]; };
  std::stable_sort(neg.begin(), neg.end(), [&](int a, int b) { return value(a) > value(b); });
  std::stable_sort(pos.begin(), pos.end(), [&](int a, int b) { return value(a) < value(b); });
  for (int j = static_cast<int>(neg.size()) - 1; j >= 0; --j) {
    out.signed_.emplace_back(-(j + 1), neg[static_cast<std::size_t>(j)]);
  }
  for (int j = 0; j < static_cast<int>(pos.size()); ++j) {
    out.signed_.emplace_back(j + 1, pos[static_cast<std::size_t>(j)]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Clusters of distinct eigenvalues.

struct Cluster {
  int label = 0;             // l = +-1, +-2, ...
  double mean = 0.0;         // mu_l
  std::vector<int> indices;  // signed indices, ordered by |k|
  bool complete = true;      // false when the retained window may cut it

  int multiplicity() const { return static_cast<int>(indices.size()); }
};

/// Groups same-sign consecutive eigenvalues (given by signed index) whose
/// spacing is within abs_tol + rel_tol * max(|a|, |b|).
inline std::vector<Cluster> cluster_distinct(const std::map<int, double>& eigenvalues,
                                             double rel_tol, double abs_tol) {
  std::vector<Cluster> out;
  auto close = [&](double a, double b) {
    return std::abs(a - b) <= abs_tol + rel_tol * std::max(std::abs(a), std::abs(b));
  };
  for (int sign : {-1, 1}) {
    std::vector<Cluster> side;
    for (int k = sign;; k += sign) {
      const auto it = eigenvalues.find(k);
      if (it == eigenvalues.end()) break;
      if (side.empty() || !close(eigenvalues.at(side.back().indices.back()), it->second)) {
        Cluster c;
        c.label = sign * (static_cast<int>(side.size()) + 1);
        side.push_back(c);
      }
      side.back().indices.push_back(k);
    }
    for (auto& c : side) {
      double sum = 0.0;
      for (int k : c.indices) sum += eigenvalues.at(k);
      c.mean = sum / c.multiplicity();
    }
    if (sign < 0) {
      std::reverse(side.begin(), side.end());
    }
    out.insert(out.end(), side.begin(), side.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mass-matrix helpers.

/// M v using the block structure of a mass operator.
inline Mat mass_apply(const OperatorMatrix& m, const Mat& v) {
  if (m.blocks.empty()) return m.matrix * v;
  const int k = m.fiber_dim;
  Mat out(v.rows(), v.cols());
  for (std::size_t p = 0; p < m.blocks.size(); ++p) {
    const int r = static_cast<int>(p) * k;
    out.middleRows(r, k) = m.blocks[p] * v.middleRows(r, k);
  }
  return out;
}

inline Vec mass_apply_vec(const OperatorMatrix& m, const Vec& v) {
  return mass_apply(m, Mat(v)).col(0);
}

namespace detail {

// Block-diagonal M^{-1/2} (or M^{-1} with power = -1).
inline std::vector<Mat> mass_block_power(const OperatorMatrix& m, double power) {
  if (m.blocks.empty()) throw NumericError("mass operator has no block structure");
  std::vector<Mat> out;
  out.reserve(m.blocks.size());
  for (const auto& b : m.blocks) {
    const auto es = hermitian_eig(b);
    if (!(es.eigenvalues().minCoeff() > 0.0)) {
      throw NumericError("mass matrix is not positive definite; factorization failed");
    }
    RVec d = es.eigenvalues();
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::pow(d(i), power);
    out.push_back(es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint());
  }
  return out;
}

inline Mat block_left(const std::vector<Mat>& blocks, int k, const Mat& v) {
  Mat out(v.rows(), v.cols());
  for (std::size_t p = 0; p < blocks.size(); ++p) {
    const int r = static_cast<int>(p) * k;
    out.middleRows(r, k) = blocks[p] * v.middleRows(r, k);
  }
  return out;
}

inline Mat block_right(const Mat& v, const std::vector<Mat>& blocks, int k) {
  Mat out(v.rows(), v.cols());
  for (std::size_t p = 0; p < blocks.size(); ++p) {
    const int c = static_cast<int>(p) * k;
    out.middleCols(c, k) = v.middleCols(c, k) * blocks[p];
  }
  return out;
}

}  // namespace detail

/// M^{-1} v for a block-diagonal mass operator.
inline Mat mass_solve(const OperatorMatrix& m, const Mat& v) {
  return detail::block_left(detail::mass_block_power(m, -1.0), m.fiber_dim, v);
}

/// Quadrature-weighted (stiffness) form of a nodal Dirac matrix: diag(w) D.
inline Mat stiffness(const OperatorMatrix& d) {
  Mat k = d.dof_weights.cast<cplx>().asDiagonal() * d.matrix;
  return 0.5 * (k + k.adjoint());
}

/// Modified Gram-Schmidt (two passes) in the inner product of M.
inline Mat orthonormalize_a(const Mat& vectors, const OperatorMatrix& m) {
  Mat q = vectors;
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const double original = std::sqrt(std::abs(q.col(j).dot(mass_apply_vec(m, q.col(j)))));
    for (int pass = 0; pass < 2; ++pass) {
      const Vec mq = mass_apply_vec(m, q.col(j));
      for (Eigen::Index i = 0; i < j; ++i) {
        q.col(j) -= q.col(i).dot(mq) * q.col(i);
      }
    }
    const double norm = std::sqrt(std::abs(q.col(j).dot(mass_apply_vec(m, q.col(j)))));
    if (!(norm > 1.0e-10 * original) || original == 0.0) {
      throw NumericError("A-orthonormalization: vectors are numerically dependent");
    }
    q.col(j) /= norm;
  }
  return q;
}

// ---------------------------------------------------------------------------
// Spectrum.

class WeightedSpectrum {
 public:
  struct Data {
    std::shared_ptr<const OperatorMatrix> dirac;
    std::shared_ptr<const OperatorMatrix> mass;
    std::vector<int> indices;  // ascending in lambda
    RVec eigenvalues;
    Mat eigenvectors;
    RVec residuals;
    Mat kernel_basis;
    std::vector<Cluster> clusters;
    SolveOptions options;
    double scale = 0.0;
    double reliable_bound = 0.0;
    int reliable_k_max = 0;
  };

  explicit WeightedSpectrum(Data data) : d_(std::move(data)) {
    for (int c = 0; c < static_cast<int>(d_.indices.size()); ++c) {
      column_[d_.indices[static_cast<std::size_t>(c)]] = c;
    }
    for (int c = 0; c < static_cast<int>(d_.clusters.size()); ++c) {
      cluster_pos_[d_.clusters[static_cast<std::size_t>(c)].label] = c;
      for (int k : d_.clusters[static_cast<std::size_t>(c)].indices) {
        cluster_of_[k] = d_.clusters[static_cast<std::size_t>(c)].label;
      }
    }
  }

  const OperatorMatrix& dirac() const { return *d_.dirac; }
  const OperatorMatrix& mass() const { return *d_.mass; }
  const SolveOptions& options() const { return d_.options; }

  const std::vector<int>& indices() const { return d_.indices; }
  bool has(int k) const { return column_.count(k) != 0; }
  int k_max() const {
    int m = 0;
    for (int k : d_.indices) m = std::max(m, std::abs(k));
    return m;
  }
  int num_positive() const {
    return static_cast<int>(std::count_if(d_.indices.begin(), d_.indices.end(),
                                          [](int k) { return k > 0; }));
  }
  int num_negative() const { return static_cast<int>(d_.indices.size()) - num_positive(); }

  double lambda(int k) const { return d_.eigenvalues(column(k)); }
  Vec phi(int k) const { return d_.eigenvectors.col(column(k)); }
  SpinorField field(int k) const { return SpinorField(phi(k), dirac().fiber_dim); }
  double residual(int k) const { return d_.residuals(column(k)); }

  const RVec& eigenvalues() const { return d_.eigenvalues; }
  const Mat& eigenvectors() const { return d_.eigenvectors; }
  const Mat& kernel_basis() const { return d_.kernel_basis; }
  int kernel_dim() const { return static_cast<int>(d_.kernel_basis.cols()); }

  /// Columns phi_k for the given signed indices.
  Mat vectors(const std::vector<int>& ks) const {
    Mat out(d_.eigenvectors.rows(), static_cast<Eigen::Index>(ks.size()));
    for (std::size_t i = 0; i < ks.size(); ++i) {
      out.col(static_cast<Eigen::Index>(i)) = phi(ks[i]);
    }
    return out;
  }

  /// Kernel basis followed by all retained nonzero eigenvectors.
  Mat retained_basis() const {
    Mat out(d_.eigenvectors.rows(), kernel_dim() + d_.eigenvectors.cols());
    out << d_.kernel_basis, d_.eigenvectors;
    return out;
  }

  const std::vector<Cluster>& clusters() const { return d_.clusters; }
  bool has_cluster(int label) const { return cluster_pos_.count(label) != 0; }
  const Cluster& cluster(int label) const {
    const auto it = cluster_pos_.find(label);
    if (it == cluster_pos_.end()) {
      throw RangeError("cluster " + std::to_string(label) + " is not in the retained spectrum");
    }
    return d_.clusters[static_cast<std::size_t>(it->second)];
  }
  int cluster_of(int k) const {
    const auto it = cluster_of_.find(k);
    if (it == cluster_of_.end()) throw RangeError("index " + std::to_string(k) + " not retained");
    return it->second;
  }
  /// Largest L with clusters +-1..+-L all retained and complete.
  int complete_cluster_count(int sign) const {
    int l = 0;
    while (has_cluster(sign * (l + 1)) && cluster(sign * (l + 1)).complete) ++l;
    return l;
  }

  double scale() const { return d_.scale; }
  double reliable_bound() const { return d_.reliable_bound; }
  int reliable_k_max() const { return d_.reliable_k_max; }

 private:
  int column(int k) const {
    const auto it = column_.find(k);
    if (it == column_.end()) throw RangeError("eigen index " + std::to_string(k) + " not retained");
    return it->second;
  }

  Data d_;
  std::map<int, int> column_;
  std::map<int, int> cluster_pos_;
  std::map<int, int> cluster_of_;
};

/// All generalized eigenvalues and M-orthonormal eigenvectors of (D, M_A),
/// computed by symmetric-root whitening H = M^{-1/2} (w D) M^{-1/2}.
inline std::pair<RVec, Mat> whitened_eigensystem(const OperatorMatrix& d, const OperatorMatrix& m) {
  if (d.kind != OperatorKind::Dirac || m.kind != OperatorKind::Mass) {
    throw ShapeError("expected a Dirac operator and a mass operator");
  }
  if (!d.same_space(m)) throw ShapeError("Dirac and mass operators act on different DOF spaces");
  if (d.hermitian_residual > 1.0e-10) throw NumericError("Dirac matrix is not Hermitian");
  const std::vector<Mat> inv_sqrt = detail::mass_block_power(m, -0.5);
  const int k = m.fiber_dim;
  Mat h = detail::block_right(detail::block_left(inv_sqrt, k, stiffness(d)), inv_sqrt, k);
  h = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  if (es.info() != Eigen::Success) throw NumericError("dense Hermitian eigensolver failed");
  return {es.eigenvalues(), detail::block_left(inv_sqrt, k, es.eigenvectors())};
}

/// k_max = kAllReliable keeps every index inside the reliable window.
inline constexpr int kAllReliable = 0;

inline WeightedSpectrum solve_weighted(const OperatorMatrix& d, const OperatorMatrix& m,
                                       int k_max, std::optional<int> kernel_dim_hint,
                                       const SolveOptions& options = {}) {
  if (k_max < 0) throw RangeError("k_max must be >= 1");
  const Eigen::Index order = d.order();
  if (2 * k_max + kernel_dim_hint.value_or(0) > order) {
    throw RangeError("2 k_max + kernel dimension exceeds the matrix order");
  }
  auto [values, vectors] = whitened_eigensystem(d, m);

  const double top = values.cwiseAbs().maxCoeff();
  const double bound = options.reliable_fraction * top;
  std::vector<int> reliable;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (std::abs(values(i)) < bound) reliable.push_back(static_cast<int>(i));
  }
  std::vector<double> reliable_values;
  for (int i : reliable) reliable_values.push_back(values(i));
  // Kernel threshold is relative to the largest retained |lambda|; first pass
  // on the reliable window finds the indexing, second pass rescales.
  IndexedEigenvalues pre = index_eigenvalues(reliable_values, options.kernel_tol, std::nullopt);
  const int reliable_k_max = std::min(pre.num_positive(), pre.num_negative());
  if (k_max == kAllReliable) k_max = reliable_k_max;
  if (k_max < 1) throw RangeError("reliable window holds no eigenvalue pair");
  if (k_max > reliable_k_max) {
    throw TruncationError("k_max = " + std::to_string(k_max) +
                              " exceeds the reliable window; reliable k_max = " +
                              std::to_string(reliable_k_max),
                          reliable_k_max);
  }
  double scale = 0.0;
  for (const auto& [k, pos] : pre.signed_) {
    if (std::abs(k) <= k_max) scale = std::max(scale, std::abs(reliable_values[static_cast<std::size_t>(pos)]));
  }
  std::vector<double> window;
  std::vector<int> window_pos;
  for (std::size_t i = 0; i < reliable_values.size(); ++i) {
    window.push_back(reliable_values[i]);
    window_pos.push_back(reliable[i]);
  }
  // Index against the retained scale.
  IndexedEigenvalues idx;
  {
    IndexedEigenvalues tmp = index_eigenvalues(window, options.kernel_tol * scale /
                                                           std::max(pre.scale, 1.0e-300),
                                               kernel_dim_hint);
    idx = std::move(tmp);
  }

  WeightedSpectrum::Data data;
  data.dirac = std::make_shared<const OperatorMatrix>(d);
  data.mass = std::make_shared<const OperatorMatrix>(m);
  data.options = options;
  data.scale = scale;
  data.reliable_bound = bound;
  data.reliable_k_max = reliable_k_max;

  std::map<int, double> all_reliable;
  for (const auto& [k, pos] : idx.signed_) all_reliable[k] = window[static_cast<std::size_t>(pos)];
  std::map<int, double> kept;
  for (const auto& [k, v] : all_reliable) {
    if (std::abs(k) <= k_max) kept[k] = v;
  }
  const double abs_tol = options.cluster_tol_abs * scale;
  data.clusters = cluster_distinct(kept, options.cluster_tol_rel, abs_tol);
  // The outermost cluster on each side is complete only if the next reliable
  // eigenvalue is separated from it.
  for (auto& c : data.clusters) {
    const int sign = c.label > 0 ? 1 : -1;
    const int next = sign * (k_max + 1);
    if (std::abs(c.indices.back()) != k_max) continue;
    const auto it = all_reliable.find(next);
    if (it == all_reliable.end()) {
      c.complete = false;
    } else {
      const double a = kept.at(c.indices.back());
      const double b = it->second;
      c.complete = std::abs(a - b) > abs_tol + options.cluster_tol_rel * std::max(std::abs(a), std::abs(b));
    }
  }

  const Eigen::Index n = order;
  std::vector<int> ks;
  for (const auto& [k, v] : kept) ks.push_back(k);
  data.indices = ks;
  data.eigenvalues.resize(static_cast<Eigen::Index>(ks.size()));
  data.eigenvectors.resize(n, static_cast<Eigen::Index>(ks.size()));
  std::map<int, int> pos_of;
  for (const auto& [k, pos] : idx.signed_) pos_of[k] = window_pos[static_cast<std::size_t>(pos)];
  for (std::size_t c = 0; c < ks.size(); ++c) {
    data.eigenvalues(static_cast<Eigen::Index>(c)) = kept.at(ks[c]);
    data.eigenvectors.col(static_cast<Eigen::Index>(c)) = vectors.col(pos_of.at(ks[c]));
  }
  data.kernel_basis.resize(n, static_cast<Eigen::Index>(idx.kernel.size()));
  for (std::size_t c = 0; c < idx.kernel.size(); ++c) {
    data.kernel_basis.col(static_cast<Eigen::Index>(c)) =
        vectors.col(window_pos[static_cast<std::size_t>(idx.kernel[c])]);
  }

  // Re-orthonormalize within clusters and the kernel.
  std::map<int, int> col_of;
  for (std::size_t c = 0; c < ks.size(); ++c) col_of[ks[c]] = static_cast<int>(c);
  for (const auto& cl : data.clusters) {
    if (cl.multiplicity() < 2) continue;
    Mat block(n, cl.multiplicity());
    for (int j = 0; j < cl.multiplicity(); ++j) {
      block.col(j) = data.eigenvectors.col(col_of.at(cl.indices[static_cast<std::size_t>(j)]));
    }
    block = orthonormalize_a(block, m);
    for (int j = 0; j < cl.multiplicity(); ++j) {
      data.eigenvectors.col(col_of.at(cl.indices[static_cast<std::size_t>(j)])) = block.col(j);
    }
  }
  if (data.kernel_basis.cols() > 0) data.kernel_basis = orthonormalize_a(data.kernel_basis, m);

  const Mat kmat = stiffness(d);
  const Mat kv = kmat * data.eigenvectors;
  const Mat mv = mass_apply(m, data.eigenvectors);
  data.residuals.resize(data.eigenvalues.size());
  for (Eigen::Index c = 0; c < data.eigenvalues.size(); ++c) {
    data.residuals(c) = (kv.col(c) - data.eigenvalues(c) * mv.col(c)).norm() /
                        data.eigenvectors.col(c).norm();
  }
  return WeightedSpectrum(std::move(data));
}

// ---------------------------------------------------------------------------
// Spectral projectors.

/// A-orthogonal projector P f = sum_j phi_j <A phi_j, f>.
struct SpectralProjector {
  int label = 0;
  Mat basis;  // phi_j
  Mat dual;   // M_A phi_j

  int rank() const { return static_cast<int>(basis.cols()); }
  Mat matrix() const { return basis * dual.adjoint(); }
  Vec apply(const Vec& f) const { return basis * (dual.adjoint() * f); }
  SpinorField apply(const SpinorField& f) const {
    return SpinorField(apply(f.values()), f.fiber_dim());
  }
};

inline SpectralProjector projector_for_indices(const WeightedSpectrum& spectrum,
                                               const std::vector<int>& ks, int label) {
  SpectralProjector p;
  p.label = label;
  p.basis = spectrum.vectors(ks);
  p.dual = mass_apply(spectrum.mass(), p.basis);
  return p;
}

inline SpectralProjector projector(const WeightedSpectrum& spectrum, int label) {
  const Cluster& c = spectrum.cluster(label);
  if (!c.complete) {
    throw RangeError("cluster " + std::to_string(label) + " is cut by the retained window");
  }
  return projector_for_indices(spectrum, c.indices, label);
}

inline SpectralProjector kernel_projector(const WeightedSpectrum& spectrum) {
  SpectralProjector p;
  p.label = 0;
  p.basis = spectrum.kernel_basis();
  p.dual = mass_apply(spectrum.mass(), p.basis);
  return p;
}

}  // namespace wdirac
