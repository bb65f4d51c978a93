#pragma once

// Continuity diagnostics along weight families: eigenvalue errors, projector
// gaps and eigenspace distances in discrete H1, a Hoelder surrogate, and the
// a priori norm bounds for eigenspinors.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "wdirac/variational.hpp"

namespace wdirac {

/// Runs fn(0..count-1) on up to `threads` workers; results keep index order.
template <typename T, typename Fn>
std::vector<T> parallel_map(int count, int threads, Fn&& fn) {
  std::vector<std::optional<T>> slots(static_cast<std::size_t>(count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  const int workers = std::max(1, std::min(threads, count));
  auto work = [&](int start) {
    for (int i = start; i < count; i += workers) {
      try {
        slots[static_cast<std::size_t>(i)].emplace(fn(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  std::vector<T> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    if (errors[static_cast<std::size_t>(i)]) std::rethrow_exception(errors[static_cast<std::size_t>(i)]);
    out.push_back(std::move(*slots[static_cast<std::size_t>(i)]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Metrics.

/// Hermitian positive definite metric with its Cholesky factor.
class Metric {
 public:
  explicit Metric(Mat g) : g_(0.5 * (g + g.adjoint())), llt_(g_) {
    if (llt_.info() != Eigen::Success) throw NumericError("metric is not positive definite");
  }

  static Metric h1(const OperatorMatrix& d, const Grid& grid) { return Metric(h1_metric(d, grid)); }

  static Metric l2(const Grid& grid) {
    return Metric(Mat(grid.dof_weights().cast<cplx>().asDiagonal()));
  }

  const Mat& matrix() const { return g_; }
  Mat upper_apply(const Mat& v) const { return llt_.matrixU() * v; }       // L^dagger v
  Mat lower_solve(const Mat& v) const { return llt_.matrixL().solve(v); }  // L^{-1} v
  double norm(const Vec& v) const { return std::sqrt(std::abs(v.dot(g_ * v))); }

 private:
  Mat g_;
  Eigen::LLT<Mat> llt_;
};

/// Operator norm of P1 - P2 in the metric G: largest singular value of
/// L^dagger (P1 - P2) L^{-dagger} with G = L L^dagger.
inline double subspace_gap(const SpectralProjector& p1, const SpectralProjector& p2,
                           const Metric& metric) {
  if (p1.basis.rows() != p2.basis.rows() || p1.basis.rows() != metric.matrix().rows()) {
    throw ShapeError("projectors act on different spaces");
  }
  const Eigen::Index r = p1.rank() + p2.rank();
  if (r == 0) return 0.0;
  Mat left(p1.basis.rows(), r);
  Mat right(p1.basis.rows(), r);
  left << p1.basis, -p2.basis;
  right << p1.dual, p2.dual;
  const Mat y = metric.upper_apply(left);
  const Mat z = metric.lower_solve(right);
  Eigen::HouseholderQR<Mat> qy(y);
  Eigen::HouseholderQR<Mat> qz(z);
  const Mat ry = qy.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  const Mat rz = qz.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Mat> svd(ry * rz.adjoint());
  return svd.singularValues()(0);
}

inline double subspace_gap(const SpectralProjector& p1, const SpectralProjector& p2,
                           const OperatorMatrix& d, const Grid& grid) {
  return subspace_gap(p1, p2, Metric::h1(d, grid));
}

/// max|psi| + max_{x != y} |psi(x) - psi(y)| / dist(x, y)^alpha over grid pairs.
inline double holder_norm(const SpinorField& psi, double alpha, const Grid& grid) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("Hoelder exponent must lie in (0, 1)");
  psi.check_on(grid);
  const int n = grid.num_points();
  double sup = 0.0;
  double quotient = 0.0;
  for (int i = 0; i < n; ++i) {
    sup = std::max(sup, psi.at(i).norm());
    for (int j = i + 1; j < n; ++j) {
      const double dist = grid.distance(i, j);
      if (dist <= 0.0) continue;
      quotient = std::max(quotient, (psi.at(i) - psi.at(j)).norm() / std::pow(dist, alpha));
    }
  }
  return sup + quotient;
}

enum class NormKind { H1, Holder };

/// Distance from psi to span(basis): exact in H1 (metric least squares); the
/// Hoelder value evaluates the H1 minimizer and is an upper bound.
inline double eigenspace_distance(const SpinorField& psi, const Mat& basis, NormKind kind,
                                  const Metric& h1, const Grid& grid, double alpha = 0.5) {
  if (basis.cols() == 0) throw RangeError("eigenspace basis is empty");
  psi.check_on(grid);
  const Mat gb = h1.matrix() * basis;
  const Mat gram = basis.adjoint() * gb;
  const Vec rhs = gb.adjoint() * psi.values();
  const Vec coeff = gram.ldlt().solve(rhs);
  const Vec residual = psi.values() - basis * coeff;
  if (kind == NormKind::H1) return h1.norm(residual);
  return holder_norm(SpinorField(residual, psi.fiber_dim()), alpha, grid);
}

inline double eigenspace_distance(const SpinorField& psi, const Mat& basis, NormKind kind,
                                  const OperatorMatrix& d, const Grid& grid, double alpha = 0.5) {
  return eigenspace_distance(psi, basis, kind, Metric::h1(d, grid), grid, alpha);
}

/// Ratio a / (b a + c); strictly below 1/b for positive arguments.
inline double projector_ratio(double a, double b, double c) { return a / (b * a + c); }

// ---------------------------------------------------------------------------
// A priori bounds.

struct AprioriExponents {
  int t1 = 0;
  int t2 = 0;
};

inline AprioriExponents apriori_exponents(int n, double p) {
  if (!(p > n)) throw ConfigError("a priori estimates need p > n");
  // Guard floors against representation error on exact integer quotients.
  const double eps = 1.0e-12;
  AprioriExponents e;
  e.t1 = static_cast<int>(std::floor((n / 2.0) / (p - n) + eps));
  e.t2 = static_cast<int>(std::floor(n * (p - 1.0) / (2.0 * (p - n)) + eps));
  return e;
}

struct NormDiagnostics {
  int k = 0;
  double lambda = 0.0;
  double h1_norm = 0.0;
  double holder_norm = 0.0;
  double bound_h1 = 0.0;      // constant C taken as 1
  double bound_holder = 0.0;
  double ratio_h1 = 0.0;
  double ratio_holder = 0.0;
  AprioriExponents exponents;
};

inline std::vector<NormDiagnostics> apriori_diagnostics(const WeightedSpectrum& spectrum,
                                                        const WeightField& w, const Grid& grid,
                                                        double p, const std::vector<int>& ks,
                                                        double alpha = 0.5) {
  const int n = grid.geometry.dimension();
  const AprioriExponents e = apriori_exponents(n, p);
  const double a_p = lp_norm(w, p, grid);
  const double ainv_p = lp_norm(inverse(w), p, grid);
  std::vector<NormDiagnostics> out;
  for (int k : ks) {
    NormDiagnostics d;
    d.k = k;
    d.exponents = e;
    d.lambda = spectrum.lambda(k);
    const SpinorField phi = spectrum.field(k);
    d.h1_norm = norm_h1_discrete(phi, spectrum.dirac(), grid);
    d.holder_norm = holder_norm(phi, alpha, grid);
    const double lam = std::abs(d.lambda);
    const double tail = std::sqrt(ainv_p) + lam * std::sqrt(a_p);
    d.bound_h1 = std::pow(1.0 + lam * a_p, e.t1) * tail;
    d.bound_holder = std::pow(1.0 + lam * a_p, e.t2) * tail;
    d.ratio_h1 = d.h1_norm / d.bound_h1;
    d.ratio_holder = d.holder_norm / d.bound_holder;
    out.push_back(d);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Continuity experiment.

struct ContinuityOptions {
  int k_max = 4;            // eigenvalue / eigenspace indices |k| <= k_max
  int ell_max = 3;          // projector clusters |l| <= ell_max
  int dictionary_size = 2;  // weak-convergence test dictionary
  double p = 4.0;
  double alpha = 0.5;
  int threads = 1;
  SolveOptions solve;
};

/// Pass/fail thresholds applied to continuity reports.
struct ContinuityThresholds {
  double eigen_reduction = 0.25;
  double eigen_relative = 1.0e-3;
  double gap_reduction = 0.5;
  double distance_final = 5.0e-2;
  double norm_growth = 10.0;
  double zero_tol = 1.0e-9;
};

struct MemberReport {
  int m = 0;
  std::map<int, double> lambda;
  std::map<int, double> lambda_error;
  std::map<int, double> lambda_rel_error;
  std::map<int, double> gap_h1;
  std::map<int, double> gap_l2;
  std::map<int, double> distance_h1;
  std::map<int, double> distance_holder;
  std::map<int, double> distance_l2;
  std::map<int, double> step_one_b;        // B_k^{(m)} over 1 <= i, j <= k
  std::map<int, double> step_one_excess;   // lambda_k(A_m) - lambda_k(A)(1 + k B), positive k
  std::map<int, double> limsup_excess;     // max(0, lambda_k(A_m) - lambda_k(A)), positive k
  double weak_residual = 0.0;
  double weak_residual_inverse = 0.0;
  std::vector<NormDiagnostics> norms;
  std::vector<std::string> diagnostics;
  bool skipped = false;  // ambiguous cluster matching; excluded from trend checks
};

struct ContinuityReport {
  std::string family;
  Geometry geometry;
  ContinuityOptions options;
  std::vector<int> ks;
  std::vector<int> ells;
  std::map<int, double> limit_lambda;
  std::vector<NormDiagnostics> limit_norms;
  std::vector<MemberReport> members;
};

namespace detail {

inline std::vector<int> signed_range(int n) {
  std::vector<int> out;
  for (int k = -n; k <= n; ++k) {
    if (k != 0) out.push_back(k);
  }
  return out;
}

// k_max needed so every cluster |l| <= ell_max and index |k| <= k_max fits.
inline int solve_window(const WeightedSpectrum& s, int k_max, int ell_max) {
  int need = k_max;
  for (int sign : {-1, 1}) {
    for (int l = 1; l <= ell_max; ++l) {
      for (int k : s.cluster(sign * l).indices) need = std::max(need, std::abs(k));
    }
  }
  return need;
}

}  // namespace detail

inline ContinuityReport run_continuity_experiment(const WeightFamily& family,
                                                  const std::vector<int>& member_indices,
                                                  const ContinuityOptions& options) {
  if (member_indices.empty() ||
      !std::is_sorted(member_indices.begin(), member_indices.end())) {
    throw ConfigError("member indices must be non-empty and ascending");
  }
  for (int m : member_indices) {
    if (m > family.max_member()) (void)family.member(m);  // raises the Nyquist error
  }
  const Grid& grid = family.grid();
  const Geometry& geometry = grid.geometry;
  const OperatorMatrix dirac = assemble_dirac(geometry, grid);
  const int h0 = geometry.analytic_kernel_dimension();

  ContinuityReport report;
  report.family = family.describe();
  report.geometry = geometry;
  report.options = options;
  report.ks = detail::signed_range(options.k_max);
  report.ells = detail::signed_range(options.ell_max);

  const WeightField& limit_w = family.declared_limit();
  const OperatorMatrix limit_mass = assemble_mass(limit_w, grid, dirac.basis_map);
  // Solve the limit with headroom, then fix the window from its clusters.
  int probe = std::max(options.k_max, options.ell_max) + 8;
  WeightedSpectrum limit = [&] {
    try {
      return solve_weighted(dirac, limit_mass, probe, h0, options.solve);
    } catch (const TruncationError& e) {
      probe = e.reliable_k_max();
      return solve_weighted(dirac, limit_mass, probe, h0, options.solve);
    }
  }();
  for (int sign : {-1, 1}) {
    if (limit.complete_cluster_count(sign) < options.ell_max) {
      throw RangeError("limit spectrum does not resolve " + std::to_string(options.ell_max) +
                       " complete clusters; increase the resolution");
    }
  }
  const int window = detail::solve_window(limit, options.k_max, options.ell_max);
  for (int k : report.ks) report.limit_lambda[k] = limit.lambda(k);
  report.limit_norms = apriori_diagnostics(limit, limit_w, grid, options.p, report.ks, options.alpha);

  const Metric h1 = Metric::h1(dirac, grid);
  const Metric l2 = Metric::l2(grid);
  const WeightField limit_inv = inverse(limit_w);
  std::map<int, SpectralProjector> limit_proj;
  for (int l : report.ells) limit_proj.emplace(l, projector(limit, l));

  // Step I quantities (A^{-1} is applied through the weight, A phi_i(A) through M).
  auto step_one_b = [&](const WeightField& member_inv, int k) {
    const WeightField diff = member_inv - limit_inv;
    double b = 0.0;
    for (int i = 1; i <= k; ++i) {
      const SpinorField ai = apply_pointwise(limit_w, limit.field(i));
      for (int j = 1; j <= k; ++j) {
        const SpinorField aj = apply_pointwise(limit_w, limit.field(j));
        b = std::max(b, std::abs(inner_l2(apply_pointwise(diff, ai), aj, grid)));
      }
    }
    return b;
  };

  report.members = parallel_map<MemberReport>(
      static_cast<int>(member_indices.size()), options.threads, [&](int idx) {
        MemberReport row;
        row.m = member_indices[static_cast<std::size_t>(idx)];
        const WeightField w = family.member(row.m);
        if (!validate_spd(w).ok) {
          throw DomainError("family member m = " + std::to_string(row.m) +
                            " is not positive definite");
        }
        const WeightField w_inv = inverse(w);
        const OperatorMatrix mass = assemble_mass(w, grid, dirac.basis_map);
        const WeightedSpectrum s = solve_weighted(dirac, mass, window, h0, options.solve);

        for (int k : report.ks) {
          row.lambda[k] = s.lambda(k);
          row.lambda_error[k] = std::abs(s.lambda(k) - limit.lambda(k));
          row.lambda_rel_error[k] = row.lambda_error[k] / std::abs(limit.lambda(k));
          const Mat basis = limit.vectors(limit.cluster(limit.cluster_of(k)).indices);
          const SpinorField phi = s.field(k);
          row.distance_h1[k] = eigenspace_distance(phi, basis, NormKind::H1, h1, grid);
          row.distance_holder[k] =
              eigenspace_distance(phi, basis, NormKind::Holder, h1, grid, options.alpha);
          {
            const Mat gb = l2.matrix() * basis;
            const Vec coeff = (basis.adjoint() * gb).ldlt().solve(gb.adjoint() * phi.values());
            row.distance_l2[k] = l2.norm(phi.values() - basis * coeff);
          }
          if (k > 0) {
            const double b = step_one_b(w_inv, k);
            row.step_one_b[k] = b;
            row.step_one_excess[k] = s.lambda(k) - limit.lambda(k) * (1.0 + k * b);
            row.limsup_excess[k] = std::max(0.0, s.lambda(k) - limit.lambda(k));
          }
        }
        for (int l : report.ells) {
          const Cluster& c = limit.cluster(l);
          // Straddling check: each matched eigenvalue should sit nearest to mu_l.
          for (int k : c.indices) {
            double own = std::abs(s.lambda(k) - c.mean);
            for (const auto& other : limit.clusters()) {
              if (other.label != l && std::abs(s.lambda(k) - other.mean) < own) {
                row.diagnostics.push_back("cluster " + std::to_string(l) + ": lambda_" +
                                          std::to_string(k) + " is nearer limit cluster " +
                                          std::to_string(other.label));
                break;
              }
            }
          }
          const SpectralProjector pm = projector_for_indices(s, c.indices, l);
          row.gap_h1[l] = subspace_gap(pm, limit_proj.at(l), h1);
          row.gap_l2[l] = subspace_gap(pm, limit_proj.at(l), l2);
        }
        row.skipped = !row.diagnostics.empty();
        row.weak_residual = weak_convergence_residual(w, limit_w, options.dictionary_size, grid);
        row.weak_residual_inverse =
            weak_convergence_residual(w_inv, limit_inv, options.dictionary_size, grid);
        row.norms = apriori_diagnostics(s, w, grid, options.p, report.ks, options.alpha);
        return row;
      });
  return report;
}

}  // namespace wdirac
