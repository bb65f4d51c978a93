#pragma once

// Experiment pipelines (spectrum, minmax, continuity, compare, wave), their
// pass/fail checks, and the run manifest.

#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <complex>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "wdirac/config.hpp"
#include "wdirac/io.hpp"
#include "wdirac/wavekernel.hpp"

namespace wdirac {

inline constexpr const char* kVersion = "1.0.0";

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string note;
};

inline Check make_check(std::string name, double value, double threshold, std::string note = {}) {
  return Check{std::move(name), value, threshold, value <= threshold, std::move(note)};
}

inline bool all_pass(const std::vector<Check>& checks) {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

inline CsvTable checks_table(const std::vector<Check>& checks) {
  CsvTable t({"check", "value", "threshold", "pass", "note"});
  for (const auto& c : checks) t.row() << c.name << c.value << c.threshold << c.pass << c.note;
  return t;
}

// ---------------------------------------------------------------------------
// Shared solving helpers.

struct Problem {
  Grid grid;
  OperatorMatrix dirac;
  int kernel_hint = 0;
};

inline Problem make_problem(const Geometry& g) {
  Grid grid = build_grid(g);
  OperatorMatrix d = assemble_dirac(g, grid);
  return Problem{std::move(grid), std::move(d), g.analytic_kernel_dimension()};
}

inline WeightedSpectrum solve_for(const Problem& p, const WeightField& w, int k_max,
                                  const SolveOptions& opts = {}) {
  return solve_weighted(p.dirac, assemble_mass(w, p.grid, p.dirac.basis_map), k_max,
                        p.kernel_hint, opts);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  Fnv1a h;
  h.bytes(&seed, sizeof seed);
  h.bytes(&index, sizeof index);
  return h.value();
}

/// Random smooth pair with A1 - A2 >= 0 pointwise (strictly, by at least c/2).
inline std::pair<WeightField, WeightField> random_loewner_pair(const Grid& grid, std::uint64_t seed,
                                                               int index) {
  const std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(index));
  std::mt19937_64 rng(s);
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  const double c = unif(rng);
  const double base_scale = 0.5 + unif(rng);
  FamilyParams lower;
  lower.amplitude = 0.6;
  lower.seed = s;
  FamilyParams gap;
  gap.amplitude = 0.5;
  gap.seed = s ^ 0x9e3779b97f4a7c15ULL;
  const WeightField a2 =
      WeightFamily(FamilyKind::RandomSpdPerturbation, lower, grid).member(1).scaled(base_scale);
  const WeightField e = WeightFamily(FamilyKind::RandomSpdPerturbation, gap, grid).member(1).scaled(c);
  return {a2 + e, a2};
}

// ---------------------------------------------------------------------------
// Checks shared by the CLI and the acceptance suite.

/// Eigenvalue-error, projector-gap and distance trends of a continuity report.
inline std::vector<Check> continuity_checks(const ContinuityReport& report,
                                            const ContinuityThresholds& th = {}) {
  std::vector<Check> out;
  ContinuityReport r = report;
  std::erase_if(r.members, [](const MemberReport& m) { return m.skipped; });
  const std::string tag = r.family;
  if (r.members.size() < 2) {
    out.push_back(make_check("usable_members", static_cast<double>(r.members.size()), -1.0,
                             tag + "; fewer than two members survived cluster matching"));
    return out;
  }
  const MemberReport& first = r.members.front();
  const MemberReport& last = r.members.back();

  double eig_ratio = 0.0;
  double rel = 0.0;
  for (int k : r.ks) {
    const double e1 = first.lambda_error.at(k);
    const double e8 = last.lambda_error.at(k);
    if (e8 > th.zero_tol) eig_ratio = std::max(eig_ratio, e1 > th.zero_tol ? e8 / e1 : HUGE_VAL);
    rel = std::max(rel, last.lambda_rel_error.at(k));
  }
  out.push_back(make_check("eigenvalue_error_ratio_last_over_first", eig_ratio, th.eigen_reduction,
                           tag + "; errors below " + format_double(th.zero_tol) + " count as met"));
  out.push_back(make_check("eigenvalue_relative_error_last", rel, th.eigen_relative, tag));

  double worst_increase = 0.0;
  double final_distance = 0.0;
  for (int k : r.ks) {
    for (std::size_t i = 1; i < r.members.size(); ++i) {
      const double a = r.members[i - 1].distance_h1.at(k);
      const double b = r.members[i].distance_h1.at(k);
      worst_increase = std::max(worst_increase, b - a);
    }
    final_distance = std::max(final_distance, last.distance_h1.at(k));
  }
  out.push_back(make_check("h1_distance_max_increase", worst_increase, 1.0e-12, tag));
  out.push_back(make_check("h1_distance_last", final_distance, th.distance_final, tag));

  double gap_ratio = 0.0;
  for (int l : r.ells) {
    const double g1 = first.gap_h1.at(l);
    const double g8 = last.gap_h1.at(l);
    if (g8 > th.zero_tol) gap_ratio = std::max(gap_ratio, g1 > th.zero_tol ? g8 / g1 : HUGE_VAL);
  }
  out.push_back(make_check("h1_gap_ratio_last_over_first", gap_ratio, th.gap_reduction, tag));
  return out;
}

/// Uniform boundedness of eigenspinor norms across a family (sup over first member).
inline std::vector<Check> norm_checks(const ContinuityReport& r, const ContinuityThresholds& th = {}) {
  double h1 = 0.0;
  double holder = 0.0;
  const auto& base = r.members.front().norms;
  for (const auto& m : r.members) {
    for (std::size_t i = 0; i < m.norms.size(); ++i) {
      h1 = std::max(h1, m.norms[i].h1_norm / base[i].h1_norm);
      holder = std::max(holder, m.norms[i].holder_norm / base[i].holder_norm);
    }
  }
  return {make_check("h1_norm_growth", h1, th.norm_growth, r.family),
          make_check("holder_norm_growth", holder, th.norm_growth, r.family)};
}

struct WaveLaws {
  double group_law = 0.0;
  double unitarity = 0.0;
  double kernel_vs_evolve = 0.0;
};

/// Group law, A-unitarity and kernel/evolve consistency over random (t, s).
inline WaveLaws wave_laws(const WeightedSpectrum& s, int pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> times(-10.0, 10.0);
  std::normal_distribution<double> normal;
  const Propagator base = make_propagator(s, 0.0);
  WaveLaws w;
  for (int i = 0; i < pairs; ++i) {
    const double t = times(rng);
    const double u = times(rng);
    Vec c(base.basis.cols());
    for (Eigen::Index j = 0; j < c.size(); ++j) c(j) = cplx(normal(rng), normal(rng));
    const Vec f = base.basis * c;
    const double nf = detail::a_norm(s.mass(), f);
    const Propagator pt = make_propagator(s, t);
    const Propagator pu = make_propagator(s, u);
    const Propagator ptu = make_propagator(s, t + u);
    const Vec lhs = pt.apply(pu.apply(f));
    const Vec rhs = ptu.apply(f);
    w.group_law = std::max(w.group_law, detail::a_norm(s.mass(), lhs - rhs) / nf);
    w.unitarity = std::max(w.unitarity, std::abs(detail::a_norm(s.mass(), pt.apply(f)) - nf) / nf);
    const KernelMatrix k = kernel_assemble(s, t);
    w.kernel_vs_evolve = std::max(w.kernel_vs_evolve, detail::a_norm(s.mass(), k.apply(f) - pt.apply(f)) / nf);
  }
  return w;
}

struct WaveElementRow {
  int m = 0;  // 0 = limit spectrum
  double t = 0.0;
  int p = 0;
  int q = 0;
  cplx value;
  double deviation = 0.0;  // |value - exp(i t lambda_p) delta_pq|
};

inline std::vector<WaveElementRow> wave_elements(int m, const WeightedSpectrum& member,
                                                 const WeightedSpectrum& limit,
                                                 const std::vector<double>& times, int index_max) {
  std::vector<WaveElementRow> rows;
  for (double t : times) {
    const Propagator u = make_propagator(member, t);
    for (int p = -index_max; p <= index_max; ++p) {
      if (p == 0) continue;
      const Vec up = u.apply(limit.phi(p));
      const Vec mup = mass_apply_vec(limit.mass(), up);
      for (int q = -index_max; q <= index_max; ++q) {
        if (q == 0) continue;
        WaveElementRow r;
        r.m = m;
        r.t = t;
        r.p = p;
        r.q = q;
        r.value = limit.phi(q).dot(mup);
        const cplx expected = p == q ? std::polar(1.0, t * limit.lambda(p)) : cplx(0.0);
        r.deviation = std::abs(r.value - expected);
        rows.push_back(r);
      }
    }
  }
  return rows;
}

/// Worst ratio of last-member to first-member deviation over (t, p, q).
inline double wave_deviation_ratio(const std::vector<WaveElementRow>& first,
                                   const std::vector<WaveElementRow>& last, double zero_tol) {
  double ratio = 0.0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    const double a = first[i].deviation;
    const double b = last[i].deviation;
    if (b > zero_tol) ratio = std::max(ratio, a > zero_tol ? b / a : HUGE_VAL);
  }
  return ratio;
}

/// Ratio of the largest last-member deviation to the largest first-member deviation.
inline double wave_max_deviation_ratio(const std::vector<WaveElementRow>& first,
                                       const std::vector<WaveElementRow>& last) {
  double a = 0.0;
  double b = 0.0;
  for (const auto& r : first) a = std::max(a, r.deviation);
  for (const auto& r : last) b = std::max(b, r.deviation);
  return a > 0.0 ? b / a : (b > 0.0 ? HUGE_VAL : 0.0);
}

// ---------------------------------------------------------------------------
// Runner.

struct RunResult {
  std::vector<Check> checks;
  std::vector<std::string> warnings;
  std::vector<std::string> files;
  bool verdict = true;
};

struct RunOptions {
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

namespace detail {

inline CsvTable spectrum_table(const WeightedSpectrum& s) {
  CsvTable t({"k", "lambda", "cluster", "multiplicity", "residual"});
  for (int k : s.indices()) {
    const int l = s.cluster_of(k);
    t.row() << k << s.lambda(k) << l << s.cluster(l).multiplicity() << s.residual(k);
  }
  return t;
}

inline double relative_residual(const WeightedSpectrum& s, const Grid& grid, const WeightField& w) {
  const double scale = grid.quad_weights.maxCoeff() * std::max(1.0, s.scale()) *
                       std::max(1.0, w.max_op_norm());
  double r = 0.0;
  for (int k : s.indices()) r = std::max(r, s.residual(k));
  return r / scale;
}

class Writer {
 public:
  Writer(std::filesystem::path dir, RunResult& result) : dir_(std::move(dir)), result_(result) {}

  void csv(const std::string& name, const CsvTable& t) {
    t.write(dir_ / name);
    result_.files.push_back(name);
  }
  void eigenvectors(const std::string& name, const WeightedSpectrum& s, const Geometry& g,
                    const WeightField& w) {
    write_eigenvectors(dir_ / name, s, hash_geometry(g), hash_weight(w));
    result_.files.push_back(name);
  }
  void matrix(const std::string& name, const Mat& m, const Geometry& g, const WeightField& w) {
    write_matrix(dir_ / name, m, hash_geometry(g), hash_weight(w));
    result_.files.push_back(name);
  }

 private:
  std::filesystem::path dir_;
  RunResult& result_;
};

inline void run_spectrum(const ExperimentConfig& c, const Problem& p, Writer& out, RunResult& r) {
  const WeightField w = make_weight(*c.weight, p.grid);
  const WeightedSpectrum s = solve_for(p, w, c.solver.k_max, c.solver.solve);
  out.csv("spectrum.csv", spectrum_table(s));
  r.checks.push_back(make_check("dirac_hermitian_residual", p.dirac.hermitian_residual, 1.0e-12));
  r.checks.push_back(make_check("max_relative_residual", relative_residual(s, p.grid, w), 1.0e-8));
  r.checks.push_back(make_check("kernel_dimension_mismatch",
                                std::abs(s.kernel_dim() - p.kernel_hint), 0.0));
  if (c.dump_binary) {
    out.eigenvectors("eigenvectors.bin", s, c.geometry, w);
    out.matrix("dirac.bin", p.dirac.matrix, c.geometry, w);
  }
}

inline void run_minmax(const ExperimentConfig& c, const Problem& p, std::uint64_t seed, Writer& out,
                       RunResult& r) {
  const WeightField w = make_weight(*c.weight, p.grid);
  const int kk = c.solver.minmax_k_max;
  const WeightedSpectrum s = solve_for(p, w, std::max(c.solver.k_max, kk + 3), c.solver.solve);
  out.csv("spectrum.csv", spectrum_table(s));
  CsvTable t({"k", "direction", "target", "attaining_complement", "attaining_grassmann",
              "best_random_complement", "best_random_grassmann", "worst_violation", "pass"});
  double worst_attain = 0.0;
  double worst_violation = 0.0;
  for (int direction : {1, -1}) {
    for (int k = 1; k <= kk; ++k) {
      const MinmaxReport m = direction > 0
                                 ? verify_minmax_positive(s, k, c.solver.n_samples, seed, c.solver.tol)
                                 : verify_minmax_negative(s, k, c.solver.n_samples, seed, c.solver.tol);
      t.row() << k << direction << m.target << m.value_at_attaining << m.grassmann_at_attaining
              << m.best_over_random_subspaces << m.best_grassmann_over_random << m.worst_violation
              << m.verdict;
      const double scale = std::max(1.0, std::abs(m.target));
      worst_attain = std::max({worst_attain, std::abs(m.value_at_attaining - m.target) / scale,
                               std::abs(m.grassmann_at_attaining - m.target) / scale});
      worst_violation = std::max(worst_violation, m.worst_violation / scale);
    }
  }
  out.csv("minmax.csv", t);
  r.checks.push_back(make_check("minmax_attainment", worst_attain, c.solver.tol));
  r.checks.push_back(make_check("minmax_random_violation", worst_violation, c.solver.tol));
}

inline void run_continuity(const ExperimentConfig& c, const Problem& p, std::uint64_t seed,
                           int threads, Writer& out, RunResult& r) {
  const WeightFamily family = make_family(*c.family, p.grid, seed);
  ContinuityOptions o;
  o.k_max = c.solver.minmax_k_max;
  o.ell_max = c.solver.ell_max;
  o.dictionary_size = c.solver.dictionary_size;
  o.p = c.solver.p;
  o.alpha = c.solver.alpha;
  o.threads = threads;
  o.solve = c.solver.solve;
  const ContinuityReport rep = run_continuity_experiment(family, c.family->members, o);

  CsvTable t({"m", "quantity", "index", "value"});
  for (int k : rep.ks) t.row() << 0 << "lambda" << k << rep.limit_lambda.at(k);
  for (const auto& m : rep.members) {
    auto emit = [&](const char* name, const std::map<int, double>& values) {
      for (const auto& [k, v] : values) t.row() << m.m << name << k << v;
    };
    emit("lambda", m.lambda);
    emit("lambda_error", m.lambda_error);
    emit("lambda_rel_error", m.lambda_rel_error);
    emit("gap_h1", m.gap_h1);
    emit("gap_l2", m.gap_l2);
    emit("distance_h1", m.distance_h1);
    emit("distance_holder", m.distance_holder);
    emit("distance_l2", m.distance_l2);
    emit("step_one_b", m.step_one_b);
    emit("step_one_excess", m.step_one_excess);
    emit("limsup_excess", m.limsup_excess);
    t.row() << m.m << "weak_residual" << 0 << m.weak_residual;
    t.row() << m.m << "weak_residual_inverse" << 0 << m.weak_residual_inverse;
    for (const auto& d : m.diagnostics) r.warnings.push_back("m=" + std::to_string(m.m) + ": " + d);
  }
  out.csv("continuity.csv", t);

  CsvTable n({"m", "k", "lambda", "h1_norm", "holder_norm", "bound_h1", "bound_holder", "t1", "t2"});
  auto emit_norms = [&](int m, const std::vector<NormDiagnostics>& rows) {
    for (const auto& d : rows) {
      n.row() << m << d.k << d.lambda << d.h1_norm << d.holder_norm << d.bound_h1 << d.bound_holder
              << d.exponents.t1 << d.exponents.t2;
    }
  };
  emit_norms(0, rep.limit_norms);
  for (const auto& m : rep.members) emit_norms(m.m, m.norms);
  out.csv("norms.csv", n);

  for (auto& ch : continuity_checks(rep)) r.checks.push_back(std::move(ch));
  for (auto& ch : norm_checks(rep)) r.checks.push_back(std::move(ch));
}

inline void run_compare(const ExperimentConfig& c, const Problem& p, std::uint64_t seed, int threads,
                        Writer& out, RunResult& r) {
  if (p.kernel_hint != 0) throw PreconditionError("comparison requires ker D = 0 on " + c.geometry.describe());
  const CompareSpec& spec = *c.compare;
  std::vector<std::pair<WeightField, WeightField>> pairs;
  if (spec.upper) {
    pairs.emplace_back(make_weight(*spec.upper, p.grid), make_weight(*spec.lower, p.grid));
  } else {
    for (int i = 0; i < spec.pairs; ++i) pairs.push_back(random_loewner_pair(p.grid, seed, i));
  }
  const double tol = 1.0e-8;
  const auto reports = parallel_map<ComparisonReport>(
      static_cast<int>(pairs.size()), threads, [&](int i) {
        const auto& [w1, w2] = pairs[static_cast<std::size_t>(i)];
        return compare_spectra(solve_for(p, w1, c.solver.k_max, c.solver.solve),
                               solve_for(p, w2, c.solver.k_max, c.solver.solve), w1, w2, tol);
      });
  CsvTable t({"pair", "k", "lambda_upper", "lambda_lower", "margin", "pass"});
  double worst = 0.0;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    for (const auto& row : reports[i].rows) {
      t.row() << static_cast<int>(i) << row.k << row.lambda_1 << row.lambda_2 << row.margin << row.ok;
      worst = std::max(worst, -row.margin);
    }
  }
  out.csv("compare.csv", t);
  r.checks.push_back(make_check("comparison_worst_violation", worst, tol,
                                ComparisonReport::kDirectionNote));

  // lambda_k(c A) = lambda_k(A) / c for constants c.
  const WeightField base = WeightField::identity(p.grid);
  const WeightedSpectrum s0 = solve_for(p, base, c.solver.k_max, c.solver.solve);
  CsvTable sc({"scale", "k", "lambda", "expected", "error"});
  double worst_scaling = 0.0;
  for (double f : spec.scalings) {
    const WeightedSpectrum s = solve_for(p, base.scaled(f), c.solver.k_max, c.solver.solve);
    for (int k : s.indices()) {
      const double expected = s0.lambda(k) / f;
      const double err = std::abs(s.lambda(k) - expected) / std::max(1.0, std::abs(expected));
      worst_scaling = std::max(worst_scaling, err);
      sc.row() << f << k << s.lambda(k) << expected << err;
    }
  }
  out.csv("scaling.csv", sc);
  r.checks.push_back(make_check("constant_scaling_law", worst_scaling, 1.0e-10));
}

inline void run_wave(const ExperimentConfig& c, const Problem& p, std::uint64_t seed, int threads,
                     Writer& out, RunResult& r) {
  const int index_max = c.solver.wave_index_max;
  std::optional<WeightFamily> family;
  WeightField limit_w = c.family ? (family.emplace(make_family(*c.family, p.grid, seed)),
                                    family->declared_limit())
                                 : make_weight(*c.weight, p.grid);
  const WeightedSpectrum limit = solve_for(p, limit_w, kAllReliable, c.solver.solve);
  if (limit.k_max() < index_max) throw RangeError("wave_index_max exceeds the reliable window");

  const WaveLaws laws = wave_laws(limit, c.solver.wave_pairs, mix_seed(seed, 7));
  r.checks.push_back(make_check("group_law", laws.group_law, 1.0e-7));
  r.checks.push_back(make_check("a_unitarity", laws.unitarity, 1.0e-7));
  r.checks.push_back(make_check("kernel_matches_evolve", laws.kernel_vs_evolve, 1.0e-8));

  CsvTable t({"m", "t", "quantity", "p", "q", "re", "im"});
  auto emit = [&](const std::vector<WaveElementRow>& rows) {
    for (const auto& e : rows) {
      t.row() << e.m << e.t << "element" << e.p << e.q << e.value.real() << e.value.imag();
      t.row() << e.m << e.t << "deviation" << e.p << e.q << e.deviation << 0.0;
    }
  };
  const auto limit_rows = wave_elements(0, limit, limit, c.solver.times, index_max);
  emit(limit_rows);
  double limit_dev = 0.0;
  for (const auto& e : limit_rows) limit_dev = std::max(limit_dev, e.deviation);
  r.checks.push_back(make_check("limit_matrix_elements", limit_dev, 1.0e-10));

  if (family) {
    const auto& members = c.family->members;
    const auto rows = parallel_map<std::vector<WaveElementRow>>(
        static_cast<int>(members.size()), threads, [&](int i) {
          const int m = members[static_cast<std::size_t>(i)];
          const WeightedSpectrum s = solve_for(p, family->member(m), kAllReliable, c.solver.solve);
          return wave_elements(m, s, limit, c.solver.times, index_max);
        });
    for (const auto& block : rows) emit(block);
    r.checks.push_back(make_check("member_deviation_ratio_last_over_first",
                                  wave_deviation_ratio(rows.front(), rows.back(), 1.0e-10), 0.5,
                                  family->describe()));
    r.checks.push_back(make_check("member_max_deviation_ratio_last_over_first",
                                  wave_max_deviation_ratio(rows.front(), rows.back()), 0.5,
                                  family->describe()));
  }
  out.csv("wave.csv", t);
}

}  // namespace detail

/// Runs one experiment, writes its CSVs, checks and manifest into out_dir.
inline RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t seed = options.seed.value_or(config.seed);
  std::filesystem::path dir = options.out_dir;
  if (dir.empty()) dir = config.output_dir.empty() ? std::filesystem::path("out") : std::filesystem::path(config.output_dir);
  std::filesystem::create_directories(dir);

  RunResult r;
  detail::Writer out(dir, r);
  const Problem p = make_problem(config.geometry);
  switch (config.experiment) {
    case ExperimentKind::Spectrum: detail::run_spectrum(config, p, out, r); break;
    case ExperimentKind::Minmax: detail::run_minmax(config, p, seed, out, r); break;
    case ExperimentKind::Continuity: detail::run_continuity(config, p, seed, options.threads, out, r); break;
    case ExperimentKind::Compare: detail::run_compare(config, p, seed, options.threads, out, r); break;
    case ExperimentKind::Wave: detail::run_wave(config, p, seed, options.threads, out, r); break;
  }
  out.csv("checks.csv", checks_table(r.checks));
  r.verdict = all_pass(r.checks);

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest;
  manifest["experiment"] = std::string(to_string(config.experiment));
  manifest["config_hash"] = hex64(hash_text(config.source));
  manifest["seed"] = seed;
  manifest["threads"] = options.threads;
  manifest["geometry"] = config.geometry.describe();
  manifest["geometry_hash"] = hex64(hash_geometry(config.geometry));
  manifest["versions"] = {{"wdirac", kVersion},
                          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                        std::to_string(EIGEN_MINOR_VERSION)},
                          {"compiler", __VERSION__}};
  manifest["wall_time_seconds"] = wall;
  manifest["verdict"] = r.verdict ? "pass" : "fail";
  manifest["warnings"] = r.warnings;
  json files = json::array();
  for (const auto& name : r.files) {
    std::ifstream f(dir / name, std::ios::binary);
    const std::string body((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    files.push_back({{"name", name}, {"bytes", body.size()}, {"fnv1a", hex64(hash_text(body))}});
  }
  manifest["files"] = files;
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
  return r;
}

}  // namespace wdirac
