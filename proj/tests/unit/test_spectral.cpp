#include "helpers.hpp"

using namespace wdirac;
using namespace wdirac::testing;

TEST(IndexEigenvalues, CleanKernelGap) {
  const std::vector<double> raw{-1.5, -1e-14, 0.5, 2.5};
  const IndexedEigenvalues idx = index_eigenvalues(raw, 1e-8, 1);
  ASSERT_EQ(idx.kernel.size(), 1u);
  EXPECT_EQ(idx.kernel[0], 1);
  ASSERT_EQ(idx.signed_.size(), 3u);
  EXPECT_EQ(idx.signed_[0], std::make_pair(-1, 0));
  EXPECT_EQ(idx.signed_[1], std::make_pair(1, 2));
  EXPECT_EQ(idx.signed_[2], std::make_pair(2, 3));
}

TEST(IndexEigenvalues, AntiperiodicPattern) {
  const std::vector<double> raw{1.5, -0.5, 0.5, -1.5};
  const IndexedEigenvalues idx = index_eigenvalues(raw, 1e-8, 0);
  EXPECT_TRUE(idx.kernel.empty());
  std::map<int, double> by_k;
  for (auto [k, pos] : idx.signed_) by_k[k] = raw[static_cast<std::size_t>(pos)];
  EXPECT_EQ(by_k.at(-2), -1.5);
  EXPECT_EQ(by_k.at(-1), -0.5);
  EXPECT_EQ(by_k.at(1), 0.5);
  EXPECT_EQ(by_k.at(2), 1.5);
}

TEST(IndexEigenvalues, TorusNearZeroPairAndDiagnostics) {
  const std::vector<double> raw{-1.0, 1e-13, -1e-13, 1.0, 2.0};
  EXPECT_EQ(index_eigenvalues(raw, 1e-8, 2).kernel.size(), 2u);
  EXPECT_THROW(index_eigenvalues(raw, 1e-8, 1), DiagnosticError);
  const std::vector<double> ambiguous{-1.0, 5e-8, 1.0};  // threshold 1e-8 * 1
  EXPECT_THROW(index_eigenvalues(ambiguous, 1e-8, std::nullopt), DiagnosticError);
}

TEST(ClusterDistinct, MergesBelowTolerance) {
  const std::map<int, double> ev{{-1, -1.0}, {1, 1.0}, {2, 1.0 + 1e-9}, {3, 2.0}};
  const auto cl = cluster_distinct(ev, 1e-6, 1e-9);
  ASSERT_EQ(cl.size(), 3u);
  EXPECT_EQ(cl[0].label, -1);
  EXPECT_EQ(cl[1].label, 1);
  EXPECT_EQ(cl[1].multiplicity(), 2);
  EXPECT_NEAR(cl[1].mean, 1.0 + 5e-10, 1e-15);
  EXPECT_EQ(cl[2].label, 2);
}

TEST(SolveWeighted, PeriodicCircleFourierOracle) {
  const WeightedSpectrum s = solve_identity(Geometry::circle(kTwoPi, 64, 0.0), 3);
  EXPECT_EQ(s.kernel_dim(), 1);
  for (int k = 1; k <= 3; ++k) {
    EXPECT_NEAR(s.lambda(k), k, 1e-10);
    EXPECT_NEAR(s.lambda(-k), -k, 1e-10);
  }
  for (const Cluster& c : s.clusters()) EXPECT_EQ(c.multiplicity(), 1);
}

TEST(SolveWeighted, IntegratingFactorOracle) {
  // rho = e^{sin theta}: int rho = 2 pi I0(1), so lambda_k = k / I0(1).
  const Geometry geo = Geometry::circle(kTwoPi, 256, 0.0);
  const Grid g = build_grid(geo);
  const WeightField w = WeightField::scalar(g, [](const auto& x) { return std::exp(std::sin(x[0])); });
  const WeightedSpectrum s = solve(geo, w, 5);
  const double c = std::cyl_bessel_i(0.0, 1.0);
  for (int k = 1; k <= 5; ++k) {
    EXPECT_NEAR(s.lambda(k), k / c, 1e-8);
    EXPECT_NEAR(s.lambda(-k), -k / c, 1e-8);
  }
}

TEST(SolveWeighted, AntiperiodicScaledWeight) {
  const Geometry geo = Geometry::circle(kTwoPi, 32, 0.5);
  const WeightedSpectrum s = solve(geo, WeightField::identity(build_grid(geo)).scaled(2.0), 2);
  EXPECT_NEAR(s.lambda(1), 0.25, 1e-12);
  EXPECT_EQ(s.kernel_dim(), 0);
}

TEST(SolveWeighted, TwistedTorusClusters) {
  const WeightedSpectrum s = solve_identity(Geometry::torus(kTwoPi, kTwoPi, 12, 0.5, 0.0), 6);
  const Cluster& c1 = s.cluster(1);
  EXPECT_NEAR(c1.mean, 0.5, 1e-10);
  EXPECT_EQ(c1.multiplicity(), 2);
  EXPECT_TRUE(c1.complete);
  EXPECT_EQ(s.kernel_dim(), 0);
}

TEST(SolveWeighted, InvariantsOnRandomWeights) {
  for (const Geometry& geo : {Geometry::circle(kTwoPi, 48, 0.0), Geometry::interval(2.0, 32, -1),
                              Geometry::torus(kTwoPi, kTwoPi, 12, 0.0, 0.0)}) {
    const Grid g = build_grid(geo);
    const WeightField w = random_spd(g, 31, 0.6);
    const WeightedSpectrum s = solve(geo, w, 5);
    EXPECT_EQ(s.kernel_dim(), geo.analytic_kernel_dimension());
    EXPECT_LT(s.lambda(-1), 0.0);
    EXPECT_GT(s.lambda(1), 0.0);
    for (int k = 1; k < 5; ++k) {
      EXPECT_LE(s.lambda(k), s.lambda(k + 1));
      EXPECT_GE(s.lambda(-k), s.lambda(-k - 1));
    }
    const Mat phi = s.retained_basis();
    const Mat gram = phi.adjoint() * mass_apply(s.mass(), phi);
    EXPECT_LT((gram - Mat::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff(), 1e-8) << geo.describe();
    for (int k : s.indices()) EXPECT_LE(s.residual(k), 1e-7) << k;
  }
}

TEST(SolveWeighted, WhiteningMatchesGeneralizedSolver) {
  const Geometry geo = Geometry::torus(kTwoPi, kTwoPi, 12, 0.5, 0.0);
  const Grid g = build_grid(geo);
  const OperatorMatrix d = assemble_dirac(geo, g);
  const OperatorMatrix m = assemble_mass(random_spd(g, 77, 0.7), g, d.basis_map);
  const auto [values, vectors] = whitened_eigensystem(d, m);
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(stiffness(d), m.matrix, Eigen::EigenvaluesOnly);
  ASSERT_EQ(values.size(), ges.eigenvalues().size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    EXPECT_NEAR(values(i), ges.eigenvalues()(i), 1e-9 * std::max(1.0, std::abs(values(i))));
  }
}

TEST(SolveWeighted, TruncationGuardReportsReliableWindow) {
  const Geometry geo = Geometry::circle(kTwoPi, 32, 0.5);
  const Problem p = make_problem(geo);
  try {
    solve_for(p, WeightField::identity(p.grid), 15);
    FAIL() << "expected a truncation error";
  } catch (const TruncationError& e) {
    EXPECT_EQ(e.reliable_k_max(), 9);  // |k + 1/2| < 0.6 * 16
  }
  EXPECT_EQ(solve_for(p, WeightField::identity(p.grid), kAllReliable).k_max(), 9);
  EXPECT_THROW(solve_for(p, WeightField::identity(p.grid), 40), RangeError);
}

TEST(SolveWeighted, ConstantScalingLaw) {
  const Geometry geo = Geometry::interval(kPi, 32);
  const WeightedSpectrum base = solve_identity(geo, 5);
  for (double c : {0.5, 1.0, 2.0, 5.0}) {
    const WeightedSpectrum s = solve(geo, WeightField::identity(build_grid(geo)).scaled(c), 5);
    for (int k : s.indices()) {
      EXPECT_NEAR(s.lambda(k) * c, base.lambda(k), 1e-10);
      if (c >= 1.0 && k > 0) { EXPECT_LE(s.lambda(k), base.lambda(k) + 1e-12); }
    }
  }
}

TEST(OrthonormalizeA, IdempotentDependentAndRandom) {
  std::mt19937_64 rng(8);
  const Geometry geo = Geometry::interval(1.0, 16);
  const Grid g = build_grid(geo);
  const OperatorMatrix m = assemble_mass(random_spd(g, 3), g, assemble_dirac(geo, g).basis_map);
  Mat batch(g.num_dofs(), 3);
  for (int j = 0; j < 3; ++j) batch.col(j) = random_vec(rng, g.num_dofs());
  const Mat q = orthonormalize_a(batch, m);
  EXPECT_LT((q.adjoint() * m.matrix * q - Mat::Identity(3, 3)).norm(), 1e-10);
  EXPECT_LT((orthonormalize_a(q, m) - q).norm(), 1e-12);
  Mat twin(g.num_dofs(), 2);
  twin << batch.col(0), batch.col(0);
  EXPECT_THROW(orthonormalize_a(twin, m), NumericError);
}

TEST(Projector, IdentityAnnihilationTraceAndCompleteness) {
  const Geometry geo = Geometry::torus(kTwoPi, kTwoPi, 12, 0.0, 0.0);
  const Grid g = build_grid(geo);
  const WeightField w = random_spd(g, 12, 0.4);
  const WeightedSpectrum s = solve(geo, w, 8);
  Mat sum = kernel_projector(s).matrix();
  const Mat phi = s.retained_basis();
  for (const Cluster& c : s.clusters()) {
    if (!c.complete) {
      EXPECT_THROW(projector(s, c.label), RangeError);
      continue;
    }
    const SpectralProjector p = projector(s, c.label);
    EXPECT_EQ(p.rank(), c.multiplicity());
    EXPECT_NEAR(p.matrix().trace().real(), c.multiplicity(), 1e-8);
    const Mat pm = p.matrix();
    EXPECT_LT((pm * pm - pm).norm(), 1e-8);
    for (int k : s.indices()) {
      const Vec v = s.phi(k);
      const Vec pv = p.apply(v);
      if (s.cluster_of(k) == c.label) {
        EXPECT_LT((pv - v).norm(), 1e-8 * v.norm());
      } else {
        EXPECT_LT(pv.norm(), 1e-8 * v.norm());
      }
    }
    EXPECT_LT(p.apply(Vec(s.kernel_basis().col(0))).norm(), 1e-8);
    sum += pm;
  }
  // Complete clusters plus kernel act as the identity on their span; add the
  // incomplete outer clusters to cover the whole retained span.
  for (const Cluster& c : s.clusters()) {
    if (!c.complete) sum += projector_for_indices(s, c.indices, c.label).matrix();
  }
  EXPECT_LT((sum * phi - phi).norm(), 1e-8 * phi.norm());
  EXPECT_THROW(s.cluster(99), RangeError);
}

TEST(Projector, ASelfAdjoint) {
  std::mt19937_64 rng(21);
  const Geometry geo = Geometry::circle(kTwoPi, 32, 0.5);
  const Grid g = build_grid(geo);
  const WeightField w = random_spd(g, 2);
  const WeightedSpectrum s = solve(geo, w, 4);
  const SpectralProjector p = projector(s, 2);
  const SpinorField f = random_field(rng, g);
  const SpinorField h = random_field(rng, g);
  EXPECT_LT(std::abs(inner_a(p.apply(f), h, w, g) - inner_a(f, p.apply(h), w, g)), 1e-8);
}

TEST(DualRayleigh, EigenvectorSubstitution) {
  for (const Geometry& geo : {Geometry::circle(kTwoPi, 32, 0.0), Geometry::interval(1.3, 32, 1),
                              Geometry::torus(kTwoPi, kTwoPi, 12, 0.5, 0.5)}) {
    const Grid g = build_grid(geo);
    const WeightField w = random_spd(g, 40);
    const WeightedSpectrum s = solve(geo, w, 4);
    const OperatorMatrix d = assemble_dirac(geo, g);
    for (int k : s.indices()) {
      EXPECT_NEAR(rayleigh_dual(s.field(k), d, w, g) * s.lambda(k), 1.0, 1e-8) << geo.describe() << " k=" << k;
    }
  }
}
