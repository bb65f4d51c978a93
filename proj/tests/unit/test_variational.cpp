#include "helpers.hpp"

using namespace wdirac;
using namespace wdirac::testing;

namespace {

struct Fixture {
  Geometry geo;
  Grid grid;
  WeightField w;
  WeightedSpectrum s;
};

Fixture identity_setup(const Geometry& geo, int k_max) {
  const Grid g = build_grid(geo);
  const WeightField w = WeightField::identity(g);
  return {geo, g, w, solve(geo, w, k_max)};
}

}  // namespace

TEST(RayleighDual, TwoModeClosedForm) {
  const Fixture st = identity_setup(Geometry::circle(kTwoPi, 32, 0.5), 4);
  ASSERT_NEAR(st.s.lambda(1), 0.5, 1e-12);
  ASSERT_NEAR(st.s.lambda(2), 1.5, 1e-12);
  const SpinorField psi(st.s.phi(1) + st.s.phi(2), 1);
  const OperatorMatrix d = assemble_dirac(st.geo, st.grid);
  EXPECT_NEAR(rayleigh_dual(psi, d, st.w, st.grid), 0.8, 1e-10);
}

TEST(RayleighDual, KernelSpinorIsRejected) {
  const Geometry geo = Geometry::torus(kTwoPi, kTwoPi, 8, 0.0, 0.0);
  const Grid g = build_grid(geo);
  const SpinorField c = SpinorField::sample(g, [](const auto&) {
    Vec v(2);
    v << cplx(1.0, 0.0), cplx(0.0, 2.0);
    return v;
  });
  EXPECT_THROW(rayleigh_dual(c, assemble_dirac(geo, g), WeightField::identity(g), g), NearKernelError);
}

TEST(Minmax, AntiperiodicCircle) {
  const Fixture st = identity_setup(Geometry::circle(kTwoPi, 32, 0.5), 6);
  const MinmaxReport pos = verify_minmax_positive(st.s, 1, 64, 11);
  EXPECT_TRUE(pos.verdict);
  EXPECT_NEAR(pos.value_at_attaining, 2.0, 1e-8);
  EXPECT_NEAR(pos.grassmann_at_attaining, 2.0, 1e-8);
  EXPECT_GE(pos.best_over_random_subspaces, 2.0 - 1e-7);
  const MinmaxReport neg = verify_minmax_negative(st.s, 1, 64, 11);
  EXPECT_TRUE(neg.verdict);
  EXPECT_NEAR(neg.value_at_attaining, -2.0, 1e-8);
  EXPECT_LE(neg.best_over_random_subspaces, -2.0 + 1e-7);
}

TEST(Minmax, PeriodicCircleExcludesKernel) {
  const Fixture st = identity_setup(Geometry::circle(kTwoPi, 32, 0.0), 6);
  ASSERT_EQ(st.s.kernel_dim(), 1);
  const MinmaxReport r = verify_minmax_positive(st.s, 1, 16, 3);
  EXPECT_TRUE(r.verdict);
  EXPECT_NEAR(r.value_at_attaining, 1.0, 1e-8);
}

TEST(Minmax, ZeroSamplesUsesAttainmentOnly) {
  const Fixture st = identity_setup(Geometry::circle(kTwoPi, 32, 0.5), 6);
  const MinmaxReport r = verify_minmax_positive(st.s, 1, 0, 1);
  EXPECT_EQ(r.n_samples, 0);
  EXPECT_TRUE(r.verdict);
  EXPECT_NEAR(r.value_at_attaining, 2.0, 1e-8);
}

TEST(Minmax, SymmetricSpectrumMirrors) {
  const Fixture st = identity_setup(Geometry::interval(1.4, 32, 1), 7);
  for (int k = 1; k <= 3; ++k) {
    const MinmaxReport p = verify_minmax_positive(st.s, k, 8, 5);
    const MinmaxReport n = verify_minmax_negative(st.s, k, 8, 5);
    EXPECT_NEAR(p.value_at_attaining, -n.value_at_attaining, 1e-8);
  }
}

TEST(Minmax, AttainmentAndSamplingOnWeightedConfigurations) {
  for (const Geometry& geo : {Geometry::circle(kTwoPi, 48, 0.0), Geometry::circle(kTwoPi, 48, 0.5),
                              Geometry::interval(kPi, 32, 1), Geometry::interval(kPi, 32, -1)}) {
    const Grid g = build_grid(geo);
    const WeightedSpectrum s = solve(geo, random_spd(g, 9), 9);
    for (int k = 1; k <= 5; ++k) {
      const MinmaxReport p = verify_minmax_positive(s, k, k <= 4 ? 64 : 0, 100 + k);
      EXPECT_TRUE(p.verdict) << geo.describe() << " k=" << k;
      EXPECT_NEAR(p.value_at_attaining, 1.0 / s.lambda(k), 1e-8);
      const MinmaxReport n = verify_minmax_negative(s, k, k <= 4 ? 64 : 0, 200 + k);
      EXPECT_TRUE(n.verdict) << geo.describe() << " k=-" << k;
      EXPECT_NEAR(n.value_at_attaining, 1.0 / s.lambda(-k), 1e-8);
    }
  }
}

TEST(Minmax, InsufficientSpectrumIsRangeError) {
  const Fixture st = identity_setup(Geometry::circle(kTwoPi, 32, 0.5), 3);
  EXPECT_THROW(verify_minmax_positive(st.s, 1, 4, 1), RangeError);
  EXPECT_THROW(verify_minmax_positive(st.s, 0, 4, 1), RangeError);
}

TEST(Compare, ScaledIdentityOnAntiperiodicCircle) {
  const Geometry geo = Geometry::circle(kTwoPi, 32, 0.5);
  const Grid g = build_grid(geo);
  const WeightField w1 = WeightField::identity(g).scaled(2.0);
  const WeightField w2 = WeightField::identity(g);
  const ComparisonReport r = compare_spectra(solve(geo, w1, 5), solve(geo, w2, 5), w1, w2, 1e-10);
  EXPECT_TRUE(r.verdict);
  for (const auto& row : r.rows) {
    if (row.k == 1) {
      EXPECT_NEAR(row.lambda_1, 0.25, 1e-12);
      EXPECT_NEAR(row.lambda_2, 0.5, 1e-12);
    }
  }
}

TEST(Compare, ChiralIntervalScalarWeights) {
  const Geometry geo = Geometry::interval(kPi, 64, 1);
  const Grid g = build_grid(geo);
  const WeightField w1 = WeightField::scalar(g, [](const auto& x) { return 1.0 + std::pow(std::sin(x[0]), 2); });
  const WeightField w2 = WeightField::identity(g);
  const ComparisonReport r = compare_spectra(solve(geo, w1, 6), solve(geo, w2, 6), w1, w2, 1e-10);
  EXPECT_TRUE(r.verdict);
  EXPECT_GE(r.min_margin, 0.0);
}

TEST(Compare, RankOneOrderOnTwistedTorus) {
  const Geometry geo = Geometry::torus(kTwoPi, kTwoPi, 12, 0.5, 0.5);
  const Grid g = build_grid(geo);
  const WeightField w2 = random_spd(g, 17, 0.4);
  Vec v(2);
  v << cplx(0.6, 0.2), cplx(-0.3, 0.5);
  const WeightField w1 = w2.map([&](const Mat& a) { return Mat(a + v * v.adjoint()); });
  const ComparisonReport r = compare_spectra(solve(geo, w1, 6), solve(geo, w2, 6), w1, w2, 1e-9);
  EXPECT_TRUE(r.verdict);
  for (const auto& row : r.rows) {
    if (row.k > 0) { EXPECT_GE(row.margin, -1e-9); }
  }
}

TEST(Compare, Preconditions) {
  const Geometry closed = Geometry::circle(kTwoPi, 32, 0.0);
  const Grid gc = build_grid(closed);
  const WeightField id = WeightField::identity(gc);
  EXPECT_THROW(compare_spectra(solve(closed, id, 3), solve(closed, id, 3), id, id, 1e-10), PreconditionError);

  const Geometry geo = Geometry::circle(kTwoPi, 32, 0.5);
  const Grid g = build_grid(geo);
  const WeightField a = WeightField::scalar(g, [](const auto& x) { return 1.5 + std::sin(x[0]); });
  const WeightField b = WeightField::identity(g);
  EXPECT_THROW(compare_spectra(solve(geo, a, 3), solve(geo, b, 3), a, b, 1e-10), PreconditionError);
  EXPECT_THROW(compare_spectra(solve(geo, b, 3), solve(geo, b.scaled(2.0), 3), b, b.scaled(2.0), 1e-10),
               PreconditionError);
}
