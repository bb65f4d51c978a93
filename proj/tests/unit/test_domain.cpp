#include "helpers.hpp"

using namespace wdirac;
using namespace wdirac::testing;

TEST(BuildGrid, CircleUniformQuadrature) {
  const Grid g = build_grid(Geometry::circle(kTwoPi, 16, 0.0));
  ASSERT_EQ(g.num_points(), 16);
  EXPECT_EQ(g.fiber_dim, 1);
  for (int i = 0; i < 16; ++i) EXPECT_NEAR(g.quad_weights(i), kTwoPi / 16, 1e-15);
  EXPECT_NEAR(g.volume(), kTwoPi, 1e-12 * kTwoPi);
}

TEST(BuildGrid, TorusProductRule) {
  const Grid g = build_grid(Geometry::torus(kTwoPi, kTwoPi, 8, 0.0, 0.0));
  ASSERT_EQ(g.num_points(), 64);
  EXPECT_EQ(g.fiber_dim, 2);
  const double w = (kTwoPi / 8) * (kTwoPi / 8);
  for (int i = 0; i < 64; ++i) EXPECT_NEAR(g.quad_weights(i), w, 1e-14);
  EXPECT_NEAR(g.volume(), 4 * kPi * kPi, 1e-12 * 4 * kPi * kPi);
}

TEST(BuildGrid, RejectsOddResolution) {
  EXPECT_THROW(build_grid(Geometry::interval(kPi, 17)), ConfigError);
  EXPECT_THROW(build_grid(Geometry::circle(kTwoPi, 6, 0.0)), ConfigError);
  EXPECT_THROW(build_grid(Geometry::circle(-1.0, 16, 0.0)), ConfigError);
  EXPECT_THROW(build_grid(Geometry::circle(kTwoPi, 16, 0.25)), ConfigError);
}

TEST(BuildGrid, IntervalVolumeAndDistance) {
  const Grid g = build_grid(Geometry::interval(kPi, 32));
  EXPECT_EQ(g.fiber_dim, 2);
  EXPECT_NEAR(g.volume(), kPi, 1e-12 * kPi);
  EXPECT_NEAR(g.distance(0, 31), kPi * 31 / 32, 1e-14);
}

TEST(BuildGrid, DistanceIsAMetricWithPeriodicImages) {
  for (const Geometry& geo : {Geometry::circle(kTwoPi, 16, 0.5), Geometry::interval(2.0, 16),
                              Geometry::torus(kTwoPi, 3.0, 8, 0.5, 0.0)}) {
    const Grid g = build_grid(geo);
    for (int i = 0; i < g.num_points(); i += 3) {
      EXPECT_EQ(g.distance(i, i), 0.0);
      for (int j = 0; j < g.num_points(); j += 5) {
        EXPECT_NEAR(g.distance(i, j), g.distance(j, i), 1e-15);
        if (i != j) { EXPECT_GT(g.distance(i, j), 0.0); }
      }
    }
  }
  const Grid c = build_grid(Geometry::circle(kTwoPi, 16, 0.0));
  EXPECT_NEAR(c.distance(0, 15), kTwoPi / 16, 1e-14);  // wraps around
}

TEST(InnerL2, ConstantUnitField) {
  const Grid g = build_grid(Geometry::circle(kTwoPi, 16, 0.0));
  const SpinorField f = SpinorField::sample(g, [](const auto&) { return Vec::Ones(1); });
  EXPECT_NEAR(std::abs(inner_l2(f, f, g) - kTwoPi), 0.0, 1e-12);
}

TEST(InnerL2, PointwiseOrthogonalFields) {
  const Grid g = build_grid(Geometry::torus(kTwoPi, kTwoPi, 8, 0.0, 0.0));
  const SpinorField f = SpinorField::sample(g, [](const auto& x) {
    Vec v(2);
    v << std::sin(x[0]) + 2.0, 0.0;
    return v;
  });
  const SpinorField h = SpinorField::sample(g, [](const auto& x) {
    Vec v(2);
    v << 0.0, std::cos(x[1]);
    return v;
  });
  EXPECT_EQ(std::abs(inner_l2(f, h, g)), 0.0);
}

TEST(InnerL2, DistinctFourierModesAreOrthogonal) {
  const Grid g = build_grid(Geometry::circle(kTwoPi, 16, 0.0));
  auto mode = [&](int k) {
    return SpinorField::sample(g, [k](const auto& x) { return Vec::Constant(1, std::polar(1.0, k * x[0])); });
  };
  EXPECT_LT(std::abs(inner_l2(mode(1), mode(2), g)), 1e-12);
}

TEST(InnerL2, ConjugateLinearInFirstSlot) {
  std::mt19937_64 rng(3);
  const Grid g = build_grid(Geometry::interval(1.0, 16));
  const SpinorField f = random_field(rng, g);
  const SpinorField h = random_field(rng, g);
  const cplx i(0.0, 1.0);
  const SpinorField fi(i * f.values(), 2);
  const SpinorField hi(i * h.values(), 2);
  EXPECT_LT(std::abs(inner_l2(fi, h, g) + i * inner_l2(f, h, g)), 1e-12);
  EXPECT_LT(std::abs(inner_l2(f, hi, g) - i * inner_l2(f, h, g)), 1e-12);
}

TEST(InnerL2, ShapeMismatchThrows) {
  const Grid a = build_grid(Geometry::circle(kTwoPi, 16, 0.0));
  const Grid b = build_grid(Geometry::circle(kTwoPi, 32, 0.0));
  EXPECT_THROW(inner_l2(SpinorField::zeros(a), SpinorField::zeros(b), a), ShapeError);
}

TEST(QuadratureExactness, LowTrigonometricMonomials) {
  const int n = 16;
  const Grid g = build_grid(Geometry::circle(kTwoPi, n, 0.0));
  const SpinorField one = SpinorField::sample(g, [](const auto&) { return Vec::Ones(1); });
  for (int k = -(n / 2 - 1); k <= n / 2 - 1; ++k) {
    const SpinorField m = SpinorField::sample(g, [k](const auto& x) { return Vec::Constant(1, std::polar(1.0, k * x[0])); });
    const cplx expected = k == 0 ? cplx(kTwoPi) : cplx(0.0);
    EXPECT_LT(std::abs(inner_l2(one, m, g) - expected), 1e-12 * kTwoPi) << k;
  }
}

TEST(InnerA, IdentityMatchesL2AndScalingAndBlocks) {
  std::mt19937_64 rng(5);
  const Grid c = build_grid(Geometry::circle(kTwoPi, 16, 0.5));
  const SpinorField f = random_field(rng, c);
  const SpinorField h = random_field(rng, c);
  EXPECT_LT(std::abs(inner_a(f, h, WeightField::identity(c), c) - inner_l2(f, h, c)), 1e-12);

  const SpinorField u(f.values() / std::sqrt(inner_l2(f, f, c).real()), 1);
  EXPECT_NEAR(inner_a(u, u, WeightField::identity(c).scaled(2.0), c).real(), 2.0, 1e-12);

  const Grid t = build_grid(Geometry::torus(kTwoPi, kTwoPi, 8, 0.0, 0.0));
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  const SpinorField e = SpinorField::sample(t, [](const auto&) {
    Vec v(2);
    v << 1.0 / (2.0 * kPi), 0.0;
    return v;
  });
  EXPECT_NEAR(inner_a(e, e, WeightField::constant(t, d), t).real(), 1.0, 1e-12);
}

TEST(InnerA, HermitianSymmetryOnRandomFields) {
  std::mt19937_64 rng(11);
  const Grid g = build_grid(Geometry::torus(kTwoPi, kTwoPi, 12, 0.5, 0.0));
  const WeightField w = random_spd(g, 17);
  for (int trial = 0; trial < 5; ++trial) {
    const SpinorField f = random_field(rng, g);
    const SpinorField h = random_field(rng, g);
    EXPECT_LT(std::abs(inner_a(f, h, w, g) - std::conj(inner_a(h, f, w, g))), 1e-11);
  }
}

TEST(NormH1, KernelEigenvectorAndFourierMode) {
  const Geometry geo = Geometry::circle(kTwoPi, 32, 0.0);
  const Grid g = build_grid(geo);
  const OperatorMatrix d = assemble_dirac(geo, g);
  const double r = 1.0 / std::sqrt(kTwoPi);
  const SpinorField c = SpinorField::sample(g, [&](const auto&) { return Vec::Constant(1, r); });
  EXPECT_NEAR(norm_h1_discrete(c, d, g), 1.0, 1e-12);
  for (int k : {-3, 1, 2, 5}) {
    const SpinorField e = SpinorField::sample(g, [&](const auto& x) { return Vec::Constant(1, r * std::polar(1.0, k * x[0])); });
    EXPECT_NEAR(norm_h1_discrete(e, d, g), std::sqrt(1.0 + k * k), 1e-11) << k;
    const SpinorField raw(e.values() / r, 1);
    EXPECT_NEAR(norm_h1_discrete(raw, d, g), std::sqrt(kTwoPi * (1.0 + k * k)), 1e-10) << k;
  }
}

TEST(NormH1, DominatesL2) {
  std::mt19937_64 rng(19);
  for (const Geometry& geo : {Geometry::circle(3.0, 16, 0.5), Geometry::interval(1.0, 16),
                              Geometry::torus(kTwoPi, kTwoPi, 12, 0.0, 0.5)}) {
    const Grid g = build_grid(geo);
    const OperatorMatrix d = assemble_dirac(geo, g);
    for (int i = 0; i < 4; ++i) {
      const SpinorField f = random_field(rng, g);
      EXPECT_GE(norm_h1_discrete(f, d, g), std::sqrt(inner_l2(f, f, g).real()));
    }
  }
}
