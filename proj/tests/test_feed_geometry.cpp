#include "irsmimo/feed_geometry.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

using namespace irsmimo;

namespace {

constexpr double kLambda = 0.01;
constexpr double kD = 0.005;

ArrayGeometry surface(Index m) { return ArrayGeometry(m, kD, kLambda); }

IlluminationConfig defaults(Illumination s, Index m, Index n) {
  return IlluminationConfig::with_default_scaling(s, n, surface(m), 49.0, 1.0);
}

// Composite Simpson rule on [a, b] with n (even) panels.
template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

TEST(Partition, CoversDisjointEqualContiguous) {
  for (auto [m, n] : {std::pair<Index, Index>{256, 4}, {256, 16}, {256, 2}, {64, 8}, {1024, 4}, {16, 1}}) {
    const auto g = surface(m);
    const auto parts = surface_partition(g, n);
    ASSERT_EQ(static_cast<Index>(parts.size()), n);
    std::set<Index> seen;
    for (const auto& p : parts) {
      EXPECT_EQ(static_cast<Index>(p.size()), m / n);
      for (Index e : p) EXPECT_TRUE(seen.insert(e).second) << "element " << e << " in two blocks";
      // Contiguous: the block's bounding box holds exactly its elements.
      Index r0 = g.side(), r1 = -1, c0 = g.side(), c1 = -1;
      for (Index e : p) {
        r0 = std::min(r0, g.row_of(e));
        r1 = std::max(r1, g.row_of(e));
        c0 = std::min(c0, g.col_of(e));
        c1 = std::max(c1, g.col_of(e));
      }
      EXPECT_EQ((r1 - r0 + 1) * (c1 - c0 + 1), static_cast<Index>(p.size()));
    }
    EXPECT_EQ(static_cast<Index>(seen.size()), m);
  }
}

TEST(Partition, NonDividingCountsAreConfigErrors) {
  EXPECT_THROW(surface_partition(surface(256), 3), ConfigError);
  IlluminationConfig c = defaults(Illumination::SI, 256, 4);
  c.num_feeds = 3;
  EXPECT_THROW(place_feeds(c), ConfigError);
}

TEST(PlaceFeeds, LayoutInvariants) {
  for (Illumination s : {Illumination::FI, Illumination::PI, Illumination::SI, Illumination::BlockageFreePI,
                         Illumination::UniformSI}) {
    const auto cfg = defaults(s, 256, 4);
    const auto lay = place_feeds(cfg);
    ASSERT_EQ(lay.num_feeds(), 4);
    for (Index n = 0; n < 4; ++n) {
      const auto& p = lay.positions[static_cast<std::size_t>(n)];
      EXPECT_NEAR(p.x(), cfg.feed_distance, 1e-15);
      EXPECT_NEAR((p - cfg.center()).norm(), cfg.ring_radius, 1e-12);
      EXPECT_NEAR(lay.boresights[static_cast<std::size_t>(n)].norm(), 1.0, 1e-12);
    }
    EXPECT_GT(lay.distance.minCoeff(), 0.0);
    for (Index m = 0; m < 256; ++m) {
      EXPECT_EQ(lay.owner[static_cast<std::size_t>(m)] >= 0, true);
    }
  }
}

TEST(PlaceFeeds, FeedsSitOverTheirOwnQuadrant) {
  const auto cfg = defaults(Illumination::SI, 256, 4);
  const auto lay = place_feeds(cfg);
  for (Index n = 0; n < 4; ++n) {
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (Index m : lay.partition[static_cast<std::size_t>(n)]) c += cfg.surface.position(m);
    c /= 64.0;
    const auto& p = lay.positions[static_cast<std::size_t>(n)];
    // S2 ring radius d sqrt(2M)/4 equals the quadrant-centroid radius d sqrt(M) / (2 sqrt 2).
    EXPECT_NEAR(p.y(), c.y(), 1e-12);
    EXPECT_NEAR(p.z(), c.z(), 1e-12);
    const Eigen::Vector3d b = lay.boresights[static_cast<std::size_t>(n)];
    EXPECT_NEAR(b.x(), -1.0, 1e-12);
  }
}

TEST(PlaceFeeds, SingleFeedFullIllumination) {
  auto cfg = defaults(Illumination::FI, 256, 1);
  const auto lay = place_feeds(cfg);
  ASSERT_EQ(lay.num_feeds(), 1);
  EXPECT_EQ(lay.partition[0].size(), 256u);
  const Eigen::Vector3d to_origin = (-lay.positions[0]).normalized();
  EXPECT_LT((lay.boresights[0] - to_origin).norm(), 1e-12);
}

TEST(PlaceFeeds, BlockageFreeRingSitsAtTheCorner) {
  const auto cfg = defaults(Illumination::BlockageFreePI, 256, 4);
  const double half = kD * 16.0 / 2.0;
  EXPECT_NEAR(cfg.center().y(), half, 1e-15);
  EXPECT_NEAR(cfg.center().z(), half, 1e-15);
}

TEST(AngularExtent, ScalingRules) {
  // S2, SI, M = 256, N = 4: per-sub-surface extent tan(theta0) = 1/4.
  const auto si = defaults(Illumination::SI, 256, 4);
  EXPECT_NEAR(angular_extent(64.0, kD, si.feed_distance), std::atan(0.25), 1e-12);
  EXPECT_NEAR(std::atan(0.25), 0.2450, 5e-5);
  // S1, FI, M = 256: full-surface extent tan(theta0) = 1/4.
  const auto fi = defaults(Illumination::FI, 256, 4);
  EXPECT_NEAR(angular_extent(256.0, kD, fi.feed_distance), std::atan(0.25), 1e-12);
  // Invariant in M under the scaling rules.
  for (Index m : {64, 1024, 4096}) {
    EXPECT_NEAR(angular_extent(static_cast<double>(m), kD, defaults(Illumination::FI, m, 4).feed_distance),
                std::atan(0.25), 1e-12);
  }
  EXPECT_LT(angular_extent(256.0, kD, 1e6), 1e-6);
}

TEST(FeedGain, PeakBoundaryAndNormalization) {
  EXPECT_NEAR(feed_gain(49.0, 0.0), 100.0, 1e-12);
  EXPECT_NEAR(linear_to_db(feed_gain(49.0, 0.0)), 20.0, 1e-9);
  EXPECT_NEAR(feed_gain(49.0, kPi / 2.0), 0.0, 1e-12);
  EXPECT_EQ(feed_gain(49.0, 2.0), 0.0);
  for (double kappa : {2.0, 10.0, 49.0}) {
    // (1 / 4 pi) * integral of G over the sphere = (1/2) * int_0^{pi/2} G sin(theta) dtheta.
    const double total =
        0.5 * simpson([&](double t) { return feed_gain(kappa, t) * std::sin(t); }, 0.0, kPi / 2.0, 20000);
    EXPECT_NEAR(total, 1.0, 1e-6) << "kappa " << kappa;
  }
}

TEST(TransferMatrix, SingleElementBroadside) {
  IlluminationConfig c;
  c.strategy = Illumination::FI;
  c.num_feeds = 1;
  c.surface = surface(1);
  c.ring_radius = 0.0;
  c.feed_distance = 0.2;
  const auto t = build_transfer_matrix(c);
  EXPECT_NEAR(std::abs(t.matrix(0, 0)), 10.0 * kLambda / (4.0 * kPi * 0.2), 1e-15);
  EXPECT_NEAR(std::arg(t.matrix(0, 0) * std::polar(1.0, 2.0 * kPi * 0.2 / kLambda)), 0.0, 1e-9);
}

TEST(TransferMatrix, ModulusFollowsThePatternEverywhere) {
  const auto cfg = defaults(Illumination::PI, 256, 4);
  const auto t = build_transfer_matrix(cfg);
  for (Index n = 0; n < 4; ++n) {
    for (Index m = 0; m < 256; m += 7) {
      const double r = t.layout.distance(m, n);
      const double g = 2.0 * 50.0 * std::pow(std::cos(t.layout.theta(m, n)), 49.0);
      EXPECT_NEAR(std::abs(t.matrix(m, n)), kLambda * std::sqrt(g) / (4.0 * kPi * r), 1e-14);
    }
  }
}

TEST(TransferMatrix, ShieldingZeroesForeignBlocks) {
  const auto t = build_transfer_matrix(defaults(Illumination::SI, 256, 4));
  for (Index n = 0; n < 4; ++n) {
    for (Index m = 0; m < 256; ++m) {
      if (t.layout.owner[static_cast<std::size_t>(m)] != n) {
        EXPECT_EQ(t.matrix(m, n), cdouble(0.0, 0.0));
      } else {
        EXPECT_GT(std::abs(t.matrix(m, n)), 0.0);
      }
    }
  }
  // Dense for partial illumination.
  const auto pi = build_transfer_matrix(defaults(Illumination::PI, 256, 4));
  EXPECT_GT(pi.matrix.cwiseAbs().minCoeff(), 0.0);
}

TEST(TransferMatrix, EfficiencyScalesBySquareRoot) {
  auto a = defaults(Illumination::PI, 64, 4);
  auto b = a;
  b.surface_efficiency = 0.25;
  const auto ta = build_transfer_matrix(a);
  const auto tb = build_transfer_matrix(b);
  EXPECT_LT((tb.matrix - 0.5 * ta.matrix).norm(), 1e-14 * ta.matrix.norm());
}

TEST(TransferMatrix, DecaysAsInverseDistanceAtFixedAngle) {
  IlluminationConfig c;
  c.strategy = Illumination::FI;
  c.num_feeds = 1;
  c.surface = surface(1);
  c.feed_distance = 0.1;
  const double near = std::abs(build_transfer_matrix(c).matrix(0, 0));
  c.feed_distance = 0.3;
  const double far = std::abs(build_transfer_matrix(c).matrix(0, 0));
  EXPECT_NEAR(near / far, 3.0, 1e-12);
}

TEST(TransferMatrix, RebuildsFromStoredLayout) {
  const auto t = build_transfer_matrix(defaults(Illumination::PI, 64, 4));
  const auto again = build_transfer_matrix(t.config, t.layout);
  EXPECT_EQ((again.matrix - t.matrix).norm(), 0.0);
}

TEST(UniformSi, ConstantModulusAndUnitCondition) {
  for (auto [m, n] : {std::pair<Index, Index>{256, 4}, {64, 4}, {1024, 16}, {256, 2}}) {
    const auto t = build_transfer_matrix(defaults(Illumination::UniformSI, m, n));
    double c = -1.0;
    for (Index k = 0; k < n; ++k) {
      for (Index e = 0; e < m; ++e) {
        const double a = std::abs(t.matrix(e, k));
        if (a == 0.0) continue;
        if (c < 0.0) c = a;
        EXPECT_NEAR(a, c, 1e-15 * c);
      }
    }
    EXPECT_NEAR(condition_number(t), 1.0, 1e-9);
  }
}

TEST(UniformSi, ModulusFormula) {
  // With lambda / (4 pi r) normalized to one and theta0 = atan(1/4): c = sqrt(2 / (1 - cos theta0)).
  const double theta0 = std::atan(0.25);
  EXPECT_NEAR(std::cos(theta0), 0.970142, 1e-6);
  EXPECT_NEAR(std::sqrt(2.0 / (1.0 - std::cos(theta0))), 8.185, 1e-3);

  const auto t = build_transfer_matrix(defaults(Illumination::UniformSI, 256, 4));
  double mean_r = 0.0;
  for (Index m = 0; m < 256; ++m) mean_r += t.layout.distance(m, t.layout.owner[static_cast<std::size_t>(m)]);
  mean_r /= 256.0;
  const double expected = kLambda / (4.0 * kPi * mean_r) * std::sqrt(2.0 / (1.0 - std::cos(theta0)));
  EXPECT_NEAR(std::abs(t.matrix(0, t.layout.owner[0])), expected, 1e-14);
}

TEST(ConditionNumber, ShieldedIsNearOneAndFromColumnNorms) {
  const auto t = build_transfer_matrix(defaults(Illumination::SI, 256, 4));
  const double cond = condition_number(t);
  EXPECT_LT(cond, 1.05);
  const CMatrix gram = t.matrix.adjoint() * t.matrix;
  const double off = (gram - CMatrix(gram.diagonal().asDiagonal())).norm();
  EXPECT_LT(off, 1e-15 * gram.norm());
  const RVector norms = t.matrix.colwise().norm().transpose();
  EXPECT_NEAR(cond, norms.maxCoeff() / norms.minCoeff(), 1e-9);
}

TEST(ConditionNumber, DuplicateColumnIsInfinite) {
  CMatrix t(4, 2);
  t.col(0) << 1.0, 2.0, cdouble(0, 1), 0.5;
  t.col(1) = t.col(0);
  EXPECT_TRUE(std::isinf(condition_number(t)));
  EXPECT_THROW(condition_number(CMatrix::Zero(3, 2)), NumericalError);
}

TEST(Spillover, ClosedFormValues) {
  EXPECT_NEAR(spillover_efficiency(49.0, kPi / 2.0), 1.0, 1e-15);
  EXPECT_NEAR(spillover_efficiency(49.0, std::atan(0.25)), 1.0 - std::pow(0.970142500145332, 50.0), 1e-12);
  EXPECT_NEAR(spillover_efficiency(49.0, std::atan(0.25)), 0.780, 1e-3);
  double prev = 0.0;
  for (double t = 0.05; t < 1.5; t += 0.05) {
    const double v = spillover_efficiency(10.0, t);
    EXPECT_GT(v, prev);
    EXPECT_LE(v, 1.0);
    EXPECT_GT(spillover_efficiency(11.0, t), v);
    prev = v;
  }
}

TEST(Spillover, DiscreteMatchesClosedFormForFullIllumination) {
  const auto t = build_transfer_matrix(defaults(Illumination::FI, 1024, 1));
  const double discrete = discrete_spillover(t)(0);
  const double closed = spillover_efficiency(49.0, std::atan(0.25));
  EXPECT_NEAR(discrete, closed, 0.03 * closed);
}

TEST(Spillover, DiscreteShieldedCountsOwnBlockOnly) {
  const auto t = build_transfer_matrix(defaults(Illumination::SI, 256, 4));
  const RVector rho = discrete_spillover(t);
  for (Index n = 0; n < 4; ++n) {
    EXPECT_GT(rho(n), 0.0);
    EXPECT_LE(rho(n), 1.0);
    EXPECT_NEAR(rho(n), rho(0), 1e-9);  // symmetric layout
  }
}

TEST(Taper, BoundsLimitsAndContinuity) {
  for (double kappa : {2.0, 3.0, 10.0, 49.0, 100.0}) {
    for (double t = 0.02; t < 1.55; t += 0.07) {
      const double v = taper_efficiency(kappa, t);
      EXPECT_GT(v, 0.0) << kappa << " " << t;
      EXPECT_LE(v, 1.0 + 1e-12) << kappa << " " << t;
    }
  }
  const double at2 = taper_efficiency(2.0, kPi / 4.0);
  const double c = std::cos(kPi / 4.0);
  EXPECT_NEAR(at2, std::log(c) * std::log(c) / ((1.0 - c) * (1.0 / c - 1.0)), 1e-15);
  EXPECT_NEAR(taper_efficiency(2.0 + 1e-4, kPi / 4.0), at2, 1e-5);
  EXPECT_NEAR(taper_efficiency(49.0, 1e-3), 1.0, 1e-3);
  EXPECT_THROW(taper_efficiency(1.0, 0.3), ConfigError);
}

TEST(GeometryCsv, HeaderAndRows) {
  const auto t = build_transfer_matrix(defaults(Illumination::SI, 16, 4));
  std::ostringstream os;
  write_geometry_csv(os, t);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "n,m,r_m,theta_rad,abs_T");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 64);
}

TEST(IlluminationConfig, Validation) {
  auto c = defaults(Illumination::SI, 256, 4);
  c.feed_exponent = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = defaults(Illumination::SI, 256, 4);
  c.surface_efficiency = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(parse_illumination("BlockageFreePI"), Illumination::BlockageFreePI);
  EXPECT_EQ(parse_illumination("USI"), Illumination::UniformSI);
  EXPECT_THROW(parse_illumination("XI"), ConfigError);
}

TEST(PlaceFeeds, NearFieldIsFlaggedNotRejected) {
  // S2 at M = 64 puts the feeds about 4.5 wavelengths from the surface.
  const auto lay = place_feeds(defaults(Illumination::SI, 64, 4));
  EXPECT_FALSE(lay.far_field);
  EXPECT_TRUE(place_feeds(defaults(Illumination::SI, 1024, 4)).far_field);
}
