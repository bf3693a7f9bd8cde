#include "irsmimo/precoders.hpp"
#include "irsmimo/waterfill.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace irsmimo;

namespace {

RVector vec(std::initializer_list<double> v) {
  RVector r(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) r(i++) = x;
  return r;
}

CMatrix random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix a(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) a(i, j) = {n(rng), n(rng)};
  }
  return a;
}

}  // namespace

TEST(Waterfill, DominantChannelTakesEverything) {
  const auto wf = waterfill(vec({10.0, 0.1}), 1.0);
  EXPECT_NEAR(wf.allocation(0), 1.0, 1e-12);
  EXPECT_NEAR(wf.allocation(1), 0.0, 1e-12);
  EXPECT_NEAR(wf.threshold, 1.1, 1e-12);
}

TEST(Waterfill, EqualGainsSplitEvenly) {
  const auto wf = waterfill(vec({3.0, 3.0, 3.0, 3.0}), 5.0);
  for (Index q = 0; q < 4; ++q) EXPECT_NEAR(wf.allocation(q), 0.25, 1e-12);
}

TEST(Waterfill, TwoActiveLevels) {
  const auto wf = waterfill(vec({4.0, 1.0}), 1.0);
  EXPECT_NEAR(wf.allocation(0), 0.875, 1e-12);
  EXPECT_NEAR(wf.allocation(1), 0.125, 1e-12);
  EXPECT_NEAR(wf.threshold, 1.125, 1e-12);
}

TEST(Waterfill, KktHoldsOnRandomInstances) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> gain(0.0, 5.0);
  std::uniform_real_distribution<double> log_snr(-2.0, 3.0);
  for (int it = 0; it < 500; ++it) {
    const Index q = 1 + it % 6;
    RVector s(q);
    for (Index i = 0; i < q; ++i) s(i) = gain(rng);
    const double gamma = std::pow(10.0, log_snr(rng));
    const auto wf = waterfill(s, gamma, 2.0);
    EXPECT_NEAR(wf.allocation.sum(), 2.0, 1e-10);
    for (Index i = 0; i < q; ++i) {
      const double inv = 1.0 / (gamma * s(i));
      EXPECT_GE(wf.allocation(i), 0.0);
      if (wf.allocation(i) > 1e-12) {
        EXPECT_NEAR(wf.allocation(i) + inv, wf.threshold, 1e-9 * std::max(1.0, wf.threshold));
      } else {
        EXPECT_GE(inv, wf.threshold - 1e-9 * std::max(1.0, wf.threshold));
      }
    }
  }
}

TEST(Waterfill, ZeroGainsAreSkippedAllZeroThrows) {
  const auto wf = waterfill(vec({0.0, 2.0}), 1.0);
  EXPECT_EQ(wf.allocation(0), 0.0);
  EXPECT_NEAR(wf.allocation(1), 1.0, 1e-12);
  EXPECT_THROW(waterfill(vec({0.0, 0.0}), 1.0), NumericalError);
  EXPECT_THROW(waterfill(vec({1.0}), 0.0), ConfigError);
  EXPECT_THROW(waterfill(vec({-1.0, 1.0}), 1.0), ConfigError);
}

TEST(Waterfill, HugeInverseGainsKeepPrecision) {
  // Inverse gains 1e9 and 1e9 + 0.5 with a unit budget: the levels differ by 0.5.
  const auto wf = waterfill(vec({1e-9, 1.0 / (1e9 + 0.5)}), 1.0);
  EXPECT_NEAR(wf.allocation.sum(), 1.0, 1e-12);
  EXPECT_NEAR(wf.allocation(0), 0.75, 1e-6);
  EXPECT_NEAR(wf.allocation(1), 0.25, 1e-6);
}

TEST(FdOptimal, DiagonalChannel) {
  CMatrix h = CMatrix::Zero(2, 2);
  h(0, 0) = 2.0;
  h(1, 1) = 1.0;
  const auto p = fd_optimal(h, 1.0, 2);
  EXPECT_NEAR(p.effective.squaredNorm(), 1.0, 1e-12);
  EXPECT_NEAR(std::norm(p.effective(0, 0)), 0.875, 1e-12);
  EXPECT_NEAR(std::norm(p.effective(1, 1)), 0.125, 1e-12);
  EXPECT_NEAR(rate(h, p.effective, 1.0), std::log2(4.5) + std::log2(1.125), 1e-12);
  EXPECT_NEAR(rate(h, p.effective, 1.0), 2.3399, 1e-4);
}

TEST(FdOptimal, UnitaryChannelSplitsEvenly) {
  std::mt19937_64 rng(2);
  const CMatrix a = random_matrix(rng, 4, 4);
  const CMatrix u = Eigen::HouseholderQR<CMatrix>(a).householderQ();
  const auto p = fd_optimal(u, 10.0, 4);
  EXPECT_NEAR(rate(u, p.effective, 10.0), 4.0 * std::log2(1.0 + 10.0 / 4.0), 1e-10);
}

TEST(FdOptimal, LowSnrBeamformsOnTheTopMode) {
  std::mt19937_64 rng(5);
  const CMatrix h = random_matrix(rng, 4, 16);
  const auto p = fd_optimal(h, 1e-6, 3);
  Eigen::JacobiSVD<CMatrix> svd(h);
  const double s1 = svd.singularValues()(0);
  EXPECT_NEAR(rate(h, p.effective, 1e-6), std::log2(1.0 + 1e-6 * s1 * s1), 1e-12);
}

TEST(FdOptimal, RateBeatsRandomUnitNormPrecoders) {
  std::mt19937_64 rng(8);
  const CMatrix h = random_matrix(rng, 4, 16);
  const double best = rate(h, fd_optimal(h, 3.0, 4).effective, 3.0);
  for (int i = 0; i < 200; ++i) {
    CMatrix f = random_matrix(rng, 16, 4);
    f /= f.norm();
    EXPECT_LE(rate(h, f, 3.0), best + 1e-12);
  }
}

TEST(FdOptimal, RejectsTooManyStreams) {
  EXPECT_THROW(fd_optimal(CMatrix::Ones(2, 8), 1.0, 3), ConfigError);
}
