#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "rggloc/torus.hpp"

using namespace rggloc;

namespace {

NormSpec l2(int d) { return NormSpec::make(NormKind::L2, d); }
NormSpec linf(int d) { return NormSpec::make(NormKind::Linf, d); }

}  // namespace

TEST(TorusDistance, IdentityIsZero) {
  const std::vector<double> x{0.3, 0.7};
  EXPECT_EQ(torus_distance(x, x, l2(2)), 0.0);
}

TEST(TorusDistance, WrapsAroundInOneDimension) {
  const std::vector<double> x{0.1}, y{0.9};
  EXPECT_NEAR(torus_distance(x, y, l2(1)), 0.2, 1e-15);
}

TEST(TorusDistance, AntipodalEuclidean) {
  const std::vector<double> x{0.0, 0.0}, y{0.5, 0.5};
  EXPECT_NEAR(torus_distance(x, y, l2(2)), std::sqrt(0.5), 1e-15);
}

TEST(TorusDistance, MatchesMinimumOverImages) {
  // Oracle: minimum over the 3^d integer translates of y.
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (NormKind kind : {NormKind::L1, NormKind::L2, NormKind::Linf}) {
    for (int d = 1; d <= 3; ++d) {
      const NormSpec norm = NormSpec::make(kind, d);
      for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> x(d), y(d);
        for (int k = 0; k < d; ++k) x[k] = u(gen), y[k] = u(gen);
        double best = INFINITY;
        const int images = static_cast<int>(std::pow(3, d));
        for (int code = 0; code < images; ++code) {
          double v[4];
          int c = code;
          for (int k = 0; k < d; ++k, c /= 3) v[k] = x[k] - (y[k] + (c % 3 - 1));
          best = std::min(best, norm.of(v));
        }
        EXPECT_NEAR(torus_distance(x, y, norm), best, 1e-12);
      }
    }
  }
}

TEST(BallVolume, UnitBallConstants) {
  EXPECT_DOUBLE_EQ(l2(2).nu, std::numbers::pi);
  EXPECT_DOUBLE_EQ(l2(3).nu, 4.0 * std::numbers::pi / 3.0);
  EXPECT_DOUBLE_EQ(linf(3).nu, 8.0);
  EXPECT_DOUBLE_EQ(NormSpec::make(NormKind::L1, 3).nu, 8.0 / 6.0);
}

TEST(BallVolume, HalfRadiusBall) {
  EXPECT_NEAR(ball_volume_tau(0.1, linf(2)), 0.01, 1e-15);
  EXPECT_NEAR(ball_volume_tau(0.1, l2(2)), std::numbers::pi * 0.0025, 1e-15);
  EXPECT_NEAR(ball_volume_tau(0.1, l2(2)), 0.0078540, 1e-7);
}

TEST(BallVolume, BoundedByTheRadiusOneValue) {
  for (NormKind kind : {NormKind::L1, NormKind::L2, NormKind::Linf}) {
    for (int d = 1; d <= 4; ++d) {
      const NormSpec norm = NormSpec::make(kind, d);
      EXPECT_LE(ball_volume_tau(1.0 - 1e-12, norm), norm.nu / std::pow(2.0, d));
    }
  }
}

TEST(ProbeMeasure, BoxBallAndContainedIntersection) {
  const NormSpec norm = l2(2);
  EXPECT_NEAR(probe_measure(Box{{0.2, 0.2}, {0.1, 0.1}}, norm), 0.01, 1e-15);
  EXPECT_NEAR(probe_measure(Ball{{0.5, 0.5}, 0.05}, norm), 0.0078540, 1e-7);
  const BallBox bb{Ball{{0.5, 0.5}, 0.05}, Box{{0.4, 0.4}, {0.2, 0.2}}};
  EXPECT_NEAR(probe_measure(bb, norm), std::numbers::pi * 0.0025, 1e-9);
}

TEST(ProbeMeasure, HalfBallByIntersection) {
  // Box covering the upper half of the ball: half the ball's area.
  const NormSpec norm = l2(2);
  const BallBox bb{Ball{{0.5, 0.5}, 0.1}, Box{{0.35, 0.5}, {0.3, 0.3}}};
  const MeasureResult m = probe_measure_bounded(bb, norm);
  EXPECT_NEAR(m.value, 0.5 * std::numbers::pi * 0.01, m.error_bound);
  EXPECT_LE(m.error_bound, 1e-4 * std::numbers::pi * 0.01);
}

TEST(ProbeMeasure, BallBoxAgreesWithMonteCarlo) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (NormKind kind : {NormKind::L1, NormKind::L2, NormKind::Linf}) {
    const NormSpec norm = NormSpec::make(kind, 2);
    const BallBox bb{Ball{{0.95, 0.5}, 0.2}, Box{{0.9, 0.38}, {0.3, 0.2}}};
    const int samples = 400000;
    int hits = 0;
    for (int i = 0; i < samples; ++i) {
      const std::vector<double> x{u(gen), u(gen)};
      hits += probe_contains(bb, x, norm);
    }
    const double p = static_cast<double>(hits) / samples;
    const double se = std::sqrt(p * (1 - p) / samples);
    EXPECT_NEAR(probe_measure(bb, norm), p, 5 * se) << norm.name();
  }
}

TEST(ProbeContains, CentreAndWrappedBox) {
  const NormSpec norm = l2(2);
  const std::vector<double> c{0.3, 0.4};
  EXPECT_TRUE(probe_contains(Ball{c, 0.05}, c, norm));
  const std::vector<double> origin{0.0, 0.0};
  EXPECT_TRUE(probe_contains(Box{{0.95, 0.95}, {0.1, 0.1}}, origin, norm));
  const std::vector<double> mid{0.5, 0.5};
  EXPECT_FALSE(probe_contains(Box{{0.95, 0.95}, {0.1, 0.1}}, mid, norm));
}

TEST(ProbeContains, JustOutsideTheBall) {
  const NormSpec norm = l2(2);
  const std::vector<double> c{0.5, 0.5}, x{0.5 + 0.05 + 1e-9, 0.5};
  EXPECT_FALSE(probe_contains(Ball{c, 0.05}, x, norm));
}

TEST(ProbeValidation, RejectsOversizedProbes) {
  const NormSpec norm = l2(2);
  EXPECT_THROW(validate_probe(Ball{{0.5, 0.5}, 0.3}, norm), std::invalid_argument);
  EXPECT_THROW(validate_probe(Box{{0.5, 0.5}, {0.6, 0.1}}, norm), std::invalid_argument);
  EXPECT_THROW(validate_probe(Ball{{0.5}, 0.1}, norm), std::invalid_argument);
  EXPECT_NO_THROW(validate_probe(Ball{{0.5, 0.5}, 0.1}, norm));
}

TEST(NormSpec, ParsesNamesAndRejectsBadInput) {
  EXPECT_EQ(NormSpec::parse("Linf", 2).kind, NormKind::Linf);
  EXPECT_EQ(NormSpec::parse("L1", 1).name(), "L1");
  EXPECT_THROW(NormSpec::parse("L3", 2), std::invalid_argument);
  EXPECT_THROW(NormSpec::make(NormKind::L2, 5), std::invalid_argument);
}
