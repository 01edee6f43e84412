#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "rggloc/point_process.hpp"

using namespace rggloc;

namespace {

const NormSpec kL2 = NormSpec::make(NormKind::L2, 2);

PointSet manual(int dim, std::initializer_list<double> coords) {
  PointSet ps;
  ps.dim = dim;
  ps.coords = coords;
  return ps;
}

}  // namespace

TEST(ExpectedEdges, ReferenceInstance) {
  const ModelParams p = ModelParams::make(150, 0.1, kL2, 0.5);
  EXPECT_NEAR(expected_edges(p), 112.5 * std::numbers::pi, 1e-9);
  EXPECT_NEAR(expected_edges(p), 353.429, 5e-4);
}

TEST(ExpectedEdges, PTargetHitsThePowerExactly) {
  for (int d = 1; d <= 3; ++d) {
    const NormSpec norm = NormSpec::make(NormKind::Linf, d);
    const ModelParams p = ModelParams::from_p_target(1e5, 1.0, norm, 0.5);
    EXPECT_NEAR(expected_edges(p) / 1e5, 1.0, 1e-12);
    EXPECT_NEAR(p.p_hat, 1.0, 1e-12);
  }
}

TEST(ModelParams, RejectsInvalidInput) {
  EXPECT_THROW(ModelParams::make(0.0, 0.1, kL2, 0.5), std::invalid_argument);
  EXPECT_THROW(ModelParams::make(100, 0.6, kL2, 0.5), std::invalid_argument);
  EXPECT_THROW(ModelParams::make(100, 0.1, kL2, 1.0), std::invalid_argument);
}

TEST(SamplePpp, ZeroIntensityIsEmpty) { EXPECT_EQ(sample_ppp(0.0, kL2, 3).size(), 0u); }

TEST(SamplePpp, MeanCountIsPoisson) {
  const int reps = 10000;
  double total = 0.0;
  for (int i = 0; i < reps; ++i) total += static_cast<double>(sample_ppp(150, kL2, 1000 + i).size());
  EXPECT_NEAR(total / reps, 150.0, 4.0 * std::sqrt(150.0 / reps));
}

TEST(SamplePpp, SeedDeterminesPoints) {
  const PointSet a = sample_ppp(500, kL2, 42), b = sample_ppp(500, kL2, 42), c = sample_ppp(500, kL2, 43);
  EXPECT_EQ(a.coords, b.coords);
  EXPECT_NE(a.coords, c.coords);
  for (double x : a.coords) {
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
}

TEST(EdgeCount, SmallHandBuiltSets) {
  EXPECT_EQ(edge_count(manual(2, {}), 0.1, kL2), 0);
  EXPECT_EQ(edge_count(manual(2, {0.5, 0.5}), 0.1, kL2), 0);
  EXPECT_EQ(edge_count(manual(2, {0.5, 0.5, 0.5 + 0.1 - 1e-9, 0.5}), 0.1, kL2), 1);
  EXPECT_EQ(edge_count(manual(2, {0.5, 0.5, 0.51, 0.5, 0.5, 0.51}), 0.1, kL2), 3);
  // Pair joined only through the wraparound.
  EXPECT_EQ(edge_count(manual(2, {0.99, 0.5, 0.02, 0.5}), 0.1, kL2), 1);
}

TEST(EdgeCount, MatchesBruteForce) {
  for (NormKind kind : {NormKind::L1, NormKind::L2, NormKind::Linf}) {
    for (int d = 1; d <= 3; ++d) {
      const NormSpec norm = NormSpec::make(kind, d);
      for (int rep = 0; rep < 4; ++rep) {
        const PointSet ps = sample_ppp(600, norm, 77 * d + rep);
        for (double r : {0.01, 0.07, 0.3}) {
          EXPECT_EQ(edge_count(ps, r, norm), edge_count_bruteforce(ps, r, norm)) << norm.name() << " d=" << d;
        }
      }
    }
  }
}

TEST(CountInProbe, ScanOracleAndPlantedBall) {
  const PointSet ps = sample_ppp(2000, kL2, 9);
  const Ball ball{{0.02, 0.97}, 0.1};
  std::int64_t scan = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) scan += torus_distance(ps.point(i), ball.center, kL2) <= ball.radius;
  EXPECT_EQ(count_in_probe(ps, ball, kL2), scan);
  EXPECT_EQ(count_in_probe(manual(2, {}), ball, kL2), 0);

  PointSet planted = manual(2, {0.02, 0.97, 0.05, 0.99, 0.98, 0.95});
  EXPECT_GE(count_in_probe(planted, ball, kL2), 3);
}

TEST(PointSetCsv, RoundTripsExactly) {
  const PointSet a = sample_ppp(100, NormSpec::make(NormKind::L1, 3), 5);
  std::stringstream ss;
  write_pointset_csv(ss, a);
  const PointSet b = read_pointset_csv(ss);
  EXPECT_EQ(b.dim, 3);
  EXPECT_EQ(b.seed, 5u);
  EXPECT_EQ(a.coords, b.coords);
}

TEST(RegimeWarnings, FlagsRadiusOutsideTheWindow) {
  EXPECT_TRUE(ModelParams::from_p_target(1e5, 1.0, kL2, 0.5).regime_warnings().empty());
  EXPECT_FALSE(ModelParams::make(1e5, 0.4, kL2, 0.5).regime_warnings().empty());
}
