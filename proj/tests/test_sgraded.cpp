#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "rggloc/sgraded.hpp"

using namespace rggloc;

namespace {

const NormSpec kLinf1 = NormSpec::make(NormKind::Linf, 1);
const NormSpec kLinf2 = NormSpec::make(NormKind::Linf, 2);
const NormSpec kL2 = NormSpec::make(NormKind::L2, 2);

CellCoords cc(std::int64_t a, std::int64_t b = 0, std::int64_t c = 0) { return CellCoords{a, b, c, 0}; }

// Pairwise definition of the s-graded edge count, summed over unordered
// point pairs: C(X_I, 2) within a cell plus X_I X_J for distinct close cells.
std::int64_t pairwise_oracle(const CellConfig& cfg) {
  const GridModel& g = *cfg.grid;
  std::int64_t total = 0;
  for (std::size_t i = 0; i < cfg.index.size(); ++i) {
    total += cfg.count[i] * (cfg.count[i] - 1) / 2;
    for (std::size_t j = i + 1; j < cfg.index.size(); ++j) {
      if (cell_metric(cfg.index[i], cfg.index[j], g) <= g.s) total += cfg.count[i] * cfg.count[j];
    }
  }
  return total;
}

}  // namespace

TEST(BuildGrid, ReferenceInstance) {
  const ModelParams p = ModelParams::make(150, 0.1, kL2, 0.5);
  const GridModel g = GridModel::build(p, 5);
  EXPECT_EQ(g.m, 50);
  EXPECT_NEAR(g.D, 0.06, 1e-15);
  EXPECT_EQ(g.cells(), 2500u);
}

TEST(BuildGrid, RejectsCoarseGrids) {
  const ModelParams p = ModelParams::make(150, 0.49, kL2, 0.5);
  EXPECT_THROW(GridModel::build(ModelParams::make(150, 0.5 - 1e-12, kL2, 0.5), 3), std::invalid_argument);
  EXPECT_THROW(GridModel::build(p, 2), std::invalid_argument);
}

TEST(CellMetric, HandCases) {
  const GridModel g = GridModel::build_explicit(kLinf2, 5, 50, 0.1);
  EXPECT_EQ(cell_metric(cc(7, 9), cc(7, 9), g), 0);
  EXPECT_EQ(cell_metric(cc(7, 9), cc(8, 9), g), 1);
  EXPECT_EQ(cell_metric(cc(1, 1), cc(4, 2), g), 3);
  // Wraparound neighbours.
  EXPECT_EQ(cell_metric(cc(0, 0), cc(49, 49), g), 1);
}

TEST(CellMetric, AgreesWithSamplingOracle) {
  std::mt19937_64 gen(3);
  for (NormKind kind : {NormKind::L1, NormKind::L2, NormKind::Linf}) {
    for (int d = 1; d <= 3; ++d) {
      const GridModel g = GridModel::build_explicit(NormSpec::make(kind, d), 3, 12, 0.1);
      std::uniform_int_distribution<std::int64_t> u(0, g.m - 1);
      Rng rng(17 + d);
      for (int rep = 0; rep < 25; ++rep) {
        CellCoords a{}, b{};
        for (int k = 0; k < d; ++k) a[k] = u(gen), b[k] = u(gen);
        EXPECT_EQ(cell_metric(a, b, g), cell_metric_numeric_oracle(a, b, g, 60000, rng));
      }
    }
  }
}

TEST(CellMetric, AntipodalOneDimensional) {
  const GridModel g = GridModel::build_explicit(kLinf1, 3, 10, 0.5);
  EXPECT_EQ(cell_metric(cc(0), cc(5), g), 5);
  Rng rng(1);
  EXPECT_EQ(cell_metric_numeric_oracle(cc(0), cc(5), g, 20000, rng), 5);
}

TEST(Neighborhood, LinfWindowSizes) {
  const GridModel g2 = GridModel::build_explicit(kLinf2, 3, 20, 0.5);
  EXPECT_EQ(g2.nbhd_size, 49);
  const IndexSet n2 = neighborhood(cc(0, 0), g2);
  EXPECT_EQ(n2.size(), 49u);
  EXPECT_TRUE(set_contains(n2, g2.encode(cc(0, 0))));
  for (auto j : n2) EXPECT_LE(cell_metric(g2.encode(cc(0, 0)), j, g2), 3);
  const GridModel g1 = GridModel::build_explicit(kLinf1, 3, 20, 0.5);
  EXPECT_EQ(neighborhood(cc(4), g1).size(), 7u);
}

TEST(Neighborhood, MatchesExhaustiveScan) {
  for (NormKind kind : {NormKind::L1, NormKind::L2}) {
    const GridModel g = GridModel::build_explicit(NormSpec::make(kind, 2), 4, 15, 0.5);
    const CellCoords centre = cc(2, 13);
    IndexSet scan;
    for (std::uint64_t j = 0; j < g.cells(); ++j) {
      if (cell_metric(g.encode(centre), j, g) <= g.s) scan.push_back(j);
    }
    EXPECT_EQ(neighborhood(centre, g), scan);
  }
}

TEST(MaxClique, LinfClosedForm) {
  EXPECT_EQ(max_clique_set_size(GridModel::build_explicit(kLinf2, 3, 20, 0.5)), 16);
  EXPECT_EQ(max_clique_set_size(GridModel::build_explicit(kLinf1, 5, 40, 0.5)), 6);
  for (int d = 1; d <= 3; ++d) {
    for (int s = 3; s <= 5; ++s) {
      const GridModel g = GridModel::build_explicit(NormSpec::make(NormKind::Linf, d), s, 4 * s + 8, 0.5);
      EXPECT_EQ(g.tau_s, static_cast<std::int64_t>(std::pow(s + 1, d)));
      EXPECT_TRUE(g.tau_exact);
    }
  }
}

TEST(MaxClique, AtLeastTheVolumeBound) {
  for (NormKind kind : {NormKind::L1, NormKind::L2, NormKind::Linf}) {
    for (int d = 1; d <= 2; ++d) {
      const NormSpec norm = NormSpec::make(kind, d);
      const ModelParams p = ModelParams::make(1000, 0.01, norm, 0.5);
      for (int s : {3, 5, 8}) {
        const GridModel g = GridModel::build(p, s);
        const double bound = std::pow(static_cast<double>(g.m), d) * ball_volume_tau(p.r, norm);
        EXPECT_GE(static_cast<double>(g.tau_s), std::ceil(bound - 1e-9)) << norm.name() << " s=" << s;
      }
    }
  }
}

TEST(MaxClique, ShapeIsACliqueOfDiameterS) {
  for (NormKind kind : {NormKind::L1, NormKind::L2}) {
    const GridModel g = GridModel::build_explicit(NormSpec::make(kind, 2), 6, 40, 0.5);
    const IndexSet set = clique_set_at(g, g.encode(cc(38, 1)));
    EXPECT_EQ(static_cast<std::int64_t>(set.size()), g.tau_s);
    EXPECT_EQ(set_diameter(set, g), g.s);
  }
}

TEST(EnumerateCliques, FourTranslatesInOneDimension) {
  const GridModel g = GridModel::build_explicit(kLinf1, 3, 20, 0.5);
  const auto sets = enumerate_max_clique_sets(g, cc(10));
  ASSERT_EQ(sets.size(), 4u);
  std::set<IndexSet> expected;
  for (int start = 7; start <= 10; ++start) expected.insert({std::uint64_t(start), std::uint64_t(start + 1),
                                                            std::uint64_t(start + 2), std::uint64_t(start + 3)});
  for (const auto& s : sets) {
    EXPECT_TRUE(expected.count(s));
    EXPECT_EQ(set_diameter(s, g), 3);
    EXPECT_EQ(static_cast<std::int64_t>(s.size()), g.tau_s);
  }
}

TEST(EnumerateCliques, EverySetHasDiameterExactlyS) {
  const GridModel g = GridModel::build_explicit(kL2, 3, 20, 0.5);
  const auto sets = enumerate_max_clique_sets(g, cc(5, 5));
  ASSERT_FALSE(sets.empty());
  for (const auto& s : sets) {
    EXPECT_TRUE(set_contains(s, g.encode(cc(5, 5))));
    EXPECT_EQ(set_diameter(s, g), 3);
    EXPECT_EQ(static_cast<std::int64_t>(s.size()), g.tau_s);
  }
}

TEST(Coarsen, CountsAndCornerCell) {
  const GridModel g = GridModel::build_explicit(kL2, 3, 10, 0.5);
  PointSet empty;
  empty.dim = 2;
  EXPECT_EQ(coarsen(empty, g).total(), 0);
  PointSet corner;
  corner.dim = 2;
  corner.coords = {0.99, 0.99};
  const CellConfig c = coarsen(corner, g);
  ASSERT_EQ(c.support(), 1u);
  EXPECT_EQ(g.decode(c.index[0]), cc(9, 9));
  const PointSet ps = sample_ppp(400, kL2, 8);
  EXPECT_EQ(coarsen(ps, g).total(), static_cast<std::int64_t>(ps.size()));
}

TEST(SampleCellConfig, MeanAndZeroIntensity) {
  const GridModel g = GridModel::build_explicit(kLinf1, 3, 10, 0.7);
  double sum = 0.0;
  const int reps = 10000;
  for (int i = 0; i < reps; ++i) sum += static_cast<double>(sample_cell_config(g, 100 + i).at(4));
  EXPECT_NEAR(sum / reps, 0.7, 4.0 * std::sqrt(0.7 / reps));

  const ModelParams p = ModelParams::make(1e-300, 0.1, kLinf1, 0.5);
  EXPECT_EQ(sample_cell_config(GridModel::build(p, 3), 1).total(), 0);
}

TEST(SampleCellConfig, TotalIsPoissonByChiSquare) {
  // Total over 81 cells at D = 1/9 is Poisson(9); bin and test at the 1% level.
  const GridModel g = GridModel::build_explicit(kLinf2, 3, 3 * 3, 1.0 / 9.0);
  const int reps = 20000;
  std::vector<int> obs(20, 0);
  for (int i = 0; i < reps; ++i) {
    const std::int64_t t = sample_cell_config(g, 5000 + i).total();
    ++obs[std::min<std::int64_t>(t, 19)];
  }
  double chi2 = 0.0, cdf = 0.0, pmf = std::exp(-9.0);
  for (int k = 0; k < 20; ++k) {
    double pk = k < 19 ? pmf : 1.0 - cdf;
    cdf += pmf;
    pmf *= 9.0 / (k + 1);
    const double e = pk * reps;
    chi2 += (obs[k] - e) * (obs[k] - e) / e;
  }
  EXPECT_LT(chi2, 36.19);  // chi-square 99th percentile, 19 degrees of freedom
}

TEST(SgradedEdges, HandExpansions) {
  const GridModel g = GridModel::build_explicit(kL2, 3, 12, 0.5);
  EXPECT_EQ(sgraded_edge_count(CellConfig::from_pairs(g, {})), 0);
  EXPECT_EQ(sgraded_edge_count(CellConfig::from_pairs(g, {{g.encode(cc(2, 2)), 7}})), 21);
  const CellConfig two = CellConfig::from_pairs(g, {{g.encode(cc(2, 2)), 4}, {g.encode(cc(3, 2)), 5}});
  EXPECT_EQ(sgraded_edge_count(two), 6 + 10 + 20);
}

TEST(SgradedEdges, MatchesPairwiseOracle) {
  for (NormKind kind : {NormKind::L1, NormKind::L2, NormKind::Linf}) {
    const GridModel g = GridModel::build_explicit(NormSpec::make(kind, 2), 4, 16, 1.5);
    for (int rep = 0; rep < 5; ++rep) {
      const CellConfig cfg = sample_cell_config(g, 40 + rep);
      EXPECT_EQ(sgraded_edge_count(cfg), pairwise_oracle(cfg));
    }
  }
}

TEST(ExpectedSgradedEdges, ClosedFormAndMonteCarlo) {
  const GridModel g = GridModel::build_explicit(kLinf1, 3, 50, 2.0);
  EXPECT_NEAR(expected_sgraded_edges(g), 700.0, 1e-9);
  double sum = 0.0;
  const int reps = 10000;
  for (int i = 0; i < reps; ++i) sum += static_cast<double>(sgraded_edge_count(sample_cell_config(g, 900 + i)));
  EXPECT_NEAR(sum / reps / 700.0, 1.0, 0.02);
}

TEST(ExpectedSgradedEdges, DominatesContinuumMean) {
  for (NormKind kind : {NormKind::L1, NormKind::L2, NormKind::Linf}) {
    const ModelParams p = ModelParams::make(2000, 0.02, NormSpec::make(kind, 2), 0.5);
    const GridModel g = GridModel::build(p, 6);
    EXPECT_GE(expected_sgraded_edges(g), expected_edges(p));
  }
}

TEST(Hulls, SingleClosedCell) {
  const GridModel g = GridModel::build_explicit(kL2, 3, 16, 0.5);
  const Box cell{{3.0 / 16, 5.0 / 16}, {1.0 / 16, 1.0 / 16}};
  EXPECT_EQ(inner_hull(cell, g), IndexSet{g.encode(cc(3, 5))});
}

TEST(Hulls, InnerInsideOuterAndMeasures) {
  const GridModel g = GridModel::build_explicit(kL2, 4, 64, 0.5);
  for (double x : {0.1, 0.5, 0.97}) {
    const Ball ball{{x, 0.31}, 0.05};
    const IndexSet in = inner_hull(ball, g), out = outer_hull(ball, g);
    EXPECT_TRUE(is_subset(in, out));
    const double lam = probe_measure(ball, kL2);
    EXPECT_LE(index_union(in, g).measure, lam);
    EXPECT_GE(index_union(out, g).measure, lam);
  }
}

TEST(InscribedBall, CubeAndSingleton) {
  const GridModel g = GridModel::build_explicit(kLinf2, 3, 20, 0.5);
  EXPECT_NEAR(inscribed_ball_diameter({g.encode(cc(4, 4))}, g), 1.0 / 20, 1e-12);
  IndexSet window;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) window.push_back(g.encode(cc(6 + i, 6 + j)));
  std::sort(window.begin(), window.end());
  EXPECT_GE(inscribed_ball_diameter(window, g), 4.0 / 20 - 1e-12);
}

TEST(CellConfigCsv, RoundTrip) {
  const GridModel g = GridModel::build_explicit(kL2, 3, 12, 0.8);
  const CellConfig a = sample_cell_config(g, 4);
  std::stringstream ss;
  write_cell_config_csv(ss, a);
  const CellConfig b = read_cell_config_csv(ss, g);
  EXPECT_EQ(a.index, b.index);
  EXPECT_EQ(a.count, b.count);
}
