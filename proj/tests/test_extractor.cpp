#include <gtest/gtest.h>

#include <cmath>

#include "rggloc/extractor.hpp"
#include "rggloc/samplers.hpp"

using namespace rggloc;

namespace {

const NormSpec kLinf1 = NormSpec::make(NormKind::Linf, 1);

// Hand-set scales so counts like q, 0.6 q and q / tau come out as integers.
DerivedScales hand_scales() {
  DerivedScales sc;
  sc.n = 1e4;
  sc.q = 4000.0;
  sc.tau_s = 4.0;
  sc.D = 0.1;
  sc.M = 2.0;
  sc.xi = 1e-4;
  return sc;
}

GridModel line_grid() { return GridModel::build_explicit(kLinf1, 3, 100, 0.1); }

}  // namespace

TEST(BulkExceedance, ThresholdAtM) {
  const GridModel g = line_grid();
  const DerivedScales sc = hand_scales();
  EXPECT_TRUE(extract_bulk_exceedance(CellConfig::from_pairs(g, {{3, 1}, {9, 2}}), sc).empty());
  EXPECT_EQ(extract_bulk_exceedance(CellConfig::from_pairs(g, {{3, 1}, {9, 4}}), sc), IndexSet{9});
}

TEST(ExtractT, SingleCellCarryingQ) {
  const GridModel g = line_grid();
  const DerivedScales sc = hand_scales();
  const CellConfig cfg = CellConfig::from_pairs(g, {{10, 4000}, {50, 3}});
  EXPECT_EQ(extract_T(cfg, {10, 50}, sc), IndexSet{10});
}

TEST(ExtractT, NeedsBothHalves) {
  const GridModel g = line_grid();
  const DerivedScales sc = hand_scales();
  const CellConfig cfg = CellConfig::from_pairs(g, {{10, 2400}, {60, 2400}});
  EXPECT_EQ(extract_T(cfg, {10, 60}, sc), (IndexSet{10, 60}));
}

TEST(ExtractT, TiesGoToTheSmallerIndex) {
  const GridModel g = line_grid();
  const CellConfig cfg = CellConfig::from_pairs(g, {{40, 7}, {12, 7}, {30, 9}});
  EXPECT_EQ(mass_order(cfg, {12, 30, 40}), (std::vector<std::uint64_t>{30, 12, 40}));
}

TEST(ExtractT, InsufficientMassThrows) {
  const GridModel g = line_grid();
  const DerivedScales sc = hand_scales();
  EXPECT_THROW(extract_T(CellConfig::from_pairs(g, {{10, 100}}), {10}, sc), InsufficientMass);
}

TEST(ExtractP, KeepsVeryLargeCellsOnly) {
  const GridModel g = line_grid();
  const DerivedScales sc = hand_scales();
  // q / tau = 1000, cut = xi^(1/4) * 1000 = 100, straggler at xi^(1/2) * 1000 = 10.
  const CellConfig cfg = CellConfig::from_pairs(g, {{1, 1000}, {2, 1000}, {3, 1000}, {4, 1000}, {7, 10}});
  EXPECT_EQ(extract_P(cfg, {1, 2, 3, 4}, sc), (IndexSet{1, 2, 3, 4}));
  EXPECT_EQ(extract_P(cfg, {1, 2, 3, 4, 7}, sc), (IndexSet{1, 2, 3, 4}));
  EXPECT_TRUE(extract_P(cfg, {}, sc).empty());
}

TEST(CertifyThm2, HandBuiltCliqueAndSplitClique) {
  const GridModel g = line_grid();
  const DerivedScales sc = hand_scales();
  const CellConfig clique = CellConfig::from_pairs(g, {{20, 1000}, {21, 1000}, {22, 1000}, {23, 1000}, {70, 3}});
  const LocalizationReport ok = certify_thm2(clique, g, sc, 0.2);
  EXPECT_TRUE(ok.thm2_pass) << ok.status;
  EXPECT_EQ(ok.cardP, 4);
  EXPECT_EQ(ok.diamP, 3);
  EXPECT_LT(ok.max_dev_inside, 0.2);

  // Two half-cliques at q / (2 tau) per cell, far apart.
  std::vector<std::pair<std::uint64_t, std::int64_t>> pairs;
  for (std::uint64_t i = 0; i < 4; ++i) {
    pairs.push_back({10 + i, 501});
    pairs.push_back({60 + i, 501});
  }
  const LocalizationReport split = certify_thm2(CellConfig::from_pairs(g, pairs), g, sc, 0.2);
  EXPECT_FALSE(split.thm2_pass);
  EXPECT_EQ(split.status, "diameter");
  EXPECT_GT(split.diamP, g.s);
}

TEST(CertifyThm2, ZeroConfigHasInsufficientMass) {
  const GridModel g = line_grid();
  const LocalizationReport rep = certify_thm2(CellConfig::from_pairs(g, {}), g, hand_scales(), 0.2);
  EXPECT_FALSE(rep.thm2_pass);
  EXPECT_EQ(rep.status, "insufficient mass");
}

TEST(CertifyThm2, PlantedPassesUnconditionedFails) {
  const ModelParams p = ModelParams::from_p_target(1e5, 1.0, kLinf1, 0.5);
  const GridModel g = GridModel::build(p, 5);
  const DerivedScales sc = DerivedScales::compute(g, 1.0, 0.5, DerivedScales::xi_from_eps(0.2, g.tau_s));
  PlantOptions po;
  po.mode = PlantMode::Conditioned;
  const PlantPlan plan = plan_planting(g, 1.0, po);
  int planted = 0, nominal = 0;
  for (int i = 0; i < 10; ++i) {
    Rng rng = Rng::stream(31, i);
    const CellConfig cfg = planted_cell_config(g, plan, rng);
    const LocalizationReport rep = certify_thm2(cfg, g, sc, 0.2);
    planted += rep.thm2_pass;
    if (rep.thm2_pass) EXPECT_LT(rep.max_dev_inside, 0.2);
    nominal += certify_thm2(sample_cell_config(g, 500 + i), g, sc, 0.2).thm2_pass;
  }
  EXPECT_GE(planted, 9);
  EXPECT_EQ(nominal, 0);
}

TEST(LocalizationProfile, PartsAddUp) {
  const GridModel g = line_grid();
  const DerivedScales sc = hand_scales();
  const CellConfig cfg = CellConfig::from_pairs(g, {{20, 1000}, {21, 1000}, {22, 1000}, {23, 1000}, {70, 3}, {71, 2}});
  const LocalizationProfile prof = localization_profile(cfg, g, sc, 0.2);
  EXPECT_NEAR(prof.Q_P + prof.Q_P_Pc + prof.Q_Pc, 2.0 * sgraded_edge_count(cfg) / (sc.q * sc.q), 1e-12);
  EXPECT_NEAR(prof.V_P, 1.0, 1e-12);
  ASSERT_FALSE(prof.top_counts.empty());
  EXPECT_EQ(prof.top_counts.front(), 1000);
}

TEST(CertifyThm1, PlantedBallSatisfiesClauseA) {
  const ModelParams p = ModelParams::from_p_target(1e4, 1.0, NormSpec::make(NormKind::L2, 2), 0.5);
  int pass = 0;
  for (int i = 0; i < 10; ++i) {
    const PointSet ps = planted_continuum_sampler(p, 1.0, 70 + i);
    const Thm1Report rep = certify_thm1(ps, p, 8, 1.0, 0.25);
    pass += rep.clause_a_A;
    EXPECT_NEAR(rep.scale, std::sqrt(2.0 * expected_edges(p)), 1e-9);
    EXPECT_NEAR(rep.ratio_A, static_cast<double>(rep.count_A) / rep.scale, 1e-12);
  }
  EXPECT_GE(pass, 9);
}

TEST(CertifyThm1, EmptyPointSetFails) {
  const ModelParams p = ModelParams::from_p_target(1e4, 1.0, NormSpec::make(NormKind::L2, 2), 0.5);
  PointSet empty;
  empty.dim = 2;
  const Thm1Report rep = certify_thm1(empty, p, 8, 1.0, 0.25);
  EXPECT_FALSE(rep.pass());
  EXPECT_EQ(rep.count_A, 0);
}
