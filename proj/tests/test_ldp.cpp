#include <gtest/gtest.h>

#include <cmath>

#include "rggloc/ldp.hpp"

using namespace rggloc;

namespace {

const NormSpec kLinf1 = NormSpec::make(NormKind::Linf, 1);

}  // namespace

TEST(RateFunction, ReferenceValueAndShape) {
  EXPECT_NEAR(rate_function(1.0, 1.0), std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_NEAR(rate_function(1.0, 1.0), 0.70711, 1e-5);
  EXPECT_LT(rate_function(3.0, 2.0 - 1e-9), 1e-8);
  double prev = 0.0;
  for (double t = 0.1; t < 5.0; t += 0.1) {
    const double v = rate_function(t, 0.8);
    EXPECT_GT(v, prev);
    prev = v;
  }
  EXPECT_THROW(rate_function(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(rate_function(1.0, 2.0), std::invalid_argument);
}

TEST(NormalizedTail, ScalesByRootMuLogN) {
  TailEstimate est;
  est.log_prob = 0.0;
  EXPECT_EQ(normalized_log_tail(est, 100.0, 1000.0).value, 0.0);
  est.log_prob = -50.0;
  est.log_std_err = 0.5;
  const NormalizedTail nt = normalized_log_tail(est, 100.0, 1000.0);
  EXPECT_NEAR(nt.value, -50.0 / (10.0 * std::log(1000.0)), 1e-15);
  EXPECT_NEAR(nt.std_err, 0.5 / (10.0 * std::log(1000.0)), 1e-15);
}

TEST(Sandwich, LowerBelowUpperOnAGrid) {
  for (double n : {1e3, 3e3, 1e4, 3e4, 1e5}) {
    const ModelParams p = ModelParams::from_p_target(n, 1.0, kLinf1, 0.5);
    const GridModel g = GridModel::build(p, 5);
    for (double t : {0.25, 0.5, 1.0, 2.0}) {
      const SandwichBound b = sandwich_bounds(p, g, t, 0.1);
      EXPECT_LE(b.lower_log, b.upper_log) << "n=" << n << " t=" << t;
      EXPECT_LE(b.upper_log, 0.0);
    }
  }
}

TEST(Sandwich, ComponentsFollowTheirDefinitions) {
  const ModelParams p = ModelParams::from_p_target(1e4, 1.0, kLinf1, 0.5);
  const GridModel g = GridModel::build(p, 5);
  const SandwichBound b = sandwich_bounds(p, g, 1.0, 0.1);
  const auto& c = b.components;
  EXPECT_NEAR(c.excess, std::sqrt(2.0 * expected_edges(p)), 1e-9);
  EXPECT_NEAR(c.log_clique_sets, g.tau_s * std::log(static_cast<double>(g.m)), 1e-9);
  EXPECT_NEAR(c.upper_threshold, 0.9 * c.excess, 1e-9);
  EXPECT_NEAR(b.lower_log, std::log(0.9) + c.log_lower_pmf, 1e-12);
  EXPECT_EQ(c.lower_count, static_cast<std::int64_t>(std::ceil(c.excess + c.slack)));
  // Smaller eps moves the upper threshold toward sqrt(2 t mu).
  EXPECT_NEAR(sandwich_bounds(p, g, 1.0, 1e-9).components.upper_threshold, c.excess, 1e-6);
  EXPECT_THROW(sandwich_bounds(p, g, 1.0, 0.5), std::invalid_argument);
}

TEST(Sandwich, NormalizedBracketNarrowsWithN) {
  double prev = INFINITY;
  for (double n : {1e3, 1e4, 1e5, 1e6}) {
    const ModelParams p = ModelParams::from_p_target(n, 1.0, kLinf1, 0.5);
    const GridModel g = GridModel::build(p, 5);
    const SandwichBound b = sandwich_bounds(p, g, 1.0, 0.1);
    const double speed = std::sqrt(expected_edges(p)) * std::log(p.n);
    const double width = (b.upper_log - b.lower_log) / speed;
    EXPECT_LT(width, prev) << "n=" << n;
    prev = width;
  }
}
