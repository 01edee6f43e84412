#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rggloc/point_process.hpp"
#include "rggloc/sgraded.hpp"
#include "rggloc/statistics.hpp"

namespace rggloc {

class InsufficientMass : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LocalizationReport {
  IndexSet frakI;
  IndexSet frakT;
  IndexSet frakP;
  std::int64_t diamP = 0;
  std::int64_t cardP = 0;
  double max_dev_inside = std::numeric_limits<double>::infinity();
  double max_ratio_outside = 0.0;
  std::uint64_t worst_outside_cell = 0;
  std::int64_t worst_outside_count = 0;
  double QP = 0.0;
  double eps_tilde = 0.0;
  double V_frakI = 0.0;
  bool thm2_pass = false;
  // "ok", "insufficient mass", or the first failing clause.
  std::string status;
};

IndexSet extract_bulk_exceedance(const CellConfig& cfg, const DerivedScales& sc);
// Cells of frakI ordered by count (descending), ties by index.
std::vector<std::uint64_t> mass_order(const CellConfig& cfg, const IndexSet& frakI);
IndexSet extract_T(const CellConfig& cfg, const IndexSet& frakI, const DerivedScales& sc);
IndexSet extract_P(const CellConfig& cfg, const IndexSet& frakT, const DerivedScales& sc);

// sc.xi is expected to come from DerivedScales::xi_from_eps(eps_tilde, tau_s).
LocalizationReport certify_thm2(const CellConfig& cfg, const GridModel& grid, const DerivedScales& sc, double eps_tilde);

struct LocalizationProfile {
  double Q_P = 0.0;
  double Q_P_Pc = 0.0;
  double Q_Pc = 0.0;
  double V_P = 0.0;
  double p_hat = 0.0;
  std::vector<std::int64_t> top_counts;  // largest counts, descending
  LocalizationReport report;
};

LocalizationProfile localization_profile(const CellConfig& cfg, const GridModel& grid, const DerivedScales& sc,
                                         double eps_tilde, std::size_t top = 32);

struct ProbeFamilySpec {
  std::vector<double> concentric = {0.9, 0.75, 0.5, 0.35};
  bool offset_balls = true;
  bool inscribed_boxes = true;
  bool half_balls = true;
  bool outside_boxes = true;
};

struct ProbeMargin {
  std::string probe;
  std::int64_t count = 0;
  double measure_ratio = 0.0;  // lambda(S) / tau
  double margin = 0.0;         // positive when the clause holds for this probe
};

struct Thm1Report {
  std::vector<double> center;  // candidate ball A
  double radius = 0.0;
  std::int64_t count_A = 0;
  double scale = 0.0;  // sqrt(2 delta mu)
  double ratio_A = 0.0;  // |chi(A)| / scale
  bool clause_a_A = false;
  bool clause_a = false;
  bool clause_b = false;
  std::size_t probes_a = 0;
  std::size_t probes_b = 0;
  ProbeMargin worst_a;
  ProbeMargin worst_b;
  std::string candidate_source;  // "extractor" or "densest window"
  bool pass() const { return clause_a && clause_b; }
};

// Candidate A: centroid of the points in the localized cells (extractor output
// when it certifies, else the densest clique-shaped window), refined over a
// 5^d grid of centers with spacing r/10.
Thm1Report certify_thm1(const PointSet& ps, const ModelParams& params, int s, double delta, double eps,
                        const ProbeFamilySpec& probes = {});

}  // namespace rggloc
