#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "rggloc/point_process.hpp"
#include "rggloc/rng.hpp"
#include "rggloc/sgraded.hpp"

namespace rggloc {

// Tilted: Poisson(D') on the planted clique set. Conditioned: Poisson(D)
// conditioned on X_I >= k for every planted cell.
enum class PlantMode { Tilted, Conditioned };

struct PlantOptions {
  PlantMode mode = PlantMode::Tilted;
  bool slack = true;  // include the n^z term
};

// Everything the planted law needs, fixed once per (grid, t, options).
struct PlantPlan {
  double t = 0.0;
  double mu_tilde = 0.0;
  double D = 0.0;
  double D_prime = 0.0;   // (sqrt(2 t mu_tilde) + n^z) / tau_s
  std::int64_t k = 0;     // ceil(D'), the conditioned floor
  double slack = 0.0;     // n^z, or 0 when disabled
  double log_p_floor = 0.0;  // log P(Poisson(D) >= k), one cell
  std::int64_t tau_s = 0;
  PlantMode mode = PlantMode::Tilted;
  bool fallback = false;  // D' <= D: planting is pointless, proposal is nominal
  std::string warning;
};

PlantPlan plan_planting(const GridModel& grid, double t, const PlantOptions& options = {});

struct WeightedSample {
  CellConfig config;
  double log_weight = 0.0;  // log d(nominal)/d(mixture proposal)
  std::uint64_t replica = 0;
  bool planted = false;     // drawn from the planted component
  std::uint64_t anchor = 0; // anchor cell of the planted clique set
};

struct RejectionResult {
  std::vector<CellConfig> accepted;
  std::uint64_t consumed = 0;
  std::uint64_t accepted_count = 0;
  double acceptance_rate = 0.0;
  std::string status;  // "ok" or "no acceptances"
};

// Draws `budget` nominal configs and keeps those with |E_s| >= threshold
// (at most max_keep are stored; accepted_count counts all of them).
RejectionResult rejection_conditional(const GridModel& grid, double threshold, std::uint64_t budget, std::uint64_t seed,
                                      std::size_t max_keep = std::numeric_limits<std::size_t>::max());

// X ~ Poisson(D) conditioned on X >= k, by inverse CDF from k upward.
std::int64_t sample_poisson_at_least(double D, std::int64_t k, Rng& rng);

// Planted configuration only (no weight); anchor is drawn uniformly.
CellConfig planted_cell_config(const GridModel& grid, const PlantPlan& plan, Rng& rng, std::uint64_t* anchor = nullptr);

// log of 1 / (1/2 + 1/2 Lambda(x)), Lambda the planted/nominal density ratio
// averaged over all m^d anchors.
double mixture_log_weight(const CellConfig& cfg, const PlantPlan& plan);

WeightedSample planted_cell_sampler(const GridModel& grid, double t, std::uint64_t seed,
                                    const PlantOptions& options = {});

struct TailEstimate {
  double t = 0.0;
  double threshold = 0.0;
  double log_prob = -std::numeric_limits<double>::infinity();
  double std_err = 0.0;      // probability scale (may underflow to 0)
  double log_std_err = 0.0;  // delta method: std_err / estimate
  std::uint64_t n_replicas = 0;
  std::string method;        // "rejection", "importance" or "exact"
  double ess = 0.0;
  std::uint64_t hits = 0;
  bool unreliable = false;
  double truncation_error = 0.0;
  std::string warning;
};

// P(|E_s| >= (1 + t) mu_tilde) under the half nominal, half planted mixture.
// Replicas alternate between the components.
TailEstimate importance_estimate_tail(const GridModel& grid, double t, std::uint64_t replicas, std::uint64_t seed,
                                      const PlantOptions& options = {});

TailEstimate rejection_tail_estimate(const GridModel& grid, double t, std::uint64_t replicas, std::uint64_t seed);

// Exact P(|E_s| >= threshold) on grids with m^d <= 6 and D <= 5.
TailEstimate exact_tail_tiny(const GridModel& grid, double threshold, std::uint64_t node_budget = 50'000'000);
// Same enumeration on an explicit cell graph: adjacency[a][b] for a != b.
// Cells hold i.i.d. Poisson(D) counts; edges are C(X_a, 2) within a cell and
// X_a X_b across adjacent cells.
double exact_tail_enumerate(const std::vector<std::vector<bool>>& adjacency, double D, double threshold,
                            std::uint64_t node_budget = 50'000'000);

// Number of planted points: ceil(sqrt(2 delta mu) + n^z).
std::int64_t planted_continuum_count(const ModelParams& params, double delta, bool slack = true);

// Nominal PPP plus planted_continuum_count uniform points in the ball of
// diameter r around `center` (default: the middle of the torus).
PointSet planted_continuum_sampler(const ModelParams& params, double delta, std::uint64_t seed,
                                   std::vector<double> center = {}, bool slack = true);

// CSV row: t,n,r,s,norm,method,log_prob,std_err,replicas,seed
void write_tail_csv_header(std::ostream& os);
void write_tail_csv_row(std::ostream& os, const TailEstimate& est, const GridModel& grid, std::uint64_t seed);

}  // namespace rggloc
