#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rggloc/point_process.hpp"
#include "rggloc/rng.hpp"
#include "rggloc/torus.hpp"

namespace rggloc {

// Cell coordinates are 0-based. Linear index = ((i0 * m + i1) * m + i2) ...,
// so sorting linear indices sorts cells lexicographically.
using CellCoords = std::array<std::int64_t, kMaxDim>;
// Sorted, duplicate-free linear cell indices.
using IndexSet = std::vector<std::uint64_t>;

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridOptions {
  // Permit m < 2s+3. Only oracle code (tiny exact enumerations) needs this.
  bool allow_coarse = false;
  std::uint64_t clique_node_cap = 10'000'000;
  // Above this many candidate vertices the exact search is skipped and the
  // constructive lower bound is reported instead.
  std::size_t clique_vertex_cap = 2048;
  // Bound on bitset word operations in the colouring bound (roughly 6 s per 1e9).
  std::uint64_t clique_work_cap = 500'000'000;
};

struct CliqueSearch {
  std::int64_t size = 0;
  bool exact = false;
  std::uint64_t nodes = 0;
  std::vector<CellCoords> shape;  // member offsets, origin included
};

class GridModel {
 public:
  static GridModel build(const ModelParams& params, int s, const GridOptions& options = {});
  // Grid given directly by (m, D); r is recorded as s/m. For oracle instances
  // whose m cannot arise from a radius below 1/2.
  static GridModel build_explicit(const NormSpec& norm, int s, std::int64_t m, double D,
                                  const GridOptions& options = {});

  int s = 0;
  std::int64_t m = 0;
  int dim = 0;
  double n = 0.0;
  double r = 0.0;
  double D = 0.0;
  NormSpec norm;
  std::int64_t nbhd_size = 0;
  std::int64_t tau_s = 0;
  bool tau_exact = false;
  std::uint64_t clique_nodes = 0;

  std::uint64_t cells() const { return cells_; }
  bool coarse() const { return m < 2 * s + 3; }
  std::uint64_t encode(const CellCoords& c) const;
  CellCoords decode(std::uint64_t lin) const;
  // Cell c + offset with wraparound.
  std::uint64_t shift(const CellCoords& c, const CellCoords& offset) const;
  // Distinct nonzero offsets J - I with d(I, J) <= s (wrapped representatives).
  const std::vector<CellCoords>& neighbor_offsets() const { return offsets_; }
  // A maximum clique set containing the origin, as offsets.
  const std::vector<CellCoords>& clique_shape() const { return shape_; }

 private:
  void finish(const GridOptions& options);
  std::uint64_t cells_ = 0;
  std::vector<CellCoords> offsets_;
  std::vector<CellCoords> shape_;
};

// Integer cell metric from absolute wrapped per-axis offsets.
std::int64_t metric_from_offsets(const std::int64_t* delta, int dim, NormKind kind);
std::int64_t cell_metric(const CellCoords& a, const CellCoords& b, const GridModel& grid);
std::int64_t cell_metric(std::uint64_t a, std::uint64_t b, const GridModel& grid);
// Minimum of ceil(m * |x - y|) over sampled interior points of both cells.
std::int64_t cell_metric_numeric_oracle(const CellCoords& a, const CellCoords& b, const GridModel& grid,
                                        std::uint64_t samples, Rng& rng);
std::int64_t set_diameter(const IndexSet& set, const GridModel& grid);

IndexSet neighborhood(const CellCoords& cell, const GridModel& grid);

// Maximum cardinality of a set with pairwise cell distance <= s. Cached per
// (norm, d, s); m matters only when the torus is small enough for sets to wrap.
CliqueSearch max_clique_search(const NormSpec& norm, int s, std::int64_t m, const GridOptions& options);
std::int64_t max_clique_set_size(const GridModel& grid);
// All maximum-cardinality sets containing `anchor`. Throws BudgetExceeded when
// the node cap stops the search.
std::vector<IndexSet> enumerate_max_clique_sets(const GridModel& grid, const CellCoords& anchor,
                                                std::uint64_t node_cap = 10'000'000);
IndexSet clique_set_at(const GridModel& grid, std::uint64_t anchor);

// Sparse occupancy vector: strictly positive counts at sorted cell indices.
struct CellConfig {
  const GridModel* grid = nullptr;
  std::vector<std::uint64_t> index;
  std::vector<std::int64_t> count;

  static CellConfig from_pairs(const GridModel& grid, std::vector<std::pair<std::uint64_t, std::int64_t>> pairs);
  std::int64_t at(std::uint64_t lin) const;
  std::int64_t total() const;
  std::size_t support() const { return index.size(); }
  // Replaces the counts of the listed cells (zero removes the cell).
  void overwrite(std::vector<std::pair<std::uint64_t, std::int64_t>> updates);
};

CellConfig coarsen(const PointSet& ps, const GridModel& grid);
CellConfig sample_cell_config(const GridModel& grid, std::uint64_t seed);
CellConfig sample_cell_config(const GridModel& grid, Rng& rng);

std::int64_t sgraded_edge_count(const CellConfig& cfg);
double expected_sgraded_edges(const GridModel& grid);

IndexSet inner_hull(const ConvexProbe& probe, const GridModel& grid);
IndexSet outer_hull(const ConvexProbe& probe, const GridModel& grid);

struct RegionDescriptor {
  IndexSet cells;
  double cell_side = 0.0;
  double measure = 0.0;
};
RegionDescriptor index_union(const IndexSet& set, const GridModel& grid);

// Largest diameter of a ball inside the union of the cells, with centers on a
// sub-grid of 8 points per cell per axis. Throws on an empty set.
double inscribed_ball_diameter(const IndexSet& set, const GridModel& grid);

// CSV rows "i0,...,i{d-1},count" for nonzero cells after a header row.
void write_cell_config_csv(std::ostream& os, const CellConfig& cfg);
CellConfig read_cell_config_csv(std::istream& is, const GridModel& grid);

IndexSet set_union(const IndexSet& a, const IndexSet& b);
IndexSet set_difference(const IndexSet& a, const IndexSet& b);
bool set_contains(const IndexSet& set, std::uint64_t lin);
bool is_subset(const IndexSet& inner, const IndexSet& outer);

}  // namespace rggloc
