#include "rggloc/sgraded.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "rggloc/detail_lookup.hpp"

namespace rggloc {

namespace detail {

namespace {
thread_local std::vector<std::vector<std::int64_t>*> scratch_pool;
}

std::vector<std::int64_t>* acquire_scratch(std::uint64_t size) {
  std::vector<std::int64_t>* buf;
  if (scratch_pool.empty()) {
    buf = new std::vector<std::int64_t>();
  } else {
    buf = scratch_pool.back();
    scratch_pool.pop_back();
  }
  if (buf->size() < size) buf->assign(size, 0);
  return buf;
}

void release_scratch(std::vector<std::int64_t>* buf) { scratch_pool.push_back(buf); }

CountLookup::CountLookup(const CellConfig& cfg) { init(*cfg.grid, cfg.index, cfg.count); }

CountLookup::CountLookup(const GridModel& grid, const std::vector<std::uint64_t>& index,
                         const std::vector<std::int64_t>& count) {
  init(grid, index, count);
}

void CountLookup::init(const GridModel& grid, const std::vector<std::uint64_t>& index,
                       const std::vector<std::int64_t>& count) {
  if (grid.cells() <= kDenseLimit) {
    dense_ = acquire_scratch(grid.cells());
    touched_ = &index;
    for (std::size_t k = 0; k < index.size(); ++k) (*dense_)[index[k]] = count[k];
  } else {
    sparse_.reserve(index.size() * 2);
    for (std::size_t k = 0; k < index.size(); ++k) sparse_.emplace(index[k], count[k]);
  }
}

CountLookup::~CountLookup() {
  if (dense_) {
    for (std::uint64_t lin : *touched_) (*dense_)[lin] = 0;
    release_scratch(dense_);
  }
}

}  // namespace detail

std::int64_t metric_from_offsets(const std::int64_t* delta, int dim, NormKind kind) {
  bool same = true;
  std::int64_t g[kMaxDim];
  for (int k = 0; k < dim; ++k) {
    if (delta[k] != 0) same = false;
    g[k] = std::max<std::int64_t>(delta[k] - 1, 0);
  }
  if (same) return 0;
  std::int64_t floor_norm = 0;
  switch (kind) {
    case NormKind::L1:
      for (int k = 0; k < dim; ++k) floor_norm += g[k];
      break;
    case NormKind::Linf:
      for (int k = 0; k < dim; ++k) floor_norm = std::max(floor_norm, g[k]);
      break;
    case NormKind::L2: {
      std::int64_t sq = 0;
      for (int k = 0; k < dim; ++k) sq += g[k] * g[k];
      auto root = static_cast<std::int64_t>(std::sqrt(static_cast<double>(sq)));
      while (root * root > sq) --root;
      while ((root + 1) * (root + 1) <= sq) ++root;
      floor_norm = root;
      break;
    }
  }
  return floor_norm + 1;
}

namespace {

std::int64_t wrapped_abs(std::int64_t a, std::int64_t b, std::int64_t m) {
  std::int64_t diff = (a - b) % m;
  if (diff < 0) diff += m;
  return std::min(diff, m - diff);
}

std::int64_t mod(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

std::uint64_t GridModel::encode(const CellCoords& c) const {
  std::uint64_t lin = 0;
  for (int k = 0; k < dim; ++k) lin = lin * static_cast<std::uint64_t>(m) + static_cast<std::uint64_t>(c[k]);
  return lin;
}

CellCoords GridModel::decode(std::uint64_t lin) const {
  CellCoords c{};
  const auto mm = static_cast<std::uint64_t>(m);
  for (int k = dim - 1; k >= 0; --k) {
    c[k] = static_cast<std::int64_t>(lin % mm);
    lin /= mm;
  }
  return c;
}

std::uint64_t GridModel::shift(const CellCoords& c, const CellCoords& offset) const {
  std::uint64_t lin = 0;
  for (int k = 0; k < dim; ++k) {
    lin = lin * static_cast<std::uint64_t>(m) + static_cast<std::uint64_t>(mod(c[k] + offset[k], m));
  }
  return lin;
}

GridModel GridModel::build(const ModelParams& params, int s, const GridOptions& options) {
  if (s < 1) throw std::invalid_argument("grid scale s must be positive");
  GridModel g;
  g.s = s;
  g.dim = params.norm.dim;
  g.norm = params.norm;
  g.n = params.n;
  g.r = params.r;
  // The relative guard keeps m = s/r when s/r is an integer that rounding
  // pushed just below (for example 5 / 0.1).
  g.m = static_cast<std::int64_t>(std::floor(s / params.r * (1.0 + 1e-12)));
  if (g.m < 1) throw std::invalid_argument("grid has no cells (r > s)");
  g.finish(options);
  return g;
}

GridModel GridModel::build_explicit(const NormSpec& norm, int s, std::int64_t m, double D, const GridOptions& options) {
  if (s < 1) throw std::invalid_argument("grid scale s must be positive");
  if (m < 1) throw std::invalid_argument("grid needs m >= 1");
  if (!(D > 0.0)) throw std::invalid_argument("cell mean D must be positive");
  GridModel g;
  g.s = s;
  g.dim = norm.dim;
  g.norm = norm;
  g.m = m;
  g.r = static_cast<double>(s) / static_cast<double>(m);
  g.finish(options);
  g.D = D;
  g.n = D * static_cast<double>(g.cells_);
  return g;
}

void GridModel::finish(const GridOptions& options) {
  GridModel& g = *this;
  if (s < 3 && !options.allow_coarse) throw std::invalid_argument("grid scale s must be at least 3");
  if (g.coarse() && !options.allow_coarse) {
    std::ostringstream os;
    os << "grid too coarse: m=" << g.m << " < 2s+3=" << 2 * s + 3;
    throw std::invalid_argument(os.str());
  }
  long double cells = std::pow(static_cast<long double>(g.m), g.dim);
  if (cells > 4.0e18L) throw std::invalid_argument("grid has too many cells");
  g.cells_ = 1;
  for (int k = 0; k < g.dim; ++k) g.cells_ *= static_cast<std::uint64_t>(g.m);
  g.D = g.n / static_cast<double>(g.cells_);

  // Distinct wrapped offsets within the window of radius s+1 per axis.
  const std::int64_t reach = std::min<std::int64_t>(s + 1, g.m);
  std::set<std::uint64_t> seen;
  CellCoords off{};
  CellCoords lo{};
  for (int k = 0; k < g.dim; ++k) off[k] = lo[k] = -reach;
  for (;;) {
    std::int64_t delta[kMaxDim];
    CellCoords canon{};
    bool zero = true;
    for (int k = 0; k < g.dim; ++k) {
      delta[k] = wrapped_abs(off[k], 0, g.m);
      canon[k] = mod(off[k], g.m);
      if (canon[k] != 0) zero = false;
    }
    if (!zero && metric_from_offsets(delta, g.dim, g.norm.kind) <= s) {
      if (seen.insert(g.encode(canon)).second) {
        // Keep the small signed representative for readability.
        CellCoords rep{};
        for (int k = 0; k < g.dim; ++k) rep[k] = g.coarse() ? canon[k] : off[k];
        g.offsets_.push_back(rep);
      }
    }
    int k = g.dim - 1;
    for (; k >= 0; --k) {
      if (++off[k] <= reach) break;
      off[k] = lo[k];
    }
    if (k < 0) break;
  }
  g.nbhd_size = static_cast<std::int64_t>(g.offsets_.size()) + 1;

  CliqueSearch clique = max_clique_search(g.norm, s, g.m, options);
  g.tau_s = clique.size;
  g.tau_exact = clique.exact;
  g.clique_nodes = clique.nodes;
  g.shape_ = clique.shape;
}

std::int64_t cell_metric(const CellCoords& a, const CellCoords& b, const GridModel& grid) {
  std::int64_t delta[kMaxDim];
  for (int k = 0; k < grid.dim; ++k) {
    if (a[k] < 0 || a[k] >= grid.m || b[k] < 0 || b[k] >= grid.m) {
      throw std::invalid_argument("cell_metric: index out of range");
    }
    delta[k] = wrapped_abs(a[k], b[k], grid.m);
  }
  return metric_from_offsets(delta, grid.dim, grid.norm.kind);
}

std::int64_t cell_metric(std::uint64_t a, std::uint64_t b, const GridModel& grid) {
  return cell_metric(grid.decode(a), grid.decode(b), grid);
}

std::int64_t cell_metric_numeric_oracle(const CellCoords& a, const CellCoords& b, const GridModel& grid,
                                        std::uint64_t samples, Rng& rng) {
  const int d = grid.dim;
  const double m = static_cast<double>(grid.m);
  // Coordinates within a cell: a third uniform, a third hugging each face, so
  // facing corners get sampled often enough to reach the infimum.
  auto coordinate = [&](std::int64_t i) {
    const double u = rng.uniform();
    const double eta = 1e-9 + 0.01 * rng.uniform();
    double frac;
    if (u < 1.0 / 3.0) {
      frac = 1e-9 + (1.0 - 2e-9) * rng.uniform();
    } else if (u < 2.0 / 3.0) {
      frac = eta;
    } else {
      frac = 1.0 - eta;
    }
    return (static_cast<double>(i) + frac) / m;
  };
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  std::vector<double> x(d), y(d);
  for (std::uint64_t t = 0; t < samples; ++t) {
    for (int k = 0; k < d; ++k) {
      x[k] = coordinate(a[k]);
      y[k] = coordinate(b[k]);
    }
    const auto v = static_cast<std::int64_t>(std::ceil(m * torus_distance(x, y, grid.norm)));
    best = std::min(best, v);
  }
  if (a == b) best = 0;
  return best;
}

std::int64_t set_diameter(const IndexSet& set, const GridModel& grid) {
  std::vector<CellCoords> coords;
  coords.reserve(set.size());
  for (auto lin : set) coords.push_back(grid.decode(lin));
  std::int64_t diam = 0;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    for (std::size_t j = i + 1; j < coords.size(); ++j) diam = std::max(diam, cell_metric(coords[i], coords[j], grid));
  }
  return diam;
}

IndexSet neighborhood(const CellCoords& cell, const GridModel& grid) {
  IndexSet out;
  out.reserve(grid.neighbor_offsets().size() + 1);
  out.push_back(grid.encode(cell));
  for (const auto& off : grid.neighbor_offsets()) out.push_back(grid.shift(cell, off));
  std::sort(out.begin(), out.end());
  return out;
}

std::int64_t max_clique_set_size(const GridModel& grid) { return grid.tau_s; }

IndexSet clique_set_at(const GridModel& grid, std::uint64_t anchor) {
  const CellCoords a = grid.decode(anchor);
  IndexSet out;
  out.reserve(grid.clique_shape().size());
  for (const auto& off : grid.clique_shape()) out.push_back(grid.shift(a, off));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

CellConfig CellConfig::from_pairs(const GridModel& grid, std::vector<std::pair<std::uint64_t, std::int64_t>> pairs) {
  std::sort(pairs.begin(), pairs.end());
  CellConfig cfg;
  cfg.grid = &grid;
  for (const auto& [lin, c] : pairs) {
    if (c < 0) throw std::invalid_argument("cell counts must be nonnegative");
    if (lin >= grid.cells()) throw std::invalid_argument("cell index out of range");
    if (!cfg.index.empty() && cfg.index.back() == lin) {
      cfg.count.back() += c;
    } else if (c > 0) {
      cfg.index.push_back(lin);
      cfg.count.push_back(c);
    }
  }
  // Drop cells that merged to zero (only possible with explicit zeros first).
  for (std::size_t k = cfg.index.size(); k-- > 0;) {
    if (cfg.count[k] == 0) {
      cfg.index.erase(cfg.index.begin() + static_cast<std::ptrdiff_t>(k));
      cfg.count.erase(cfg.count.begin() + static_cast<std::ptrdiff_t>(k));
    }
  }
  return cfg;
}

std::int64_t CellConfig::at(std::uint64_t lin) const {
  auto it = std::lower_bound(index.begin(), index.end(), lin);
  if (it == index.end() || *it != lin) return 0;
  return count[static_cast<std::size_t>(it - index.begin())];
}

std::int64_t CellConfig::total() const {
  std::int64_t t = 0;
  for (auto c : count) t += c;
  return t;
}

void CellConfig::overwrite(std::vector<std::pair<std::uint64_t, std::int64_t>> updates) {
  std::sort(updates.begin(), updates.end());
  std::vector<std::uint64_t> idx;
  std::vector<std::int64_t> cnt;
  idx.reserve(index.size() + updates.size());
  cnt.reserve(index.size() + updates.size());
  std::size_t a = 0, b = 0;
  while (a < index.size() || b < updates.size()) {
    if (b == updates.size() || (a < index.size() && index[a] < updates[b].first)) {
      idx.push_back(index[a]);
      cnt.push_back(count[a]);
      ++a;
    } else {
      const auto lin = updates[b].first;
      if (a < index.size() && index[a] == lin) ++a;
      // Later duplicates of the same cell win.
      while (b + 1 < updates.size() && updates[b + 1].first == lin) ++b;
      if (updates[b].second > 0) {
        idx.push_back(lin);
        cnt.push_back(updates[b].second);
      }
      ++b;
    }
  }
  index = std::move(idx);
  count = std::move(cnt);
}

namespace {

CellConfig from_sorted_keys(const GridModel& grid, std::vector<std::uint64_t>& keys) {
  std::sort(keys.begin(), keys.end());
  CellConfig cfg;
  cfg.grid = &grid;
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i;
    while (j < keys.size() && keys[j] == keys[i]) ++j;
    cfg.index.push_back(keys[i]);
    cfg.count.push_back(static_cast<std::int64_t>(j - i));
    i = j;
  }
  return cfg;
}

}  // namespace

CellConfig coarsen(const PointSet& ps, const GridModel& grid) {
  if (ps.dim != grid.dim) throw std::invalid_argument("coarsen: dimension mismatch");
  std::vector<std::uint64_t> keys;
  keys.reserve(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    auto p = ps.point(i);
    CellCoords c{};
    for (int k = 0; k < grid.dim; ++k) {
      c[k] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(p[k] * grid.m)), 0, grid.m - 1);
    }
    keys.push_back(grid.encode(c));
  }
  return from_sorted_keys(grid, keys);
}

CellConfig sample_cell_config(const GridModel& grid, Rng& rng) {
  // Poissonization: a Poisson(n) total spread uniformly over cells has i.i.d.
  // Poisson(D) cell counts, and costs O(n log n) rather than O(m^d).
  const std::int64_t total = rng.poisson(grid.D * static_cast<double>(grid.cells()));
  std::vector<std::uint64_t> keys(static_cast<std::size_t>(total));
  for (auto& k : keys) k = rng.below(grid.cells());
  return from_sorted_keys(grid, keys);
}

CellConfig sample_cell_config(const GridModel& grid, std::uint64_t seed) {
  Rng rng(mix64(seed));
  return sample_cell_config(grid, rng);
}

std::int64_t sgraded_edge_count(const CellConfig& cfg) {
  const GridModel& grid = *cfg.grid;
  detail::CountLookup look(cfg);
  __int128 self = 0;
  __int128 cross = 0;
  const auto& offsets = grid.neighbor_offsets();
  for (std::size_t k = 0; k < cfg.index.size(); ++k) {
    const __int128 x = cfg.count[k];
    self += x * (x - 1) / 2;
    const CellCoords c = grid.decode(cfg.index[k]);
    __int128 acc = 0;
    for (const auto& off : offsets) acc += look.get(grid.shift(c, off));
    cross += x * acc;
  }
  const __int128 total = self + cross / 2;
  if (total > std::numeric_limits<std::int64_t>::max()) throw std::overflow_error("s-graded edge count overflows int64");
  return static_cast<std::int64_t>(total);
}

double expected_sgraded_edges(const GridModel& grid) {
  return static_cast<double>(grid.nbhd_size) * grid.n * grid.n / (2.0 * static_cast<double>(grid.cells()));
}

void write_cell_config_csv(std::ostream& os, const CellConfig& cfg) {
  const GridModel& grid = *cfg.grid;
  for (int k = 0; k < grid.dim; ++k) os << 'i' << k << ',';
  os << "count\n";
  for (std::size_t j = 0; j < cfg.index.size(); ++j) {
    const CellCoords c = grid.decode(cfg.index[j]);
    for (int k = 0; k < grid.dim; ++k) os << c[k] << ',';
    os << cfg.count[j] << '\n';
  }
}

CellConfig read_cell_config_csv(std::istream& is, const GridModel& grid) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("i0,", 0) != 0) throw std::runtime_error("cell config CSV: missing header");
  std::vector<std::pair<std::uint64_t, std::int64_t>> pairs;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::int64_t> vals;
    while (std::getline(row, cell, ',')) vals.push_back(std::stoll(cell));
    if (vals.size() != static_cast<std::size_t>(grid.dim) + 1) throw std::runtime_error("cell config CSV: bad row");
    CellCoords c{};
    for (int k = 0; k < grid.dim; ++k) {
      if (vals[k] < 0 || vals[k] >= grid.m) throw std::runtime_error("cell config CSV: index out of range");
      c[k] = vals[k];
    }
    pairs.emplace_back(grid.encode(c), vals.back());
  }
  return CellConfig::from_pairs(grid, std::move(pairs));
}

IndexSet set_union(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool set_contains(const IndexSet& set, std::uint64_t lin) { return std::binary_search(set.begin(), set.end(), lin); }

bool is_subset(const IndexSet& inner, const IndexSet& outer) {
  return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

}  // namespace rggloc
