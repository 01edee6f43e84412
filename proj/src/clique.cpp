// Maximum clique sets of the cell metric: a constructive lower bound from the
// cells meeting an open ball of diameter s, then bitset branch and bound with
// a greedy colouring bound on the neighbourhood of the origin.
#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <tuple>

#include "rggloc/sgraded.hpp"

namespace rggloc {

namespace {

using Bits = std::vector<std::uint64_t>;

struct Frame {
  NormKind kind;
  int dim;
  int s;
  std::int64_t m;  // 0 means the integer lattice (no wrap)

  std::int64_t metric(const CellCoords& a, const CellCoords& b) const {
    std::int64_t delta[kMaxDim];
    for (int k = 0; k < dim; ++k) {
      std::int64_t d = std::llabs(a[k] - b[k]);
      if (m > 0) {
        d %= m;
        d = std::min(d, m - d);
      }
      delta[k] = d;
    }
    return metric_from_offsets(delta, dim, kind);
  }
  bool compatible(const CellCoords& a, const CellCoords& b) const { return metric(a, b) <= s; }
  CellCoords canon(CellCoords c) const {
    if (m > 0) {
      for (int k = 0; k < dim; ++k) c[k] = ((c[k] % m) + m) % m;
    }
    return c;
  }
};

bool lex_positive(const CellCoords& c, int dim) {
  for (int k = 0; k < dim; ++k) {
    if (c[k] > 0) return true;
    if (c[k] < 0) return false;
  }
  return false;
}

// All cells J (offsets from the origin) with d(0, J) <= s, origin excluded.
std::vector<CellCoords> window(const Frame& f) {
  std::vector<CellCoords> out;
  const std::int64_t reach = f.s + 1;
  CellCoords off{}, zero{};
  for (int k = 0; k < f.dim; ++k) off[k] = -reach;
  std::map<CellCoords, bool> seen;
  for (;;) {
    CellCoords c = f.canon(off);
    if (c != zero && f.compatible(zero, c) && !seen.count(c)) {
      seen[c] = true;
      out.push_back(c);
    }
    int k = f.dim - 1;
    for (; k >= 0; --k) {
      if (++off[k] <= reach) break;
      off[k] = -reach;
    }
    if (k < 0) break;
  }
  return out;
}

// Closed box [J, J+1] distance from point c under the norm, in cell units.
double box_distance(const double* c, const CellCoords& j, const NormSpec& norm) {
  double diff[kMaxDim];
  for (int k = 0; k < norm.dim; ++k) {
    const double lo = static_cast<double>(j[k]);
    const double hi = lo + 1.0;
    diff[k] = c[k] < lo ? lo - c[k] : (c[k] > hi ? c[k] - hi : 0.0);
  }
  return norm.of(diff);
}

// Cells meeting the open ball of diameter s are pairwise at cell distance <= s.
// Sweep the ball center over a sub-cell grid, keep the largest set, then add
// any remaining compatible cells greedily.
std::vector<CellCoords> constructive_clique(const Frame& f, const std::vector<CellCoords>& win) {
  const NormSpec norm = NormSpec::make(f.kind, f.dim);
  const double radius = f.s / 2.0;
  const int sub = 8;
  int total = 1;
  for (int k = 0; k < f.dim; ++k) total *= sub;
  const std::int64_t reach = f.s / 2 + 2;
  std::vector<CellCoords> best;
  for (int code = 0; code < total; ++code) {
    double c[kMaxDim];
    int rest = code;
    for (int k = 0; k < f.dim; ++k) {
      // Generic offsets avoid ties on cell faces.
      c[k] = (rest % sub + 0.5) / sub + 1e-3 * (k + 1);
      rest /= sub;
    }
    std::vector<CellCoords> members;
    CellCoords j{};
    for (int k = 0; k < f.dim; ++k) j[k] = -reach;
    for (;;) {
      if (box_distance(c, j, norm) < radius) members.push_back(j);
      int k = f.dim - 1;
      for (; k >= 0; --k) {
        if (++j[k] <= reach) break;
        j[k] = -reach;
      }
      if (k < 0) break;
    }
    if (members.size() > best.size()) best = std::move(members);
  }
  // Translate so the lexicographically smallest member is the origin.
  std::sort(best.begin(), best.end());
  const CellCoords base = best.front();
  for (auto& c : best) {
    for (int k = 0; k < f.dim; ++k) c[k] -= base[k];
    c = f.canon(c);
  }
  std::sort(best.begin(), best.end());
  best.erase(std::unique(best.begin(), best.end()), best.end());
  // Greedy augmentation from the origin's neighbourhood.
  if (win.size() * best.size() <= 50'000'000ULL) {
    std::map<CellCoords, bool> in;
    for (const auto& c : best) in[c] = true;
    for (const auto& cand : win) {
      if (in.count(cand)) continue;
      bool ok = true;
      for (const auto& c : best) {
        if (!f.compatible(c, cand)) {
          ok = false;
          break;
        }
      }
      if (ok) {
        best.push_back(cand);
        in[cand] = true;
      }
    }
  }
  return best;
}

struct BranchAndBound {
  int n = 0;
  int words = 0;
  std::vector<std::uint64_t> adj;
  std::uint64_t cap = 0;
  std::uint64_t work_cap = 0;  // bitset word operations spent on colouring
  std::uint64_t nodes = 0;
  std::uint64_t work = 0;
  bool aborted = false;
  bool enumerate = false;
  std::size_t target = 0;  // enumeration: record cliques of exactly this size
  std::size_t best = 0;    // optimisation: size to beat
  std::vector<int> best_set;
  std::vector<int> current;
  std::vector<std::vector<int>> found;

  const std::uint64_t* row(int v) const { return adj.data() + static_cast<std::size_t>(v) * words; }

  void expand(Bits P) {
    if (aborted) return;
    if (++nodes > cap || work > work_cap) {
      aborted = true;
      return;
    }
    std::vector<int> order;
    std::vector<int> colour;
    Bits U = P, Q(words);
    int k = 0;
    for (;;) {
      bool any = false;
      for (auto w : U) any |= (w != 0);
      if (!any) break;
      ++k;
      Q = U;
      for (int wi = 0; wi < words; ++wi) {
        while (Q[wi]) {
          const int v = wi * 64 + std::countr_zero(Q[wi]);
          Q[wi] &= Q[wi] - 1;
          U[wi] &= ~(std::uint64_t{1} << (v % 64));
          const std::uint64_t* a = row(v);
          for (int x = wi; x < words; ++x) Q[x] &= ~a[x];
          order.push_back(v);
          colour.push_back(k);
        }
      }
    }
    work += order.size() * static_cast<std::uint64_t>(words);
    for (std::size_t i = order.size(); i-- > 0;) {
      const std::size_t bound = current.size() + static_cast<std::size_t>(colour[i]);
      if (enumerate ? bound < target : bound <= best) return;
      const int v = order[i];
      current.push_back(v);
      Bits next(words);
      bool any = false;
      const std::uint64_t* a = row(v);
      for (int x = 0; x < words; ++x) {
        next[x] = P[x] & a[x];
        any |= next[x] != 0;
      }
      if (!any) {
        if (enumerate) {
          if (current.size() == target) found.push_back(current);
        } else if (current.size() > best) {
          best = current.size();
          best_set = current;
        }
      } else {
        expand(std::move(next));
      }
      current.pop_back();
      P[v / 64] &= ~(std::uint64_t{1} << (v % 64));
      if (aborted) return;
    }
  }
};

BranchAndBound make_graph(const Frame& f, const std::vector<CellCoords>& verts) {
  BranchAndBound bb;
  bb.n = static_cast<int>(verts.size());
  bb.words = (bb.n + 63) / 64;
  bb.adj.assign(static_cast<std::size_t>(bb.n) * bb.words, 0);
  for (int i = 0; i < bb.n; ++i) {
    for (int j = i + 1; j < bb.n; ++j) {
      if (f.compatible(verts[i], verts[j])) {
        bb.adj[static_cast<std::size_t>(i) * bb.words + j / 64] |= std::uint64_t{1} << (j % 64);
        bb.adj[static_cast<std::size_t>(j) * bb.words + i / 64] |= std::uint64_t{1} << (i % 64);
      }
    }
  }
  return bb;
}

// Reorders vertices by nonincreasing degree; colouring in this order gives
// tighter bounds.
std::vector<CellCoords> degree_order(const Frame& f, std::vector<CellCoords> verts) {
  std::vector<std::pair<int, std::size_t>> deg(verts.size());
  for (std::size_t i = 0; i < verts.size(); ++i) {
    int d = 0;
    for (std::size_t j = 0; j < verts.size(); ++j) {
      if (i != j && f.compatible(verts[i], verts[j])) ++d;
    }
    deg[i] = {-d, i};
  }
  std::sort(deg.begin(), deg.end());
  std::vector<CellCoords> out;
  out.reserve(verts.size());
  for (const auto& [d, i] : deg) out.push_back(verts[i]);
  return out;
}

Frame frame_for(NormKind kind, int dim, int s, std::int64_t m) {
  // With m > 3s + 1, every set of pairwise distance <= s containing the origin
  // embeds in the integer lattice with the same offsets, so wraparound can be
  // ignored and the lexicographic-minimum member fixed at the origin.
  return Frame{kind, dim, s, m > 3 * static_cast<std::int64_t>(s) + 1 ? 0 : m};
}

CliqueSearch solve(const Frame& f, const GridOptions& options) {
  const std::vector<CellCoords> win = window(f);
  std::vector<CellCoords> seed = constructive_clique(f, win);
  CliqueSearch out;
  out.size = static_cast<std::int64_t>(seed.size());
  out.shape = seed;

  std::vector<CellCoords> verts;
  for (const auto& c : win) {
    if (f.m != 0 || lex_positive(c, f.dim)) verts.push_back(c);
  }
  if (verts.size() > options.clique_vertex_cap) return out;
  verts = degree_order(f, std::move(verts));
  BranchAndBound bb = make_graph(f, verts);
  bb.cap = options.clique_node_cap;
  bb.work_cap = options.clique_work_cap;
  bb.best = seed.size() - 1;
  Bits all(bb.words, 0);
  for (int v = 0; v < bb.n; ++v) all[v / 64] |= std::uint64_t{1} << (v % 64);
  if (bb.n > 0) bb.expand(all);
  out.nodes = bb.nodes;
  out.exact = !bb.aborted;
  if (!bb.best_set.empty() && bb.best + 1 > seed.size()) {
    out.size = static_cast<std::int64_t>(bb.best + 1);
    out.shape.assign(1, CellCoords{});
    for (int v : bb.best_set) out.shape.push_back(verts[v]);
    std::sort(out.shape.begin(), out.shape.end());
  }
  return out;
}

}  // namespace

CliqueSearch max_clique_search(const NormSpec& norm, int s, std::int64_t m, const GridOptions& options) {
  const Frame f = frame_for(norm.kind, norm.dim, s, m);
  using Key = std::tuple<int, int, int, std::int64_t, std::uint64_t, std::size_t, std::uint64_t>;
  static std::mutex mutex;
  static std::map<Key, CliqueSearch> cache;
  const Key key{static_cast<int>(norm.kind), norm.dim, s, f.m, options.clique_node_cap, options.clique_vertex_cap,
                options.clique_work_cap};
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  CliqueSearch result = solve(f, options);
  std::lock_guard<std::mutex> lock(mutex);
  cache.emplace(key, result);
  return result;
}

std::vector<IndexSet> enumerate_max_clique_sets(const GridModel& grid, const CellCoords& anchor,
                                                std::uint64_t node_cap) {
  // Torus frame without symmetry breaking: every member of a set containing
  // the anchor lies in the anchor's neighbourhood.
  const Frame f{grid.norm.kind, grid.dim, grid.s, grid.m};
  std::vector<CellCoords> verts = degree_order(f, window(f));
  BranchAndBound bb = make_graph(f, verts);
  bb.cap = node_cap;
  bb.work_cap = std::numeric_limits<std::uint64_t>::max();
  bb.enumerate = true;
  bb.target = static_cast<std::size_t>(grid.tau_s - 1);
  std::vector<IndexSet> out;
  if (bb.target == 0) {
    out.push_back(IndexSet{grid.encode(anchor)});
    return out;
  }
  Bits all(bb.words, 0);
  for (int v = 0; v < bb.n; ++v) all[v / 64] |= std::uint64_t{1} << (v % 64);
  bb.expand(all);
  if (bb.aborted) throw BudgetExceeded("enumerate_max_clique_sets: node cap reached");
  for (const auto& members : bb.found) {
    IndexSet set{grid.encode(anchor)};
    for (int v : members) set.push_back(grid.shift(anchor, verts[v]));
    std::sort(set.begin(), set.end());
    out.push_back(std::move(set));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace rggloc
