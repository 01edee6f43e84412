#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "rggloc/sgraded.hpp"

namespace rggloc {

namespace {

// A probe expressed in unwrapped coordinates around a reference point, with
// the integer cell window that can meet it.
struct UnwrappedProbe {
  int dim = 0;
  bool has_ball = false;
  bool has_box = false;
  double center[kMaxDim] = {};
  double radius = 0.0;
  double lo[kMaxDim] = {};
  double hi[kMaxDim] = {};
  std::int64_t first[kMaxDim] = {};
  std::int64_t last[kMaxDim] = {};
};

UnwrappedProbe unwrap(const ConvexProbe& probe, const GridModel& grid) {
  validate_probe(probe, grid.norm);
  UnwrappedProbe u;
  u.dim = grid.dim;
  const double m = static_cast<double>(grid.m);
  auto set_ball = [&](const Ball& b) {
    u.has_ball = true;
    u.radius = b.radius;
    for (int k = 0; k < u.dim; ++k) u.center[k] = b.center[k];
  };
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Ball>) set_ball(p);
        if constexpr (std::is_same_v<T, Box>) {
          u.has_box = true;
          for (int k = 0; k < u.dim; ++k) {
            u.lo[k] = p.corner[k];
            u.hi[k] = p.corner[k] + p.sides[k];
          }
        }
        if constexpr (std::is_same_v<T, BallBox>) {
          set_ball(p.ball);
          u.has_box = true;
          for (int k = 0; k < u.dim; ++k) {
            const double mid = u.center[k] + wrap_offset(p.box.corner[k] + p.box.sides[k] / 2.0 - u.center[k]);
            u.lo[k] = mid - p.box.sides[k] / 2.0;
            u.hi[k] = mid + p.box.sides[k] / 2.0;
          }
        }
      },
      probe);
  for (int k = 0; k < u.dim; ++k) {
    double a = u.has_ball ? u.center[k] - u.radius : -1e300;
    double b = u.has_ball ? u.center[k] + u.radius : 1e300;
    if (u.has_box) {
      a = std::max(a, u.lo[k]);
      b = std::min(b, u.hi[k]);
    }
    u.first[k] = static_cast<std::int64_t>(std::floor(a * m)) - 1;
    u.last[k] = static_cast<std::int64_t>(std::floor(b * m)) + 1;
  }
  return u;
}

template <class F>
void for_each_window_cell(const UnwrappedProbe& u, F&& f) {
  CellCoords j{};
  for (int k = 0; k < u.dim; ++k) {
    j[k] = u.first[k];
    if (u.first[k] > u.last[k]) return;
  }
  for (;;) {
    f(j);
    int k = u.dim - 1;
    for (; k >= 0; --k) {
      if (++j[k] <= u.last[k]) break;
      j[k] = u.first[k];
    }
    if (k < 0) break;
  }
}

std::uint64_t wrap_encode(const CellCoords& j, const GridModel& grid) {
  CellCoords c{};
  for (int k = 0; k < grid.dim; ++k) c[k] = ((j[k] % grid.m) + grid.m) % grid.m;
  return grid.encode(c);
}

IndexSet finish(std::vector<std::uint64_t> cells) {
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  return cells;
}

}  // namespace

IndexSet inner_hull(const ConvexProbe& probe, const GridModel& grid) {
  const UnwrappedProbe u = unwrap(probe, grid);
  const double m = static_cast<double>(grid.m);
  const int d = grid.dim;
  std::vector<std::uint64_t> out;
  for_each_window_cell(u, [&](const CellCoords& j) {
    if (u.has_box) {
      for (int k = 0; k < d; ++k) {
        if (static_cast<double>(j[k]) / m < u.lo[k] || static_cast<double>(j[k] + 1) / m > u.hi[k]) return;
      }
    }
    if (u.has_ball) {
      // A convex set contains a box iff it contains every corner.
      for (int corner = 0; corner < (1 << d); ++corner) {
        double diff[kMaxDim];
        for (int k = 0; k < d; ++k) {
          const double x = static_cast<double>(j[k] + ((corner >> k) & 1)) / m;
          diff[k] = x - u.center[k];
        }
        if (grid.norm.of(diff) > u.radius) return;
      }
    }
    out.push_back(wrap_encode(j, grid));
  });
  return finish(std::move(out));
}

IndexSet outer_hull(const ConvexProbe& probe, const GridModel& grid) {
  const UnwrappedProbe u = unwrap(probe, grid);
  const double m = static_cast<double>(grid.m);
  const int d = grid.dim;
  std::vector<std::uint64_t> out;
  for_each_window_cell(u, [&](const CellCoords& j) {
    double lo[kMaxDim], hi[kMaxDim];
    for (int k = 0; k < d; ++k) {
      lo[k] = static_cast<double>(j[k]) / m;
      hi[k] = static_cast<double>(j[k] + 1) / m;
      if (u.has_box) {
        lo[k] = std::max(lo[k], u.lo[k]);
        hi[k] = std::min(hi[k], u.hi[k]);
        if (lo[k] > hi[k]) return;
      }
    }
    if (u.has_ball) {
      // Closest point of the (cell ∩ box) box to the center.
      double diff[kMaxDim];
      for (int k = 0; k < d; ++k) diff[k] = std::clamp(u.center[k], lo[k], hi[k]) - u.center[k];
      if (grid.norm.of(diff) > u.radius) return;
    }
    out.push_back(wrap_encode(j, grid));
  });
  return finish(std::move(out));
}

RegionDescriptor index_union(const IndexSet& set, const GridModel& grid) {
  RegionDescriptor r;
  r.cells = set;
  r.cell_side = 1.0 / static_cast<double>(grid.m);
  r.measure = static_cast<double>(set.size()) / static_cast<double>(grid.cells());
  return r;
}

double inscribed_ball_diameter(const IndexSet& set, const GridModel& grid) {
  if (set.empty()) throw std::invalid_argument("inscribed_ball_diameter: empty set");
  const int d = grid.dim;
  const std::int64_t m = grid.m;
  // Unwrap members around the first one.
  const CellCoords ref = grid.decode(set.front());
  std::set<CellCoords> members;
  for (auto lin : set) {
    CellCoords c = grid.decode(lin);
    for (int k = 0; k < d; ++k) {
      std::int64_t off = ((c[k] - ref[k]) % m + m) % m;
      if (off > m / 2) off -= m;
      c[k] = off;
    }
    members.insert(c);
  }
  // The first non-member cell a growing ball touches shares a boundary point
  // with a member, so the 3^d neighbours of members suffice.
  std::set<CellCoords> boundary;
  int ring = 1;
  for (int k = 0; k < d; ++k) ring *= 3;
  for (const auto& c : members) {
    for (int code = 0; code < ring; ++code) {
      CellCoords nb = c;
      int rest = code;
      for (int k = 0; k < d; ++k) {
        nb[k] += rest % 3 - 1;
        rest /= 3;
      }
      if (!members.count(nb)) boundary.insert(nb);
    }
  }
  if (boundary.empty()) return 1.0;
  std::vector<CellCoords> bvec(boundary.begin(), boundary.end());
  const int sub = 8;
  int per_cell = 1;
  for (int k = 0; k < d; ++k) per_cell *= sub;
  double best = 0.0;
  for (const auto& c : members) {
    for (int code = 0; code < per_cell; ++code) {
      double x[kMaxDim];
      int rest = code;
      for (int k = 0; k < d; ++k) {
        x[k] = static_cast<double>(c[k]) + static_cast<double>(rest % sub) / sub;
        rest /= sub;
      }
      double rho = 1e300;
      for (const auto& b : bvec) {
        double diff[kMaxDim];
        for (int k = 0; k < d; ++k) {
          const double lo = static_cast<double>(b[k]);
          diff[k] = x[k] < lo ? lo - x[k] : (x[k] > lo + 1.0 ? x[k] - lo - 1.0 : 0.0);
        }
        rho = std::min(rho, grid.norm.of(diff));
        if (rho <= best) break;
      }
      best = std::max(best, rho);
    }
  }
  return 2.0 * best / static_cast<double>(m);
}

}  // namespace rggloc
