#include "rggloc/extractor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace rggloc {

IndexSet extract_bulk_exceedance(const CellConfig& cfg, const DerivedScales& sc) {
  IndexSet out;
  for (std::size_t k = 0; k < cfg.index.size(); ++k) {
    if (static_cast<double>(cfg.count[k]) > sc.M) out.push_back(cfg.index[k]);
  }
  return out;
}

std::vector<std::uint64_t> mass_order(const CellConfig& cfg, const IndexSet& frakI) {
  std::vector<std::pair<std::int64_t, std::uint64_t>> keyed;
  keyed.reserve(frakI.size());
  for (auto lin : frakI) keyed.emplace_back(cfg.at(lin), lin);
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<std::uint64_t> out;
  out.reserve(keyed.size());
  for (const auto& kv : keyed) out.push_back(kv.second);
  return out;
}

IndexSet extract_T(const CellConfig& cfg, const IndexSet& frakI, const DerivedScales& sc) {
  const double threshold = sc.mass_threshold();
  if (V_count(frakI, cfg, sc) <= threshold) throw InsufficientMass("insufficient mass");
  IndexSet prefix;
  std::int64_t mass = 0;
  for (auto lin : mass_order(cfg, frakI)) {
    prefix.push_back(lin);
    mass += cfg.at(lin);
    if (static_cast<double>(mass) / sc.q > threshold) break;
  }
  std::sort(prefix.begin(), prefix.end());
  return prefix;
}

IndexSet extract_P(const CellConfig& cfg, const IndexSet& frakT, const DerivedScales& sc) {
  const double cut = std::pow(sc.xi, 0.25) * sc.q / sc.tau_s;
  IndexSet out;
  for (auto lin : frakT) {
    if (static_cast<double>(cfg.at(lin)) > cut) out.push_back(lin);
  }
  return out;
}

LocalizationReport certify_thm2(const CellConfig& cfg, const GridModel& grid, const DerivedScales& sc,
                                double eps_tilde) {
  LocalizationReport rep;
  rep.eps_tilde = eps_tilde;
  rep.frakI = extract_bulk_exceedance(cfg, sc);
  rep.V_frakI = V_count(rep.frakI, cfg, sc);
  if (rep.V_frakI > sc.mass_threshold()) {
    rep.frakT = extract_T(cfg, rep.frakI, sc);
    rep.frakP = extract_P(cfg, rep.frakT, sc);
  }
  rep.cardP = static_cast<std::int64_t>(rep.frakP.size());
  rep.diamP = set_diameter(rep.frakP, grid);
  if (!rep.frakP.empty()) {
    rep.max_dev_inside = 0.0;
    for (auto lin : rep.frakP) {
      const double ratio = static_cast<double>(cfg.at(lin)) * sc.tau_s / sc.q;
      rep.max_dev_inside = std::max(rep.max_dev_inside, std::fabs(ratio - 1.0));
    }
    rep.QP = Q_internal(rep.frakP, cfg, sc);
  }
  for (std::size_t k = 0; k < cfg.index.size(); ++k) {
    if (set_contains(rep.frakP, cfg.index[k])) continue;
    const double ratio = static_cast<double>(cfg.count[k]) * sc.tau_s / sc.q;
    if (ratio > rep.max_ratio_outside) {
      rep.max_ratio_outside = ratio;
      rep.worst_outside_cell = cfg.index[k];
      rep.worst_outside_count = cfg.count[k];
    }
  }
  if (rep.frakT.empty()) {
    rep.status = "insufficient mass";
  } else if (rep.diamP > grid.s) {
    rep.status = "diameter";
  } else if (rep.cardP < grid.tau_s) {
    rep.status = "cardinality";
  } else if (!(rep.max_dev_inside < eps_tilde)) {
    rep.status = "deviation inside";
  } else if (!(rep.max_ratio_outside <= eps_tilde)) {
    rep.status = "mass outside";
  } else {
    rep.status = "ok";
  }
  rep.thm2_pass = rep.status == "ok";
  return rep;
}

LocalizationProfile localization_profile(const CellConfig& cfg, const GridModel& grid, const DerivedScales& sc,
                                         double eps_tilde, std::size_t top) {
  LocalizationProfile prof;
  prof.report = certify_thm2(cfg, grid, sc, eps_tilde);
  const IndexSet& P = prof.report.frakP;
  const IndexSet Pc = complement_support(P, cfg);
  prof.Q_P = Q_internal(P, cfg, sc);
  prof.Q_P_Pc = Q_cross(P, Pc, cfg, sc);
  prof.Q_Pc = Q_internal(Pc, cfg, sc);
  prof.V_P = V_count(P, cfg, sc);
  prof.p_hat = sc.p_hat;
  std::vector<std::int64_t> counts = cfg.count;
  std::sort(counts.begin(), counts.end(), std::greater<>());
  counts.resize(std::min(counts.size(), top));
  prof.top_counts = std::move(counts);
  return prof;
}

namespace {

// Anchor whose clique-shaped window holds the most points (ties: smallest index).
IndexSet densest_window(const CellConfig& cfg, const GridModel& grid) {
  std::unordered_map<std::uint64_t, std::int64_t> mass;
  for (std::size_t k = 0; k < cfg.index.size(); ++k) {
    const CellCoords c = grid.decode(cfg.index[k]);
    for (const auto& off : grid.clique_shape()) {
      CellCoords neg{};
      for (int j = 0; j < grid.dim; ++j) neg[j] = -off[j];
      mass[grid.shift(c, neg)] += cfg.count[k];
    }
  }
  std::uint64_t best = 0;
  std::int64_t best_mass = -1;
  for (const auto& [anchor, m] : mass) {
    if (m > best_mass || (m == best_mass && anchor < best)) {
      best = anchor;
      best_mass = m;
    }
  }
  return best_mass < 0 ? IndexSet{} : clique_set_at(grid, best);
}

std::int64_t count_ball(const PointSet& ps, const PointBuckets& buckets, const Ball& ball, const NormSpec& norm) {
  std::int64_t count = 0;
  buckets.for_each_near(ball.center, ball.radius, [&](std::uint32_t i) {
    if (torus_distance(ps.point(i), ball.center, norm) <= ball.radius) ++count;
  });
  return count;
}

std::int64_t count_probe(const PointSet& ps, const PointBuckets& buckets, const ConvexProbe& probe,
                         const std::vector<double>& center, double reach, const NormSpec& norm) {
  std::int64_t count = 0;
  buckets.for_each_near(center, reach, [&](std::uint32_t i) {
    if (probe_contains(probe, ps.point(i), norm)) ++count;
  });
  return count;
}

std::vector<double> wrap_point(std::vector<double> x) {
  for (double& v : x) v -= std::floor(v);
  return x;
}

}  // namespace

Thm1Report certify_thm1(const PointSet& ps, const ModelParams& params, int s, double delta, double eps,
                        const ProbeFamilySpec& family) {
  const NormSpec& norm = params.norm;
  const int d = norm.dim;
  const double r = params.r;
  const double tau = ball_volume_tau(r, norm);
  const double mu = expected_edges(params);
  Thm1Report rep;
  rep.radius = r / 2.0;
  rep.scale = std::sqrt(2.0 * delta * mu);

  const GridModel grid = GridModel::build(params, s);
  const CellConfig cfg = coarsen(ps, grid);
  const double eps_tilde = eps / 8.0;
  const DerivedScales sc = DerivedScales::compute(grid, delta * (1.0 - eps / 16.0), params.delta_star,
                                                  DerivedScales::xi_from_eps(eps_tilde, grid.tau_s));
  const LocalizationReport loc = certify_thm2(cfg, grid, sc, eps_tilde);
  IndexSet cells;
  if (!loc.frakP.empty() && loc.diamP <= s) {
    cells = loc.frakP;
    rep.candidate_source = "extractor";
  } else {
    cells = densest_window(cfg, grid);
    rep.candidate_source = "densest window";
  }

  // Centroid of the points in the chosen cells, unwrapped around the first one.
  std::vector<double> centroid(d, 0.5);
  {
    std::vector<double> ref, acc(d, 0.0);
    std::size_t used = 0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      auto p = ps.point(i);
      CellCoords c{};
      for (int k = 0; k < d; ++k) {
        c[k] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(p[k] * grid.m)), 0, grid.m - 1);
      }
      if (!set_contains(cells, grid.encode(c))) continue;
      if (ref.empty()) ref.assign(p.begin(), p.end());
      for (int k = 0; k < d; ++k) acc[k] += ref[k] + wrap_offset(p[k] - ref[k]);
      ++used;
    }
    if (used > 0) {
      for (int k = 0; k < d; ++k) centroid[k] = acc[k] / static_cast<double>(used);
      centroid = wrap_point(centroid);
    }
  }

  const PointBuckets buckets(ps, std::max(r, 1.0 / 512.0));
  // Local refinement: 5 offsets per axis, spacing r/10, the centroid first.
  {
    const double h = r / 10.0;
    Ball best{centroid, r / 2.0};
    std::int64_t best_count = count_ball(ps, buckets, best, norm);
    int total = 1;
    for (int k = 0; k < d; ++k) total *= 5;
    for (int code = 0; code < total; ++code) {
      std::vector<double> c(d);
      int rest = code;
      for (int k = 0; k < d; ++k) {
        c[k] = centroid[k] + (rest % 5 - 2) * h;
        rest /= 5;
      }
      Ball cand{wrap_point(c), r / 2.0};
      const std::int64_t cnt = count_ball(ps, buckets, cand, norm);
      if (cnt > best_count) {
        best_count = cnt;
        best = cand;
      }
    }
    rep.center = best.center;
    rep.count_A = best_count;
  }
  rep.ratio_A = static_cast<double>(rep.count_A) / rep.scale;

  const std::vector<double>& c = rep.center;
  const double R = r / 2.0;
  auto offset = [&](std::vector<double> base, int axis, double by) {
    base[axis] += by;
    return wrap_point(base);
  };

  // Clause (a): probes inside A with measure above (eps/16) tau.
  std::vector<std::pair<ConvexProbe, std::string>> inside;
  inside.emplace_back(Ball{c, R}, "A");
  for (double f : family.concentric) inside.emplace_back(Ball{c, f * R}, "concentric");
  if (family.offset_balls) {
    for (int k = 0; k < d; ++k) {
      inside.emplace_back(Ball{offset(c, k, R / 2.0), R / 2.0}, "offset ball");
      inside.emplace_back(Ball{offset(c, k, -R / 2.0), R / 2.0}, "offset ball");
    }
  }
  if (family.inscribed_boxes) {
    const double half = R / norm.diagonal();
    std::vector<double> corner(d), sides(d, 2.0 * half);
    for (int k = 0; k < d; ++k) corner[k] = c[k] - half;
    inside.emplace_back(Box{wrap_point(corner), sides}, "inscribed box");
    for (int k = 0; k < d; ++k) {
      std::vector<double> hs = sides;
      hs[k] = half;
      inside.emplace_back(Box{wrap_point(corner), hs}, "half box");
      inside.emplace_back(Box{offset(corner, k, half), hs}, "half box");
    }
  }
  if (family.half_balls) {
    for (int k = 0; k < d; ++k) {
      std::vector<double> corner(d), sides(d, 2.0 * R);
      for (int j = 0; j < d; ++j) corner[j] = c[j] - R;
      sides[k] = R;
      inside.emplace_back(BallBox{Ball{c, R}, Box{wrap_point(corner), sides}}, "half ball");
      corner[k] = c[k];
      inside.emplace_back(BallBox{Ball{c, R}, Box{wrap_point(corner), sides}}, "half ball");
    }
  }
  rep.worst_a.margin = std::numeric_limits<double>::infinity();
  rep.clause_a = true;
  for (const auto& [probe, label] : inside) {
    const double ratio = probe_measure(probe, norm) / tau;
    if (!(ratio > eps / 16.0)) continue;
    const std::int64_t cnt = count_probe(ps, buckets, probe, c, R, norm);
    const double margin = eps - std::fabs(static_cast<double>(cnt) / rep.scale - ratio);
    ++rep.probes_a;
    if (label == "A") rep.clause_a_A = margin > 0.0;
    if (margin <= 0.0) rep.clause_a = false;
    if (margin < rep.worst_a.margin) rep.worst_a = {label + ": " + describe_probe(probe), cnt, ratio, margin};
  }

  // Clause (b): diameter-r balls (and their inscribed cubes) on a lattice of
  // stride at most r/2, skipping any that meet A.
  const auto per_axis = static_cast<std::int64_t>(std::ceil(2.0 / r));
  rep.worst_b.margin = std::numeric_limits<double>::infinity();
  rep.clause_b = true;
  std::vector<std::int64_t> idx(d, 0);
  const double half = R / norm.diagonal();
  const double box_ratio = std::pow(2.0 * half, d) / tau;
  for (;;) {
    std::vector<double> center(d);
    for (int k = 0; k < d; ++k) center[k] = static_cast<double>(idx[k]) / static_cast<double>(per_axis);
    if (torus_distance(center, c, norm) > 2.0 * R) {
      const Ball ball{center, R};
      const std::int64_t cnt = count_ball(ps, buckets, ball, norm);
      const double margin = eps - static_cast<double>(cnt) / rep.scale;
      ++rep.probes_b;
      if (margin <= 0.0) rep.clause_b = false;
      if (margin < rep.worst_b.margin) rep.worst_b = {"ball: " + describe_probe(ball), cnt, 1.0, margin};
      if (family.outside_boxes && cnt > 0) {
        std::vector<double> corner(d);
        for (int k = 0; k < d; ++k) corner[k] = center[k] - half;
        const Box box{wrap_point(corner), std::vector<double>(d, 2.0 * half)};
        const std::int64_t bc = count_probe(ps, buckets, box, center, R, norm);
        const double bm = eps * box_ratio - static_cast<double>(bc) / rep.scale;
        ++rep.probes_b;
        if (bm <= 0.0) rep.clause_b = false;
        if (bm < rep.worst_b.margin) rep.worst_b = {"box: " + describe_probe(box), bc, box_ratio, bm};
      }
    }
    int k = d - 1;
    for (; k >= 0; --k) {
      if (++idx[k] < per_axis) break;
      idx[k] = 0;
    }
    if (k < 0) break;
  }
  return rep;
}

}  // namespace rggloc
