#include "rggloc/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "rggloc/extractor.hpp"
#include "rggloc/ldp.hpp"
#include "rggloc/parallel.hpp"
#include "rggloc/samplers.hpp"
#include "rggloc/sgraded.hpp"
#include "rggloc/statistics.hpp"

namespace rggloc {

Scale parse_scale(const std::string& name) {
  if (name == "quick") return Scale::Quick;
  if (name == "full") return Scale::Full;
  throw std::invalid_argument("unknown verify scale '" + name + "' (expected quick or full)");
}

std::string scale_name(Scale scale) { return scale == Scale::Quick ? "quick" : "full"; }

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[4096];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

CriterionResult start(int id, const char* title) {
  CriterionResult res;
  res.id = id;
  res.title = title;
  return res;
}

bool full(const AcceptanceOptions& o) { return o.scale == Scale::Full; }

// Sub-seed for a named part of a criterion.
std::uint64_t sub_seed(const AcceptanceOptions& o, std::uint64_t tag) { return mix64(o.seed ^ mix64(tag)); }

const NormKind kNorms[] = {NormKind::L1, NormKind::L2, NormKind::Linf};

// Every continuum edge (i < j) of a point set.
template <class F>
void for_each_edge(const PointSet& ps, double r, const NormSpec& norm, F&& f) {
  const PointBuckets buckets(ps, std::max(r, 1.0 / 512.0));
  for (std::size_t i = 0; i < ps.size(); ++i) {
    buckets.for_each_near(ps.point(i), r, [&](std::uint32_t j) {
      if (j > i && torus_distance(ps.point(i), ps.point(j), norm) <= r) f(i, j);
    });
  }
}

CellCoords cell_of(std::span<const double> p, const GridModel& grid) {
  CellCoords c{};
  for (int k = 0; k < grid.dim; ++k) {
    c[k] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(p[k] * grid.m)), 0, grid.m - 1);
  }
  return c;
}

CriterionResult c1_edge_mean(const AcceptanceOptions& o) {
  CriterionResult res = start(1, "edge-count mean");
  const auto t0 = Clock::now();
  const ModelParams params = ModelParams::make(150, 0.1, NormSpec::make(NormKind::L2, 2), 0.5);
  const double mu = expected_edges(params);
  const std::size_t seeds = 2000;
  std::vector<std::int64_t> edges(seeds);
  parallel_for(seeds, [&](std::size_t i) {
    Rng rng = Rng::stream(sub_seed(o, 1), i);
    edges[i] = edge_count(sample_ppp(params.n, params.norm, rng), params.r, params.norm);
  });
  double sum = 0.0;
  for (auto e : edges) sum += static_cast<double>(e);
  const double mean = sum / static_cast<double>(seeds);
  const double rel = std::fabs(mean / mu - 1.0);
  const double secs = since(t0);
  const bool formula = std::fabs(mu - 353.429) < 1e-3;
  const bool timely = !full(o) || secs < 30.0;
  res.pass = formula && rel <= 0.02 && timely;
  res.detail = fmt("mu=%.6f, mean over %zu seeds=%.4f (rel. dev %.4f, limit 0.02)%s", mu, seeds, mean, rel,
                   timely ? "" : ", over 30 s");
  return res;
}

CriterionResult c2_oracles(const AcceptanceOptions& o) {
  CriterionResult res = start(2, "oracle equivalence");
  const auto t0 = Clock::now();
  const std::size_t instances = full(o) ? 100 : 30;
  const std::size_t pairs = full(o) ? 500 : 150;
  std::vector<char> edge_ok(instances, 0);
  parallel_for(instances, [&](std::size_t i) {
    Rng rng = Rng::stream(sub_seed(o, 2), i);
    const int d = 1 + static_cast<int>(rng.below(3));
    const NormSpec norm = NormSpec::make(kNorms[rng.below(3)], d);
    const double n = 50.0 + 1400.0 * rng.uniform();
    const double r = d == 1 ? 0.002 + 0.02 * rng.uniform() : (d == 2 ? 0.01 + 0.08 * rng.uniform() : 0.05 + 0.15 * rng.uniform());
    PointSet ps = sample_ppp(n, norm, rng);
    if (ps.size() > 2000) ps.coords.resize(2000 * static_cast<std::size_t>(d));
    edge_ok[i] = edge_count(ps, r, norm) == edge_count_bruteforce(ps, r, norm);
  });
  const auto edge_pass = static_cast<std::size_t>(std::count(edge_ok.begin(), edge_ok.end(), 1));

  std::size_t metric_pass = 0;
  std::size_t metric_total = 0;
  std::string mismatch;
  for (int nk = 0; nk < 3; ++nk) {
    std::vector<char> ok(pairs, 0);
    std::vector<std::string> note(pairs);
    parallel_for(pairs, [&](std::size_t i) {
      Rng rng = Rng::stream(sub_seed(o, 20 + nk), i);
      const int d = 1 + static_cast<int>(rng.below(3));
      const int s = 1 + static_cast<int>(rng.below(5));
      const std::int64_t m = 2 * s + 3 + static_cast<std::int64_t>(rng.below(8));
      GridOptions go;
      go.allow_coarse = s < 3;
      const GridModel grid = GridModel::build_explicit(NormSpec::make(kNorms[nk], d), s, m, 1.0, go);
      CellCoords a{}, b{};
      const bool near = rng.below(2) == 0;
      for (int k = 0; k < d; ++k) {
        a[k] = static_cast<std::int64_t>(rng.below(m));
        const std::int64_t step = near ? static_cast<std::int64_t>(rng.below(2 * s + 5)) - (s + 2)
                                       : static_cast<std::int64_t>(rng.below(m));
        b[k] = ((a[k] + step) % m + m) % m;
      }
      const std::int64_t fast = cell_metric(a, b, grid);
      const std::int64_t slow = cell_metric_numeric_oracle(a, b, grid, 4000, rng);
      ok[i] = fast == slow;
      if (!ok[i]) note[i] = fmt("%s d=%d m=%ld: %ld vs %ld", grid.norm.name().c_str(), d, static_cast<long>(m),
                                static_cast<long>(fast), static_cast<long>(slow));
    });
    for (std::size_t i = 0; i < pairs; ++i) {
      ++metric_total;
      metric_pass += ok[i];
      if (!ok[i] && mismatch.empty()) mismatch = note[i];
    }
  }
  const double secs = since(t0);
  const bool timely = !full(o) || secs < 60.0;
  res.pass = edge_pass == instances && metric_pass == metric_total && timely;
  res.detail = fmt("edge_count == brute force on %zu/%zu instances; cell_metric == oracle on %zu/%zu pairs%s%s",
                   edge_pass, instances, metric_pass, metric_total, mismatch.empty() ? "" : ("; first mismatch " + mismatch).c_str(),
                   timely ? "" : ", over 60 s");
  return res;
}

CriterionResult c3_coupling(const AcceptanceOptions& o) {
  CriterionResult res = start(3, "coupling inequalities");
  const std::size_t instances = full(o) ? 100 : 20;
  std::vector<char> ok(instances, 0);
  parallel_for(instances, [&](std::size_t i) {
    Rng rng = Rng::stream(sub_seed(o, 3), i);
    const int d = 1 + static_cast<int>(rng.below(3));
    const NormSpec norm = NormSpec::make(kNorms[rng.below(3)], d);
    const int s = 3 + static_cast<int>(rng.below(4));
    const double n = d == 1 ? 500.0 : 1500.0;
    const double r = (d == 1 ? 0.01 : (d == 2 ? 0.04 : 0.1)) * (0.5 + rng.uniform());
    const ModelParams params = ModelParams::make(n, r, norm, 0.5);
    const GridModel grid = GridModel::build(params, s);
    const PointSet ps = sample_ppp(n, norm, rng);
    bool good = true;
    std::int64_t edges = 0;
    for_each_edge(ps, r, norm, [&](std::size_t a, std::size_t b) {
      ++edges;
      if (cell_metric(cell_of(ps.point(a), grid), cell_of(ps.point(b), grid), grid) > s) good = false;
    });
    ok[i] = good && edges <= sgraded_edge_count(coarsen(ps, grid));
  });
  const auto contained = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));

  // 20 parameter settings for the mean and clique-size comparisons.
  std::size_t settings = 0, mean_ok = 0, tau_ok = 0;
  Rng rng(sub_seed(o, 31));
  auto check = [&](NormKind kind, int d, int s) {
    const std::int64_t m = 2 * s + 3 + static_cast<std::int64_t>(rng.below(40));
    const double r = s / (static_cast<double>(m) + 0.37);
    const ModelParams params = ModelParams::make(1000.0, r, NormSpec::make(kind, d), 0.5);
    const GridModel grid = GridModel::build(params, s);
    ++settings;
    mean_ok += expected_edges(params) <= expected_sgraded_edges(grid);
    const double cells = std::pow(static_cast<double>(grid.m), d);
    tau_ok += cells * ball_volume_tau(r, params.norm) <= static_cast<double>(grid.tau_s);
  };
  for (NormKind kind : kNorms) {
    for (int d = 1; d <= 3; ++d) {
      check(kind, d, 3);
      check(kind, d, 5);
    }
  }
  check(NormKind::L2, 2, 8);
  check(NormKind::Linf, 2, 8);

  // (mu_tilde / mu - 1) strictly decreasing in s, r = 1/1024 so m = 1024 s.
  bool decreasing = true;
  std::string trend;
  for (NormKind kind : kNorms) {
    for (int d = 1; d <= 2; ++d) {
      double prev = INFINITY;
      std::string row = NormSpec::make(kind, d).name() + " d=" + std::to_string(d) + ":";
      for (int s : {4, 6, 8, 10, 12}) {
        const ModelParams params = ModelParams::make(1000.0, 1.0 / 1024.0, NormSpec::make(kind, d), 0.5);
        const GridModel grid = GridModel::build(params, s);
        const double excess = expected_sgraded_edges(grid) / expected_edges(params) - 1.0;
        if (!(excess < prev)) decreasing = false;
        prev = excess;
        row += fmt(" %.4f", excess);
      }
      if (kind == NormKind::L2 && d == 2) trend = row;
    }
  }
  res.pass = contained == instances && mean_ok == settings && tau_ok == settings && decreasing;
  res.detail = fmt("E in E_s on %zu/%zu; mu <= mu_tilde on %zu/%zu; m^d tau <= tau_s on %zu/%zu; excess decreasing: %s (%s)",
                   contained, instances, mean_ok, settings, tau_ok, settings, decreasing ? "yes" : "no", trend.c_str());
  return res;
}

CriterionResult c4_linf_clique(const AcceptanceOptions& o) {
  CriterionResult res = start(4, "L-infinity clique size");
  const auto t0 = Clock::now();
  std::size_t ok = 0, total = 0;
  std::string bad;
  for (int d = 1; d <= 3; ++d) {
    for (int s = 1; s <= 5; ++s) {
      GridOptions go;
      go.allow_coarse = s < 3;
      const GridModel grid = GridModel::build_explicit(NormSpec::make(NormKind::Linf, d), s, 4 * s + 8, 1.0, go);
      const auto expect = static_cast<std::int64_t>(std::pow(s + 1, d));
      ++total;
      if (grid.tau_s == expect && grid.tau_exact && max_clique_set_size(grid) == expect) {
        ++ok;
      } else if (bad.empty()) {
        bad = fmt("; d=%d s=%d gave %ld (exact=%d)", d, s, static_cast<long>(grid.tau_s), grid.tau_exact);
      }
    }
  }
  const double secs = since(t0);
  const bool timely = !full(o) || secs < 60.0;
  res.pass = ok == total && timely;
  res.detail = fmt("tau_s == (s+1)^d proven exact on %zu/%zu (d<=3, s<=5)%s%s", ok, total, bad.c_str(),
                   timely ? "" : ", over 60 s");
  return res;
}

CriterionResult c5_chernoff(const AcceptanceOptions&) {
  CriterionResult res = start(5, "Chernoff domination");
  const double means[] = {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 100.0, 1000.0};
  const double up[] = {1.0, 1.001, 1.01, 1.1, 1.5, 2.0, 3.0, 5.0, 10.0, 20.0, 50.0};
  const double down[] = {0.0, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 1.0};
  std::size_t ok = 0, total = 0;
  double worst = INFINITY;
  auto check = [&](double D, double t, TailSide side) {
    ++total;
    const double bound = poisson_tail_bound(D, t, side);
    const double exact = exact_poisson_tail(D, t, side);
    ok += bound >= exact;
    if (exact > 0.0) worst = std::min(worst, std::log(bound) - std::log(exact));
  };
  for (double D : means) {
    for (double f : up) check(D, D * f, TailSide::Upper);
    for (double k = std::ceil(D); k <= std::ceil(D) + 30.0; k += 1.0) check(D, k, TailSide::Upper);
    for (double f : down) check(D, D * f, TailSide::Lower);
    for (double k = 0.0; k <= std::floor(D) && k <= 30.0; k += 1.0) check(D, k, TailSide::Lower);
  }
  res.pass = ok == total;
  res.detail = fmt("bound >= exact tail at %zu/%zu grid points; smallest log gap %.3g", ok, total, worst);
  return res;
}

// Small grid and random configurations shared by criteria 6 and 7.
struct FunctionalCase {
  CellConfig cfg;
  IndexSet W;
  DerivedScales sc;
};

const GridModel& functional_grid(int variant) {
  static const GridModel grids[] = {
      GridModel::build_explicit(NormSpec::make(NormKind::L2, 2), 3, 12, 0.5),
      GridModel::build_explicit(NormSpec::make(NormKind::Linf, 1), 4, 40, 2.0),
      GridModel::build_explicit(NormSpec::make(NormKind::L1, 2), 3, 10, 0.05),
  };
  return grids[variant % 3];
}

FunctionalCase functional_case(Rng& rng, bool uniform_on_W) {
  const GridModel& grid = functional_grid(static_cast<int>(rng.below(3)));
  FunctionalCase fc;
  fc.cfg = sample_cell_config(grid, rng);
  // A few heavy cells so that Y and Q are far from their nominal values.
  std::vector<std::pair<std::uint64_t, std::int64_t>> bumps;
  const std::uint64_t heavy = rng.below(6);
  for (std::uint64_t k = 0; k < heavy; ++k) {
    bumps.emplace_back(rng.below(grid.cells()), 1 + static_cast<std::int64_t>(rng.below(40)));
  }
  fc.cfg.overwrite(bumps);
  const double keep = 0.05 + 0.5 * rng.uniform();
  for (std::uint64_t c = 0; c < grid.cells(); ++c) {
    if (rng.uniform() < keep) fc.W.push_back(c);
  }
  if (fc.W.empty()) fc.W.push_back(rng.below(grid.cells()));
  if (uniform_on_W) {
    const std::int64_t level = 1 + static_cast<std::int64_t>(rng.below(20));
    std::vector<std::pair<std::uint64_t, std::int64_t>> flat;
    for (auto c : fc.W) flat.emplace_back(c, level);
    fc.cfg.overwrite(flat);
  }
  const double delta_tilde = 0.2 + 1.8 * rng.uniform();
  fc.sc = DerivedScales::compute(grid, delta_tilde, 0.5, DerivedScales::xi_from_eps(0.2, grid.tau_s));
  return fc;
}

CriterionResult c6_jensen(const AcceptanceOptions& o) {
  CriterionResult res = start(6, "Jensen functional");
  const std::size_t cases = full(o) ? 1000 : 200;
  const std::size_t uniform_cases = full(o) ? 200 : 50;
  double min_slack = INFINITY, worst_eq = 0.0;
  bool v_ok = true;
  for (std::size_t i = 0; i < cases; ++i) {
    Rng rng = Rng::stream(sub_seed(o, 6), i);
    const FunctionalCase fc = functional_case(rng, false);
    const double y = normalized_Y_sum(fc.W, fc.cfg, fc.sc);
    min_slack = std::min(min_slack, y - jensen_lower_bound(fc.W, fc.cfg, fc.sc));
    const double v = V_count(fc.W, fc.cfg, fc.sc);
    v_ok = v_ok && v * v >= Q_internal(fc.W, fc.cfg, fc.sc);
  }
  // On a uniform config the two sides differ by exactly |W| D / q.
  for (std::size_t i = 0; i < uniform_cases; ++i) {
    Rng rng = Rng::stream(sub_seed(o, 61), i);
    const FunctionalCase fc = functional_case(rng, true);
    const double y = normalized_Y_sum(fc.W, fc.cfg, fc.sc);
    const double gap = y - jensen_lower_bound(fc.W, fc.cfg, fc.sc);
    const double dropped = static_cast<double>(fc.W.size()) * fc.sc.D / fc.sc.q;
    worst_eq = std::max(worst_eq, std::fabs(gap - dropped) / std::max(1.0, y));
  }
  res.pass = min_slack >= -1e-9 && worst_eq <= 1e-12 && v_ok;
  res.detail = fmt("min slack %.3g over %zu cases (limit -1e-9); uniform configs: max |gap - |W|D/q| %.3g over %zu (limit 1e-12); V^2 >= Q: %s",
                   min_slack, cases, worst_eq, uniform_cases, v_ok ? "yes" : "no");
  return res;
}

CriterionResult c7_partition(const AcceptanceOptions& o) {
  CriterionResult res = start(7, "partition identity");
  const std::size_t cases = full(o) ? 50 : 20;
  std::size_t exact = 0;
  double worst_rel = 0.0;
  bool v_ok = true;
  for (std::size_t i = 0; i < cases; ++i) {
    Rng rng = Rng::stream(sub_seed(o, 7), i);
    const FunctionalCase fc = functional_case(rng, false);
    const IndexSet Wc = complement_support(fc.W, fc.cfg);
    const std::int64_t total = sgraded_edge_count(fc.cfg);
    const std::int64_t parts = internal_edge_count(fc.W, fc.cfg) + cross_edge_count(fc.W, Wc, fc.cfg) +
                               internal_edge_count(Wc, fc.cfg);
    exact += parts == total;
    const double q = fc.sc.q;
    const double recon = q * q / 2.0 *
                         (Q_internal(fc.W, fc.cfg, fc.sc) + Q_cross(fc.W, Wc, fc.cfg, fc.sc) + Q_internal(Wc, fc.cfg, fc.sc));
    worst_rel = std::max(worst_rel, std::fabs(recon - static_cast<double>(total)) / std::max(1.0, static_cast<double>(total)));
    for (const IndexSet* set : {&fc.W, &Wc}) {
      const double v = V_count(*set, fc.cfg, fc.sc);
      v_ok = v_ok && v * v >= Q_internal(*set, fc.cfg, fc.sc);
    }
  }
  res.pass = exact == cases && v_ok;
  res.detail = fmt("integer identity on %zu/%zu; floating reconstruction rel. error %.2g; V^2 >= Q: %s", exact, cases,
                   worst_rel, v_ok ? "yes" : "no");
  return res;
}

struct PassRate {
  std::size_t pass = 0;
  std::size_t total = 0;
  std::map<std::string, std::size_t> status;
  double rate() const { return total ? static_cast<double>(pass) / static_cast<double>(total) : 0.0; }
  std::string statuses() const {
    std::string out;
    for (const auto& [k, v] : status) out += (out.empty() ? "" : ", ") + k + " " + std::to_string(v);
    return out;
  }
};

PassRate thm2_pass_rate(const GridModel& grid, const DerivedScales& sc, double eps_tilde, std::size_t reps,
                        std::uint64_t seed, const PlantPlan* plan) {
  std::vector<LocalizationReport> reps_out(reps);
  parallel_for(reps, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    const CellConfig cfg = plan ? planted_cell_config(grid, *plan, rng) : sample_cell_config(grid, rng);
    reps_out[i] = certify_thm2(cfg, grid, sc, eps_tilde);
  });
  PassRate pr;
  pr.total = reps;
  for (const auto& r : reps_out) {
    pr.pass += r.thm2_pass;
    ++pr.status[r.status];
  }
  return pr;
}

CriterionResult c8_localization(const AcceptanceOptions& o) {
  CriterionResult res = start(8, "localization on planted inputs");
  const auto t0 = Clock::now();
  const std::size_t reps = full(o) ? 500 : 60;
  const double eps_tilde = 0.2;
  const ModelParams params = ModelParams::from_p_target(1e5, 1.0, NormSpec::make(NormKind::Linf, 1), 0.5);
  const GridModel grid = GridModel::build(params, 5);
  auto scales = [&](double dt) {
    return DerivedScales::compute(grid, dt, params.delta_star, DerivedScales::xi_from_eps(eps_tilde, grid.tau_s));
  };
  const DerivedScales sc = scales(1.0);
  const PlantPlan hard = plan_planting(grid, 1.0, {PlantMode::Conditioned, true});
  const PassRate planted = thm2_pass_rate(grid, sc, eps_tilde, reps, sub_seed(o, 8), &hard);
  const PassRate nominal = thm2_pass_rate(grid, sc, eps_tilde, reps, sub_seed(o, 81), nullptr);
  const PlantPlan tilt = plan_planting(grid, 1.0, {PlantMode::Tilted, true});
  const PassRate tilted = thm2_pass_rate(grid, sc, eps_tilde, reps / 5, sub_seed(o, 82), &tilt);
  std::string others;
  for (double dt : {0.5, 2.0}) {
    const PlantPlan plan = plan_planting(grid, dt, {PlantMode::Conditioned, true});
    const PassRate pr = thm2_pass_rate(grid, scales(dt), eps_tilde, reps / 5, sub_seed(o, 83), &plan);
    others += fmt("; delta_tilde=%.1f: %.3f", dt, pr.rate());
  }
  const double secs = since(t0);
  const bool timely = !full(o) || secs < 300.0;
  res.pass = planted.rate() >= 0.9 && nominal.rate() <= 0.01 && timely;
  res.detail = fmt("n=1e5 Linf d=1 s=5 m=%ld tau_s=%ld: planted (conditioned) pass %zu/%zu; unconditioned pass %zu/%zu (%s); "
                   "tilted planting pass %.3f (info)%s%s",
                   static_cast<long>(grid.m), static_cast<long>(grid.tau_s), planted.pass, planted.total, nominal.pass,
                   nominal.total, nominal.statuses().c_str(), tilted.rate(), others.c_str(), timely ? "" : ", over 5 min");
  return res;
}

CriterionResult c9_thm1(const AcceptanceOptions& o) {
  CriterionResult res = start(9, "continuum localization, positive case");
  const std::size_t reps = full(o) ? 200 : 30;
  const ModelParams params = ModelParams::from_p_target(1e4, 1.0, NormSpec::make(NormKind::L2, 2), 0.5);
  std::vector<Thm1Report> out(reps);
  parallel_for(reps, [&](std::size_t i) {
    const PointSet ps = planted_continuum_sampler(params, 1.0, sub_seed(o, 9) + i);
    out[i] = certify_thm1(ps, params, 8, 1.0, 0.25);
  });
  std::size_t a_A = 0, a_all = 0, b = 0;
  const Thm1Report* worst = nullptr;
  for (const auto& r : out) {
    a_A += r.clause_a_A;
    a_all += r.clause_a;
    b += r.clause_b;
    if (!worst || r.worst_b.margin < worst->worst_b.margin) worst = &r;
  }
  res.pass = static_cast<double>(a_A) >= 0.9 * static_cast<double>(reps);
  res.detail = fmt("planted %ld points, scale %.2f: clause (a) for S=A %zu/%zu; all inside probes %zu/%zu; clause (b) %zu/%zu; "
                   "worst outside probe %s with %ld points (margin %.4f)",
                   static_cast<long>(planted_continuum_count(params, 1.0)), out.empty() ? 0.0 : out[0].scale, a_A, reps,
                   a_all, reps, b, reps, worst ? worst->worst_b.probe.c_str() : "-",
                   worst ? static_cast<long>(worst->worst_b.count) : 0L, worst ? worst->worst_b.margin : 0.0);
  return res;
}

CriterionResult c10_importance(const AcceptanceOptions& o) {
  CriterionResult res = start(10, "importance sampling on the tiny grid");
  const auto t0 = Clock::now();
  const std::size_t runs = full(o) ? 100 : 5;
  GridOptions go;
  go.allow_coarse = true;
  const GridModel grid = GridModel::build_explicit(NormSpec::make(NormKind::Linf, 1), 3, 4, 1.0, go);
  const double t = 1.0;
  const double mu_tilde = expected_sgraded_edges(grid);
  const double exact = std::exp(exact_tail_tiny(grid, (1.0 + t) * mu_tilde).log_prob);
  std::size_t ok = 0;
  double mean = 0.0;
  for (std::size_t k = 0; k < runs; ++k) {
    const TailEstimate est = importance_estimate_tail(grid, t, 10000, sub_seed(o, 10) + k);
    const double e = std::exp(est.log_prob);
    ok += std::fabs(e - exact) <= 3.0 * est.std_err;
    mean += e / static_cast<double>(runs);
  }
  const double secs = since(t0);
  const bool timely = !full(o) || secs < 120.0;
  const auto need = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(runs)));
  res.pass = ok >= need && timely;
  res.detail = fmt("m=4 s=3 D=1 tau_s=%ld, t=%.1f: exact %.10f; mean estimate %.6f; within 3 std_err in %zu/%zu runs (need %zu)%s",
                   static_cast<long>(grid.tau_s), t, exact, mean, ok, runs, need, timely ? "" : ", over 2 min");
  return res;
}

CriterionResult c11_ldp(const AcceptanceOptions& o) {
  CriterionResult res = start(11, "large-deviation trend");
  const std::vector<double> sweep = full(o) ? std::vector<double>{1e3, 1e4, 1e5} : std::vector<double>{1e3, 3e3, 1e4};
  const std::size_t replicas = full(o) ? 400 : 200;
  const std::size_t runs = full(o) ? 3 : 1;
  const double t = 1.0, eps = 0.1;
  const NormSpec norm = NormSpec::make(NormKind::Linf, 1);
  bool inside = true, unreliable = false;
  double prev_gap = INFINITY;
  bool monotone = true;
  std::string rows;
  double target = 0.0;
  for (double n : sweep) {
    const ModelParams params = ModelParams::from_p_target(n, 1.0, norm, 0.5);
    const GridModel grid = GridModel::build(params, 5);
    const double mu = expected_edges(params);
    const double speed = std::sqrt(mu) * std::log(n);
    const SandwichBound sb = sandwich_bounds(params, grid, t, eps);
    const double lo = sb.lower_log / speed, hi = sb.upper_log / speed;
    target = -rate_function(t, params.p_hat);
    std::string ests;
    for (std::size_t k = 0; k < runs; ++k) {
      const TailEstimate est = importance_estimate_tail(grid, t, replicas, sub_seed(o, 11) + k);
      const NormalizedTail nt = normalized_log_tail(est, mu, n);
      inside = inside && nt.value >= lo && nt.value <= hi;
      unreliable = unreliable || nt.unreliable;
      ests += fmt("%s%.4f", k ? "," : "", nt.value);
    }
    const double mid = 0.5 * (lo + hi);
    const double gap = std::fabs(mid - target);
    monotone = monotone && gap < prev_gap;
    prev_gap = gap;
    rows += fmt("; n=%.0e: est %s in [%.4f, %.4f], mid %.4f", n, ests.c_str(), lo, hi, mid);
  }
  res.pass = inside && monotone;
  res.detail = fmt("-I(1)=%.5f%s; bracketed: %s; midpoint gap shrinking: %s%s", target, rows.c_str(), inside ? "yes" : "no",
                   monotone ? "yes" : "no", unreliable ? "; some estimates have ESS < 10 (flagged)" : "");
  return res;
}

CriterionResult c12_fattening(const AcceptanceOptions& o) {
  CriterionResult res = start(12, "hull fattening");
  const std::size_t centers = full(o) ? 8 : 3;
  const std::int64_t m = 1024;  // power of two: cell boundaries are exact in binary
  std::size_t ok = 0, total = 0;
  double worst = 0.0;
  for (NormKind kind : kNorms) {
    const NormSpec norm = NormSpec::make(kind, 2);
    for (int s : {16, 32, 64}) {
      const GridModel grid = GridModel::build_explicit(norm, s, m, 1.0);
      const double r = static_cast<double>(s) / static_cast<double>(m);
      const double tau = ball_volume_tau(r, norm);
      for (std::size_t c = 0; c < centers; ++c) {
        Rng rng = Rng::stream(sub_seed(o, 12), static_cast<std::uint64_t>(s) * 16 + c);
        const Ball ball{{rng.uniform(), rng.uniform()}, r / 2.0};
        const double outer = index_union(outer_hull(ball, grid), grid).measure;
        const double inner = index_union(inner_hull(ball, grid), grid).measure;
        const double ratio = (outer - inner) / (32.0 * tau / s);
        worst = std::max(worst, ratio);
        ++total;
        ok += ratio <= 1.0;
      }
    }
  }
  res.pass = ok == total;
  res.detail = fmt("(outer - inner) <= 32 tau / s on %zu/%zu balls; largest ratio to the budget %.4f", ok, total, worst);
  return res;
}

CriterionResult c13_inscribed(const AcceptanceOptions&) {
  CriterionResult res = start(13, "inscribed ball of maximal clique sets");
  const NormSpec norm = NormSpec::make(NormKind::L2, 2);
  double prev = -INFINITY;
  bool nondecreasing = true;
  double last = 0.0;
  std::string rows;
  for (int s : {8, 16, 32}) {
    const std::int64_t m = 4 * s + 20;
    const GridModel grid = GridModel::build_explicit(norm, s, m, 1.0);
    CellCoords mid{};
    mid[0] = mid[1] = m / 2;
    const IndexSet set = clique_set_at(grid, grid.encode(mid));
    const double r = static_cast<double>(s) / static_cast<double>(m);
    const double ratio = inscribed_ball_diameter(set, grid) / r;
    nondecreasing = nondecreasing && ratio >= prev;
    prev = last = ratio;
    rows += fmt("%ss=%d: %.4f (tau_s=%ld%s)", rows.empty() ? "" : ", ", s, ratio, static_cast<long>(grid.tau_s),
                grid.tau_exact ? "" : ", lower bound");
  }
  res.pass = nondecreasing && last > 0.8;
  res.detail = fmt("inscribed diameter / r: %s; nondecreasing: %s; > 0.8 at s=32: %s", rows.c_str(),
                   nondecreasing ? "yes" : "no", last > 0.8 ? "yes" : "no");
  return res;
}

}  // namespace

std::vector<int> criterion_ids() { return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13}; }

CriterionResult run_criterion(int id, const AcceptanceOptions& options) {
  static const std::map<int, std::function<CriterionResult(const AcceptanceOptions&)>> table = {
      {1, c1_edge_mean},   {2, c2_oracles},      {3, c3_coupling},     {4, c4_linf_clique}, {5, c5_chernoff},
      {6, c6_jensen},      {7, c7_partition},    {8, c8_localization}, {9, c9_thm1},        {10, c10_importance},
      {11, c11_ldp},       {12, c12_fattening},  {13, c13_inscribed},
  };
  const auto it = table.find(id);
  if (it == table.end()) throw std::invalid_argument("unknown criterion " + std::to_string(id));
  const auto t0 = Clock::now();
  CriterionResult res;
  try {
    res = it->second(options);
  } catch (const std::exception& e) {
    res.id = id;
    res.pass = false;
    res.detail = std::string("error: ") + e.what();
  }
  res.seconds = since(t0);
  return res;
}

std::string format_result(const CriterionResult& r) {
  return fmt("%s %2d %s: %s", r.pass ? "PASS" : "FAIL", r.id, r.title.c_str(), r.detail.c_str());
}

}  // namespace rggloc
