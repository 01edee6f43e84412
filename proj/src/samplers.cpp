#include "rggloc/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "rggloc/detail_lookup.hpp"
#include "rggloc/parallel.hpp"
#include "rggloc/statistics.hpp"

namespace rggloc {

namespace {

double slack_exponent(double p_hat) { return std::max(p_hat / 4.0, 3.0 * p_hat / 4.0 - 0.5); }

// log(1 + e^y) without overflow.
double softplus(double y) { return y > 0.0 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y)); }

double log_add(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

PlantPlan plan_planting(const GridModel& grid, double t, const PlantOptions& options) {
  if (!(t >= -1.0)) throw std::invalid_argument("plan_planting: t must be >= -1");
  PlantPlan plan;
  plan.t = t;
  plan.mode = options.mode;
  plan.mu_tilde = expected_sgraded_edges(grid);
  plan.D = grid.D;
  plan.tau_s = grid.tau_s;
  const double p_hat = std::log(plan.mu_tilde) / std::log(grid.n);
  plan.slack = options.slack ? std::pow(grid.n, slack_exponent(p_hat)) : 0.0;
  const double excess = std::sqrt(2.0 * std::max(t, 0.0) * plan.mu_tilde);
  plan.D_prime = (excess + plan.slack) / static_cast<double>(plan.tau_s);
  plan.k = static_cast<std::int64_t>(std::ceil(plan.D_prime));
  plan.log_p_floor = plan.k <= 0 ? 0.0 : log_exact_poisson_tail(plan.D, static_cast<double>(plan.k - 1), TailSide::Upper);
  if (!(plan.D_prime > plan.D)) {
    plan.fallback = true;
    plan.warning = "planted mean D' <= D; using the nominal law";
  }
  return plan;
}

RejectionResult rejection_conditional(const GridModel& grid, double threshold, std::uint64_t budget, std::uint64_t seed,
                                      std::size_t max_keep) {
  if (budget < 1) throw std::invalid_argument("rejection_conditional: budget must be >= 1");
  std::vector<char> hit(budget, 0);
  std::vector<CellConfig> kept(std::min<std::uint64_t>(budget, max_keep));
  parallel_for(budget, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    CellConfig cfg = sample_cell_config(grid, rng);
    if (static_cast<double>(sgraded_edge_count(cfg)) >= threshold) {
      hit[i] = 1;
      if (i < kept.size()) kept[i] = std::move(cfg);
    }
  });
  RejectionResult res;
  res.consumed = budget;
  for (std::size_t i = 0; i < budget; ++i) {
    if (!hit[i]) continue;
    ++res.accepted_count;
    if (res.accepted.size() < max_keep) {
      // Slots past kept.size() were not stored; redraw them (deterministic).
      if (i < kept.size()) {
        res.accepted.push_back(std::move(kept[i]));
      } else {
        Rng rng = Rng::stream(seed, i);
        res.accepted.push_back(sample_cell_config(grid, rng));
      }
    }
  }
  res.acceptance_rate = static_cast<double>(res.accepted_count) / static_cast<double>(budget);
  res.status = res.accepted_count == 0 ? "no acceptances" : "ok";
  return res;
}

std::int64_t sample_poisson_at_least(double D, std::int64_t k, Rng& rng) {
  if (k <= 0) return rng.poisson(D);
  const double log_tail = log_exact_poisson_tail(D, static_cast<double>(k - 1), TailSide::Upper);
  const double u = rng.uniform();
  double acc = 0.0;
  std::int64_t j = k;
  for (;; ++j) {
    acc += std::exp(log_poisson_pmf(j, D) - log_tail);
    if (acc > u) return j;
    // The remaining conditional mass is below double resolution.
    if (j > k + 100000) return j;
  }
}

CellConfig planted_cell_config(const GridModel& grid, const PlantPlan& plan, Rng& rng, std::uint64_t* anchor) {
  CellConfig cfg = sample_cell_config(grid, rng);
  const std::uint64_t a = rng.below(grid.cells());
  if (anchor) *anchor = a;
  if (plan.fallback) return cfg;
  std::vector<std::pair<std::uint64_t, std::int64_t>> updates;
  for (auto lin : clique_set_at(grid, a)) {
    const std::int64_t x =
        plan.mode == PlantMode::Tilted ? rng.poisson(plan.D_prime) : sample_poisson_at_least(plan.D, plan.k, rng);
    updates.emplace_back(lin, x);
  }
  cfg.overwrite(std::move(updates));
  return cfg;
}

namespace {

// Per-anchor aggregates over the clique-shaped window: total count and number
// of cells at or above the conditioned floor. Only anchors whose window meets
// the support are reported, in order of first touch.
struct AnchorSums {
  std::vector<std::uint64_t> anchor;
  std::vector<std::int64_t> sum;
  std::vector<std::int64_t> at_floor;
};

AnchorSums anchor_sums(const CellConfig& cfg, std::int64_t floor_k) {
  const GridModel& grid = *cfg.grid;
  const auto& shape = grid.clique_shape();
  std::vector<CellCoords> neg(shape.size());
  for (std::size_t j = 0; j < shape.size(); ++j) {
    for (int k = 0; k < grid.dim; ++k) neg[j][k] = -shape[j][k];
  }
  AnchorSums out;
  if (grid.cells() <= detail::kDenseLimit) {
    // Dense slots hold 1 + position in `out`, 0 when untouched.
    thread_local std::vector<std::uint32_t> slot;
    if (slot.size() < grid.cells()) slot.assign(grid.cells(), 0);
    for (std::size_t i = 0; i < cfg.index.size(); ++i) {
      const CellCoords c = grid.decode(cfg.index[i]);
      for (const auto& off : neg) {
        const std::uint64_t a = grid.shift(c, off);
        if (slot[a] == 0) {
          out.anchor.push_back(a);
          out.sum.push_back(0);
          out.at_floor.push_back(0);
          slot[a] = static_cast<std::uint32_t>(out.anchor.size());
        }
        const std::size_t pos = slot[a] - 1;
        out.sum[pos] += cfg.count[i];
        out.at_floor[pos] += cfg.count[i] >= floor_k;
      }
    }
    for (auto a : out.anchor) slot[a] = 0;
    return out;
  }
  std::vector<std::pair<std::uint64_t, std::int64_t>> pairs;
  pairs.reserve(cfg.index.size() * shape.size());
  for (std::size_t i = 0; i < cfg.index.size(); ++i) {
    const CellCoords c = grid.decode(cfg.index[i]);
    for (const auto& off : neg) pairs.emplace_back(grid.shift(c, off), cfg.count[i]);
  }
  std::sort(pairs.begin(), pairs.end());
  for (std::size_t i = 0; i < pairs.size();) {
    out.anchor.push_back(pairs[i].first);
    out.sum.push_back(0);
    out.at_floor.push_back(0);
    std::size_t j = i;
    for (; j < pairs.size() && pairs[j].first == pairs[i].first; ++j) {
      out.sum.back() += pairs[j].second;
      out.at_floor.back() += pairs[j].second >= floor_k;
    }
    i = j;
  }
  return out;
}

}  // namespace

double mixture_log_weight(const CellConfig& cfg, const PlantPlan& plan) {
  if (plan.fallback) return 0.0;
  if (plan.mode == PlantMode::Conditioned && plan.k <= 0) return 0.0;
  const GridModel& grid = *cfg.grid;
  const AnchorSums sums = anchor_sums(cfg, std::max<std::int64_t>(plan.k, 1));
  const double tau = static_cast<double>(plan.tau_s);

  double log_lambda = -INFINITY;
  if (plan.mode == PlantMode::Tilted) {
    const double log_ratio = std::log(plan.D_prime / plan.D);
    const double base = -tau * (plan.D_prime - plan.D);
    // The ratio depends on an anchor only through its window sum, so anchors
    // are grouped by sum (untouched anchors have sum 0).
    const std::int64_t top = sums.sum.empty() ? 0 : *std::max_element(sums.sum.begin(), sums.sum.end());
    std::vector<std::uint64_t> mult(static_cast<std::size_t>(top) + 1, 0);
    for (auto sum : sums.sum) ++mult[static_cast<std::size_t>(sum)];
    mult[0] += grid.cells() - sums.anchor.size();
    for (std::size_t v = 0; v < mult.size(); ++v) {
      if (mult[v] == 0) continue;
      log_lambda = log_add(log_lambda, std::log(static_cast<double>(mult[v])) + static_cast<double>(v) * log_ratio + base);
    }
  } else {
    const auto need = static_cast<std::int64_t>(grid.clique_shape().size());
    std::uint64_t qualifying = 0;
    for (auto c : sums.at_floor) qualifying += c == need;
    if (qualifying > 0) log_lambda = std::log(static_cast<double>(qualifying)) - tau * plan.log_p_floor;
  }
  log_lambda -= std::log(static_cast<double>(grid.cells()));
  return std::log(2.0) - softplus(log_lambda);
}

WeightedSample planted_cell_sampler(const GridModel& grid, double t, std::uint64_t seed, const PlantOptions& options) {
  if (!(t > 0.0)) throw std::invalid_argument("planted_cell_sampler: t must be positive");
  const PlantPlan plan = plan_planting(grid, t, options);
  Rng rng(mix64(seed));
  WeightedSample ws;
  ws.planted = !plan.fallback;
  ws.config = planted_cell_config(grid, plan, rng, &ws.anchor);
  ws.log_weight = mixture_log_weight(ws.config, plan);
  return ws;
}

namespace {

// Aggregates per-replica log values of 1{event} * weight, in index order.
void summarize(const std::vector<double>& log_v, TailEstimate& est) {
  const auto N = static_cast<double>(log_v.size());
  double L = -INFINITY;
  for (double v : log_v) {
    L = std::max(L, v);
    if (v > -INFINITY) ++est.hits;
  }
  est.n_replicas = log_v.size();
  if (L == -INFINITY) {
    est.log_prob = -INFINITY;
    est.std_err = 0.0;
    est.log_std_err = INFINITY;
    est.ess = 0.0;
    est.unreliable = true;
    return;
  }
  double s1 = 0.0, s2 = 0.0;
  for (double v : log_v) {
    if (v == -INFINITY) continue;
    const double e = std::exp(v - L);
    s1 += e;
    s2 += e * e;
  }
  const double mean = s1 / N;
  const double var = std::max(0.0, (s2 / N - mean * mean) * N / (N - 1.0));
  const double se = std::sqrt(var / N);
  est.log_prob = L + std::log(mean);
  est.std_err = std::exp(L) * se;
  est.log_std_err = se / mean;
  est.ess = s1 * s1 / s2;
  est.unreliable = est.ess < 10.0;
}

}  // namespace

TailEstimate importance_estimate_tail(const GridModel& grid, double t, std::uint64_t replicas, std::uint64_t seed,
                                      const PlantOptions& options) {
  if (replicas < 100) throw std::invalid_argument("importance_estimate_tail: replicas must be >= 100");
  const PlantPlan plan = plan_planting(grid, t, options);
  TailEstimate est;
  est.t = t;
  est.method = "importance";
  est.threshold = (1.0 + t) * plan.mu_tilde;
  est.warning = plan.warning;
  std::vector<double> log_v(replicas, -INFINITY);
  parallel_for(replicas, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    const bool planted = (i % 2 == 1) && !plan.fallback;
    const CellConfig cfg = planted ? planted_cell_config(grid, plan, rng) : sample_cell_config(grid, rng);
    if (static_cast<double>(sgraded_edge_count(cfg)) >= est.threshold) log_v[i] = mixture_log_weight(cfg, plan);
  });
  summarize(log_v, est);
  return est;
}

TailEstimate rejection_tail_estimate(const GridModel& grid, double t, std::uint64_t replicas, std::uint64_t seed) {
  if (replicas < 1) throw std::invalid_argument("rejection_tail_estimate: replicas must be >= 1");
  TailEstimate est;
  est.t = t;
  est.method = "rejection";
  est.threshold = (1.0 + t) * expected_sgraded_edges(grid);
  std::vector<double> log_v(replicas, -INFINITY);
  parallel_for(replicas, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    const CellConfig cfg = sample_cell_config(grid, rng);
    if (static_cast<double>(sgraded_edge_count(cfg)) >= est.threshold) log_v[i] = 0.0;
  });
  summarize(log_v, est);
  return est;
}

double exact_tail_enumerate(const std::vector<std::vector<bool>>& adjacency, double D, double threshold,
                            std::uint64_t node_budget) {
  const std::size_t cells = adjacency.size();
  if (cells == 0) throw std::invalid_argument("exact_tail_enumerate: no cells");
  std::vector<std::int64_t> x(cells, 0);
  std::uint64_t nodes = 0;
  double total = 0.0;
  auto tail_from = [&](std::int64_t v) {
    return v <= 0 ? 1.0 : exact_poisson_tail(D, static_cast<double>(v - 1), TailSide::Upper);
  };
  // The edge count is nondecreasing in every coordinate, so once the prefix
  // (with later cells empty) reaches the threshold, every larger value of the
  // current cell does too and its whole Poisson tail is added at once.
  auto rec = [&](auto&& self, std::size_t i, double edges_before, double prob) -> void {
    double link = 0.0;
    for (std::size_t j = 0; j < i; ++j) {
      if (adjacency[i][j]) link += static_cast<double>(x[j]);
    }
    for (std::int64_t v = 0;; ++v) {
      if (++nodes > node_budget) throw BudgetExceeded("exact_tail_enumerate: node budget exhausted");
      const double vd = static_cast<double>(v);
      const double edges = edges_before + vd * (vd - 1.0) / 2.0 + vd * link;
      if (edges >= threshold) {
        total += prob * tail_from(v);
        x[i] = 0;
        return;
      }
      if (i + 1 < cells) {
        x[i] = v;
        self(self, i + 1, edges, prob * std::exp(log_poisson_pmf(v, D)));
      }
    }
  };
  rec(rec, 0, 0.0, 1.0);
  return std::min(total, 1.0);
}

TailEstimate exact_tail_tiny(const GridModel& grid, double threshold, std::uint64_t node_budget) {
  if (grid.cells() > 6) throw std::invalid_argument("exact_tail_tiny: needs m^d <= 6");
  if (grid.D > 5.0) throw std::invalid_argument("exact_tail_tiny: needs D <= 5");
  const std::size_t cells = grid.cells();
  std::vector<std::vector<bool>> adj(cells, std::vector<bool>(cells, false));
  for (std::size_t a = 0; a < cells; ++a) {
    for (std::size_t b = 0; b < cells; ++b) adj[a][b] = a != b && cell_metric(a, b, grid) <= grid.s;
  }
  TailEstimate est;
  est.method = "exact";
  est.threshold = threshold;
  const double mu_tilde = expected_sgraded_edges(grid);
  est.t = threshold / mu_tilde - 1.0;
  est.log_prob = std::log(exact_tail_enumerate(adj, grid.D, threshold, node_budget));
  est.std_err = 0.0;
  est.log_std_err = 0.0;
  est.truncation_error = 0.0;
  return est;
}

std::int64_t planted_continuum_count(const ModelParams& params, double delta, bool slack) {
  if (!(delta > 0.0)) throw std::invalid_argument("planted_continuum_count: delta must be positive");
  const double mu = expected_edges(params);
  const double extra = slack ? std::pow(params.n, slack_exponent(params.p_hat)) : 0.0;
  return static_cast<std::int64_t>(std::ceil(std::sqrt(2.0 * delta * mu) + extra));
}

PointSet planted_continuum_sampler(const ModelParams& params, double delta, std::uint64_t seed,
                                   std::vector<double> center, bool slack) {
  const int d = params.norm.dim;
  if (center.empty()) center.assign(d, 0.5);
  if (static_cast<int>(center.size()) != d) throw std::invalid_argument("planted_continuum_sampler: center dimension");
  const std::int64_t planted = planted_continuum_count(params, delta, slack);
  Rng rng(mix64(seed));
  PointSet ps = sample_ppp(params.n, params.norm, rng);
  const double R = params.r / 2.0;
  std::vector<double> off(d), p(d);
  for (std::int64_t k = 0; k < planted;) {
    for (int j = 0; j < d; ++j) off[j] = (2.0 * rng.uniform() - 1.0) * R;
    if (params.norm.of(off.data()) > R) continue;
    for (int j = 0; j < d; ++j) {
      p[j] = center[j] + off[j];
      p[j] -= std::floor(p[j]);
    }
    ps.push(p);
    ++k;
  }
  return ps;
}

void write_tail_csv_header(std::ostream& os) { os << "t,n,r,s,norm,method,log_prob,std_err,replicas,seed\n"; }

void write_tail_csv_row(std::ostream& os, const TailEstimate& est, const GridModel& grid, std::uint64_t seed) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d,%s,%s,%.17g,%.17g,%llu,%llu\n", est.t, grid.n, grid.r, grid.s,
                grid.norm.name().c_str(), est.method.c_str(), est.log_prob, est.std_err,
                static_cast<unsigned long long>(est.n_replicas), static_cast<unsigned long long>(seed));
  os << buf;
}

}  // namespace rggloc
