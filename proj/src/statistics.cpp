#include "rggloc/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "rggloc/detail_lookup.hpp"

namespace rggloc {

DerivedScales DerivedScales::compute(const GridModel& grid, double delta_tilde, double delta_star, double xi) {
  if (!(delta_tilde > 0.0)) throw std::invalid_argument("delta_tilde must be positive");
  if (!(grid.n > 1.0)) throw std::invalid_argument("derived scales need n > 1");
  DerivedScales sc;
  sc.n = grid.n;
  sc.mu_tilde = expected_sgraded_edges(grid);
  sc.tau_s = static_cast<double>(grid.tau_s);
  sc.D = grid.D;
  sc.delta_tilde = delta_tilde;
  sc.delta_star = delta_star;
  const double logn = std::log(sc.n);
  sc.p_hat = std::log(sc.mu_tilde) / logn;
  sc.q = std::sqrt(2.0 * delta_tilde * sc.mu_tilde);
  sc.w = sc.tau_s * sc.D;
  sc.a = delta_star / 25.0;
  sc.M = std::max(sc.D * std::pow(sc.n, sc.a), std::pow(sc.n, sc.a));
  const double p = sc.p_hat;
  sc.z = std::max(p / 4.0, 3.0 * p / 4.0 - 0.5);
  sc.alpha = std::min(1.0 - p / 2.0 - sc.a / 2.0, p / 2.0 - sc.a / 2.0);
  sc.beta = p / 2.0 - sc.a / 4.0;
  sc.gamma = p - 2.0 * sc.a;
  sc.xi = xi;
  return sc;
}

double DerivedScales::xi_from_eps(double eps_tilde, double tau_s) {
  const double two_tau = 2.0 * tau_s;
  return std::min({std::pow(eps_tilde, 40.0), std::pow(two_tau, -10.0), std::pow(two_tau, -4.0) / 4.0});
}

double DerivedScales::n_pow(double e) const { return std::pow(n, e); }

double DerivedScales::mass_threshold() const { return 1.0 - 2.0 * xi / std::log(n); }

double rate_Y(std::int64_t x, double D) {
  if (!(D > 0.0)) throw std::invalid_argument("rate_Y: D must be positive");
  if (x < 0) throw std::invalid_argument("rate_Y: x must be nonnegative");
  if (x == 0) return D;
  const double xd = static_cast<double>(x);
  return xd * (std::log(xd / D) - 1.0) + D;
}

IndexSet complement_support(const IndexSet& W, const CellConfig& cfg) {
  IndexSet out;
  for (auto lin : cfg.index) {
    if (!set_contains(W, lin)) out.push_back(lin);
  }
  return out;
}

namespace {

// Restricts cfg to the cells of W (sparse view).
void restrict(const IndexSet& W, const CellConfig& cfg, std::vector<std::uint64_t>& idx, std::vector<std::int64_t>& cnt) {
  std::size_t a = 0, b = 0;
  while (a < W.size() && b < cfg.index.size()) {
    if (W[a] < cfg.index[b]) {
      ++a;
    } else if (cfg.index[b] < W[a]) {
      ++b;
    } else {
      idx.push_back(W[a]);
      cnt.push_back(cfg.count[b]);
      ++a;
      ++b;
    }
  }
}

__int128 neighbour_products(const std::vector<std::uint64_t>& idx, const std::vector<std::int64_t>& cnt,
                            const detail::CountLookup& other, const GridModel& grid) {
  __int128 acc = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const CellCoords c = grid.decode(idx[k]);
    __int128 inner = 0;
    for (const auto& off : grid.neighbor_offsets()) inner += other.get(grid.shift(c, off));
    acc += static_cast<__int128>(cnt[k]) * inner;
  }
  return acc;
}

std::int64_t narrow(__int128 v) {
  if (v > std::numeric_limits<std::int64_t>::max()) throw std::overflow_error("edge count overflows int64");
  return static_cast<std::int64_t>(v);
}

}  // namespace

std::int64_t internal_edge_count(const IndexSet& W, const CellConfig& cfg) {
  std::vector<std::uint64_t> idx;
  std::vector<std::int64_t> cnt;
  restrict(W, cfg, idx, cnt);
  __int128 self = 0;
  for (auto c : cnt) self += static_cast<__int128>(c) * (c - 1) / 2;
  detail::CountLookup look(*cfg.grid, idx, cnt);
  const __int128 pairs = neighbour_products(idx, cnt, look, *cfg.grid);
  return narrow(self + pairs / 2);
}

std::int64_t cross_edge_count(const IndexSet& W, const IndexSet& W2, const CellConfig& cfg) {
  IndexSet both;
  std::set_intersection(W.begin(), W.end(), W2.begin(), W2.end(), std::back_inserter(both));
  if (!both.empty()) throw std::invalid_argument("Q_cross: sets must be disjoint");
  std::vector<std::uint64_t> ia, ib;
  std::vector<std::int64_t> ca, cb;
  restrict(W, cfg, ia, ca);
  restrict(W2, cfg, ib, cb);
  detail::CountLookup look(*cfg.grid, ib, cb);
  return narrow(neighbour_products(ia, ca, look, *cfg.grid));
}

double Q_internal(const IndexSet& W, const CellConfig& cfg, const DerivedScales& sc) {
  return 2.0 * static_cast<double>(internal_edge_count(W, cfg)) / (sc.q * sc.q);
}

double Q_cross(const IndexSet& W, const IndexSet& W2, const CellConfig& cfg, const DerivedScales& sc) {
  return 2.0 * static_cast<double>(cross_edge_count(W, W2, cfg)) / (sc.q * sc.q);
}

double V_count(const IndexSet& W, const CellConfig& cfg, const DerivedScales& sc) {
  std::vector<std::uint64_t> idx;
  std::vector<std::int64_t> cnt;
  restrict(W, cfg, idx, cnt);
  std::int64_t total = 0;
  for (auto c : cnt) total += c;
  return static_cast<double>(total) / sc.q;
}

double h_frac(const IndexSet& W, const GridModel& grid) {
  return static_cast<double>(W.size()) / static_cast<double>(grid.tau_s);
}

double P_excess(std::uint64_t cell, const IndexSet& W, const CellConfig& cfg, const DerivedScales& sc) {
  std::vector<std::uint64_t> idx;
  std::vector<std::int64_t> cnt;
  restrict(W, cfg, idx, cnt);
  std::int64_t total = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (cell_metric(cell, idx[k], *cfg.grid) > cfg.grid->s) total += cnt[k];
  }
  return static_cast<double>(total) / sc.q;
}

double normalized_Y_sum(const IndexSet& W, const CellConfig& cfg, const DerivedScales& sc) {
  std::vector<std::uint64_t> idx;
  std::vector<std::int64_t> cnt;
  restrict(W, cfg, idx, cnt);
  double acc = 0.0;
  for (auto c : cnt) acc += rate_Y(c, sc.D);
  const double empty = static_cast<double>(W.size() - idx.size());
  acc += empty * sc.D;
  return acc / sc.q;
}

double jensen_lower_bound(const IndexSet& W, const CellConfig& cfg, const DerivedScales& sc) {
  if (W.empty()) throw std::invalid_argument("jensen_lower_bound: empty set");
  const double V = V_count(W, cfg, sc);
  if (V == 0.0) return 0.0;
  const double h = static_cast<double>(W.size()) / sc.tau_s;
  return V * (std::log(sc.q / sc.w) + std::log(V) - std::log(h) - 1.0);
}

double poisson_tail_bound(double D, double t, TailSide side) {
  if (!(D > 0.0) || t < 0.0) throw std::invalid_argument("poisson_tail_bound: need D > 0 and t >= 0");
  if (side == TailSide::Upper && t < D) throw std::invalid_argument("poisson_tail_bound: upper side needs t >= D");
  if (side == TailSide::Lower && t > D) throw std::invalid_argument("poisson_tail_bound: lower side needs t <= D");
  const double tlogt = t > 0.0 ? t * (std::log(t / D) - 1.0) : 0.0;
  return std::exp(-tlogt - D);
}

double log_poisson_pmf(std::int64_t k, double D) {
  if (k < 0) return -std::numeric_limits<double>::infinity();
  if (D == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  const double kd = static_cast<double>(k);
  return kd * std::log(D) - D - std::lgamma(kd + 1.0);
}

namespace {

// log sum_{k >= k0} pmf(k) for k0 > D (terms decrease), or any k0 when the
// summation is run to convergence.
double log_sum_up(std::int64_t k0, double D) {
  const double first = log_poisson_pmf(k0, D);
  double term = 1.0, sum = 0.0;
  for (std::int64_t k = k0;; ++k) {
    sum += term;
    term *= D / static_cast<double>(k + 1);
    if (term < sum * 1e-17 && static_cast<double>(k + 1) > D) break;
  }
  return first + std::log(sum);
}

// log sum_{k = 0}^{k1} pmf(k), summing downward from k1 (k1 < D).
double log_sum_down(std::int64_t k1, double D) {
  const double first = log_poisson_pmf(k1, D);
  double term = 1.0, sum = 0.0;
  for (std::int64_t k = k1; k >= 0; --k) {
    sum += term;
    if (k == 0) break;
    term *= static_cast<double>(k) / D;
    if (term < sum * 1e-17) break;
  }
  return first + std::log(sum);
}

}  // namespace

double log_exact_poisson_tail(double D, double t, TailSide side) {
  if (D < 0.0) throw std::invalid_argument("exact_poisson_tail: D must be nonnegative");
  const double neg_inf = -std::numeric_limits<double>::infinity();
  if (side == TailSide::Upper) {
    // P(X > t) = P(X >= k0), k0 the least integer above t.
    const auto k0 = static_cast<std::int64_t>(std::floor(t)) + 1;
    if (k0 <= 0) return 0.0;
    if (D == 0.0) return neg_inf;
    if (static_cast<double>(k0) > D) return log_sum_up(k0, D);
    return std::log1p(-std::exp(log_sum_down(k0 - 1, D)));
  }
  // P(X < t) = P(X <= k1), k1 the greatest integer below t.
  const auto k1 = static_cast<std::int64_t>(std::ceil(t)) - 1;
  if (k1 < 0) return neg_inf;
  if (D == 0.0) return 0.0;
  if (static_cast<double>(k1) < D) return log_sum_down(k1, D);
  return std::log1p(-std::exp(log_sum_up(k1 + 1, D)));
}

double exact_poisson_tail(double D, double t, TailSide side) { return std::exp(log_exact_poisson_tail(D, t, side)); }

bool event_L(const CellConfig& cfg, const DerivedScales& sc) {
  return static_cast<double>(sgraded_edge_count(cfg)) >= (1.0 + sc.delta_tilde) * sc.mu_tilde;
}

bool event_A(const CellConfig& cfg, const DerivedScales& sc) {
  std::uint64_t large = 0;
  for (auto c : cfg.count) {
    if (static_cast<double>(c) > sc.M) ++large;
  }
  return static_cast<double>(large) > sc.n_pow(sc.alpha);
}

double top_Y_sum(const CellConfig& cfg, std::uint64_t k) {
  const double D = cfg.grid->D;
  std::vector<double> ys;
  ys.reserve(cfg.count.size());
  for (auto c : cfg.count) ys.push_back(rate_Y(c, D));
  std::sort(ys.begin(), ys.end(), std::greater<>());
  const std::uint64_t empty = cfg.grid->cells() - cfg.index.size();
  double acc = 0.0;
  std::size_t used = 0;
  std::uint64_t empty_used = 0;
  for (std::uint64_t taken = 0; taken < k; ++taken) {
    const bool have_y = used < ys.size();
    const bool have_empty = empty_used < empty;
    if (have_y && (!have_empty || ys[used] >= D)) {
      acc += ys[used++];
    } else if (have_empty) {
      acc += D;
      ++empty_used;
    } else {
      break;
    }
  }
  return acc;
}

bool event_B(const CellConfig& cfg, const DerivedScales& sc) {
  const auto k = static_cast<std::uint64_t>(std::floor(sc.n_pow(sc.alpha)));
  const double threshold = sc.q * (std::log(sc.q / sc.w) - 1.0) + sc.n_pow(sc.beta);
  return top_Y_sum(cfg, k) > threshold;
}

std::int64_t truncated_edge_count(const CellConfig& cfg, double M) {
  CellConfig cut;
  cut.grid = cfg.grid;
  for (std::size_t k = 0; k < cfg.index.size(); ++k) {
    if (static_cast<double>(cfg.count[k]) <= M) {
      cut.index.push_back(cfg.index[k]);
      cut.count.push_back(cfg.count[k]);
    }
  }
  return sgraded_edge_count(cut);
}

bool event_D(const CellConfig& cfg, const DerivedScales& sc) {
  return static_cast<double>(truncated_edge_count(cfg, sc.M)) > sc.mu_tilde + sc.n_pow(sc.gamma);
}

}  // namespace rggloc
