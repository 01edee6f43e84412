#include "rggloc/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "rggloc/statistics.hpp"

namespace rggloc {

double rate_function(double t, double p) {
  if (!(t > 0.0)) throw std::invalid_argument("rate_function: t must be positive");
  if (!(p > 0.0 && p < 2.0)) throw std::invalid_argument("rate_function: p must lie in (0, 2)");
  return (2.0 - p) / 2.0 * std::sqrt(2.0 * t);
}

NormalizedTail normalized_log_tail(const TailEstimate& estimate, double mu, double n) {
  if (!(mu > 0.0) || !(n > 1.0)) throw std::invalid_argument("normalized_log_tail: need mu > 0 and n > 1");
  const double speed = std::sqrt(mu) * std::log(n);
  NormalizedTail out;
  out.value = estimate.log_prob / speed;
  out.std_err = estimate.log_std_err / speed;
  out.unreliable = estimate.unreliable;
  return out;
}

SandwichBound sandwich_bounds(const ModelParams& params, const GridModel& grid, double t, double eps) {
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("sandwich_bounds: eps must lie in (0, 1/2)");
  if (!(t > 0.0)) throw std::invalid_argument("sandwich_bounds: t must be positive");
  SandwichBound b;
  b.t = t;
  b.eps = eps;
  SandwichComponents& c = b.components;
  c.mu = expected_edges(params);
  c.excess = std::sqrt(2.0 * t * c.mu);
  const double p = params.p_hat;
  c.slack = std::pow(params.n, std::max(p / 4.0, 3.0 * p / 4.0 - 0.5));
  c.log_one_minus_eps = std::log1p(-eps);

  c.log_clique_sets = grid.dim * static_cast<double>(grid.tau_s) * std::log(static_cast<double>(grid.m));
  c.w = static_cast<double>(grid.tau_s) * grid.D;
  c.upper_threshold = c.excess * (1.0 - eps);
  c.log_upper_tail = log_exact_poisson_tail(c.w, c.upper_threshold, TailSide::Upper);
  c.raw_upper_log = c.log_clique_sets - c.log_one_minus_eps + c.log_upper_tail;
  b.upper_log = std::min(0.0, c.raw_upper_log);

  c.n_tau = params.n * ball_volume_tau(params.r, params.norm);
  c.lower_count = static_cast<std::int64_t>(std::ceil(c.excess + c.slack));
  c.log_lower_pmf = log_poisson_pmf(c.lower_count, c.n_tau);
  b.lower_log = c.log_one_minus_eps + c.log_lower_pmf;

  c.assumptions =
      "upper: the localized clique set carries the excess with probability >= 1 - eps; "
      "lower: the background edge count does not fall below its mean by more than the slack with probability >= 1 - eps";
  return b;
}

void write_sandwich_csv_header(std::ostream& os) {
  os << "t,n,lower_log,upper_log,normalized_lower,normalized_upper,I_t\n";
}

void write_sandwich_csv_row(std::ostream& os, const SandwichBound& b, const ModelParams& params) {
  const double speed = std::sqrt(b.components.mu) * std::log(params.n);
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", b.t, params.n, b.lower_log, b.upper_log,
                b.lower_log / speed, b.upper_log / speed, rate_function(b.t, params.p_hat));
  os << buf;
}

}  // namespace rggloc
