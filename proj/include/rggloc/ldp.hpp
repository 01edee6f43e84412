#pragma once

#include <iosfwd>
#include <string>

#include "rggloc/point_process.hpp"
#include "rggloc/samplers.hpp"
#include "rggloc/sgraded.hpp"

namespace rggloc {

// I(t) = ((2 - p) / 2) sqrt(2 t).
double rate_function(double t, double p);

struct NormalizedTail {
  double value = 0.0;    // log_prob / (sqrt(mu) log n)
  double std_err = 0.0;  // delta method, same scale
  bool unreliable = false;
};

NormalizedTail normalized_log_tail(const TailEstimate& estimate, double mu, double n);

struct SandwichComponents {
  double mu = 0.0;
  double excess = 0.0;              // sqrt(2 t mu)
  double slack = 0.0;               // n^z
  // Upper side.
  double log_clique_sets = 0.0;     // d tau_s log m
  double w = 0.0;                   // tau_s D
  double upper_threshold = 0.0;     // sqrt(2 t mu)(1 - eps)
  double log_upper_tail = 0.0;      // log P(Poisson(w) > threshold)
  double raw_upper_log = 0.0;       // before capping at 0
  // Lower side.
  double n_tau = 0.0;
  std::int64_t lower_count = 0;     // ceil(sqrt(2 t mu) + n^z)
  double log_lower_pmf = 0.0;       // log P(Poisson(n tau) = lower_count)
  double log_one_minus_eps = 0.0;
  std::string assumptions;
};

struct SandwichBound {
  double t = 0.0;
  double lower_log = 0.0;
  double upper_log = 0.0;
  double eps = 0.0;
  SandwichComponents components;
};

SandwichBound sandwich_bounds(const ModelParams& params, const GridModel& grid, double t, double eps);

// CSV: t,n,lower_log,upper_log,normalized_lower,normalized_upper,I_t
void write_sandwich_csv_header(std::ostream& os);
void write_sandwich_csv_row(std::ostream& os, const SandwichBound& b, const ModelParams& params);

}  // namespace rggloc
