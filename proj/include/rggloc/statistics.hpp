#pragma once

#include <cstdint>

#include "rggloc/sgraded.hpp"

namespace rggloc {

struct DerivedScales {
  double n = 0.0;
  double mu_tilde = 0.0;
  double tau_s = 0.0;
  double D = 0.0;
  double delta_tilde = 0.0;
  double delta_star = 0.0;
  double p_hat = 0.0;  // log(mu_tilde) / log(n)
  double q = 0.0;
  double w = 0.0;
  double a = 0.0;
  double M = 0.0;
  double z = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double xi = 0.0;

  static DerivedScales compute(const GridModel& grid, double delta_tilde, double delta_star, double xi);
  // xi = min(eps^40, (2 tau)^-10, (2 tau)^-4 / 4).
  static double xi_from_eps(double eps_tilde, double tau_s);

  double n_pow(double e) const;
  // Mass threshold 1 - 2 xi / log n used by the greedy prefix.
  double mass_threshold() const;
};

double rate_Y(std::int64_t x, double D);

// Edge counts behind Q, before the 2/q^2 normalisation. Only the support of
// cfg inside W matters, so W may omit empty cells.
std::int64_t internal_edge_count(const IndexSet& W, const CellConfig& cfg);
std::int64_t cross_edge_count(const IndexSet& W, const IndexSet& W2, const CellConfig& cfg);
// Nonzero cells of cfg outside W (the part of the complement that carries mass).
IndexSet complement_support(const IndexSet& W, const CellConfig& cfg);

double Q_internal(const IndexSet& W, const CellConfig& cfg, const DerivedScales& sc);
double Q_cross(const IndexSet& W, const IndexSet& W2, const CellConfig& cfg, const DerivedScales& sc);
double V_count(const IndexSet& W, const CellConfig& cfg, const DerivedScales& sc);
double h_frac(const IndexSet& W, const GridModel& grid);
double P_excess(std::uint64_t cell, const IndexSet& W, const CellConfig& cfg, const DerivedScales& sc);

// V(W) [log(q/w) + log V(W) - log h(W) - 1]; zero when V(W) = 0.
double jensen_lower_bound(const IndexSet& W, const CellConfig& cfg, const DerivedScales& sc);
// (1/q) sum of Y_I over W, the quantity the bound controls.
double normalized_Y_sum(const IndexSet& W, const CellConfig& cfg, const DerivedScales& sc);

enum class TailSide { Upper, Lower };

// exp(-t [log(t/D) - 1] - D); upper side needs t >= D, lower side t <= D.
double poisson_tail_bound(double D, double t, TailSide side);
// P(X > t) or P(X < t) for X ~ Poisson(D), by direct summation.
double exact_poisson_tail(double D, double t, TailSide side);
double log_exact_poisson_tail(double D, double t, TailSide side);
double log_poisson_pmf(std::int64_t k, double D);

bool event_L(const CellConfig& cfg, const DerivedScales& sc);
bool event_A(const CellConfig& cfg, const DerivedScales& sc);
bool event_B(const CellConfig& cfg, const DerivedScales& sc);
bool event_D(const CellConfig& cfg, const DerivedScales& sc);

// Edge count after zeroing every cell with X_I > M.
std::int64_t truncated_edge_count(const CellConfig& cfg, double M);
// Sum of the k largest Y values over all m^d cells (empty cells have Y = D).
double top_Y_sum(const CellConfig& cfg, std::uint64_t k);

}  // namespace rggloc
