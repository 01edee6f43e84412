#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rggloc/rng.hpp"
#include "rggloc/torus.hpp"

namespace rggloc {

// Points stored row-major (size() rows of dim coordinates), in insertion order.
struct PointSet {
  int dim = 2;
  double intensity = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> coords;

  std::size_t size() const { return dim > 0 ? coords.size() / static_cast<std::size_t>(dim) : 0; }
  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  void push(std::span<const double> x) { coords.insert(coords.end(), x.begin(), x.end()); }
};

struct ModelParams {
  double n = 0.0;
  double r = 0.0;
  NormSpec norm;
  double delta_star = 0.5;
  double p_hat = 0.0;  // log(mu) / log(n)

  static ModelParams make(double n, double r, const NormSpec& norm, double delta_star);
  // Chooses r so that the expected edge count equals n^p_target exactly:
  // r = (2 n^(p_target - 2) / nu)^(1/d).
  static ModelParams from_p_target(double n, double p_target, const NormSpec& norm, double delta_star);

  // Soft regime checks on r and p_hat; an empty list means the regime holds.
  std::vector<std::string> regime_warnings() const;
};

double expected_edges(const ModelParams& params);

PointSet sample_ppp(double n, const NormSpec& norm, std::uint64_t seed);
PointSet sample_ppp(double n, const NormSpec& norm, Rng& rng);

// Pairs at torus distance <= r, counted with a bucket grid of side max(r, 1/512).
std::int64_t edge_count(const PointSet& ps, double r, const NormSpec& norm);
std::int64_t edge_count_bruteforce(const PointSet& ps, double r, const NormSpec& norm);

std::int64_t count_in_probe(const PointSet& ps, const ConvexProbe& probe, const NormSpec& norm);

// Spatial index over a point set for repeated local queries.
class PointBuckets {
 public:
  PointBuckets(const PointSet& ps, double side);
  // Calls f(point index) for every point in buckets overlapping the cube of
  // half-width `reach` around x (a superset of points within distance reach).
  template <class F>
  void for_each_near(std::span<const double> x, double reach, F&& f) const;
  int per_axis() const { return per_axis_; }

 private:
  void collect(std::span<const double> x, double reach, std::vector<std::uint32_t>& out) const;
  const PointSet* ps_;
  int per_axis_;
  std::vector<std::uint32_t> start_;
  std::vector<std::uint32_t> order_;
};

template <class F>
void PointBuckets::for_each_near(std::span<const double> x, double reach, F&& f) const {
  std::vector<std::uint32_t> buckets;
  collect(x, reach, buckets);
  for (std::uint32_t b : buckets) {
    for (std::uint32_t k = start_[b]; k < start_[b + 1]; ++k) f(order_[k]);
  }
}

// CSV: header line "dim,n,seed", a line with those values, then one row per
// point with 17 significant digits.
void write_pointset_csv(std::ostream& os, const PointSet& ps);
PointSet read_pointset_csv(std::istream& is);

}  // namespace rggloc
