#include "rggloc/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rggloc {

ModelParams ModelParams::make(double n, double r, const NormSpec& norm, double delta_star) {
  if (!(n > 0.0)) throw std::invalid_argument("intensity n must be positive");
  if (!(r > 0.0 && r < 0.5)) throw std::invalid_argument("radius r must lie in (0, 1/2)");
  if (!(delta_star > 0.0 && delta_star < 1.0)) throw std::invalid_argument("delta_star must lie in (0, 1)");
  ModelParams p;
  p.n = n;
  p.r = r;
  p.norm = norm;
  p.delta_star = delta_star;
  const double mu = expected_edges(p);
  p.p_hat = (n > 1.0 && mu > 0.0) ? std::log(mu) / std::log(n) : 0.0;
  return p;
}

ModelParams ModelParams::from_p_target(double n, double p_target, const NormSpec& norm, double delta_star) {
  if (!(n > 1.0)) throw std::invalid_argument("p_target requires n > 1");
  const double r = std::pow(2.0 * std::pow(n, p_target - 2.0) / norm.nu, 1.0 / norm.dim);
  return make(n, r, norm, delta_star);
}

std::vector<std::string> ModelParams::regime_warnings() const {
  std::vector<std::string> out;
  const int d = norm.dim;
  const double lo = std::pow(n, (delta_star - 2.0) / d);
  const double hi = std::pow(n, -delta_star / d);
  if (r < lo || r > hi) {
    std::ostringstream os;
    os << "r=" << r << " outside [" << lo << ", " << hi << "] for delta_star=" << delta_star;
    out.push_back(os.str());
  }
  if (p_hat < delta_star - 0.1 || p_hat > 2.0 - delta_star + 0.1) {
    std::ostringstream os;
    os << "p_hat=" << p_hat << " outside [delta_star, 2 - delta_star] (tolerance 0.1)";
    out.push_back(os.str());
  }
  return out;
}

double expected_edges(const ModelParams& params) {
  return params.n * params.n * params.norm.nu * std::pow(params.r, params.norm.dim) / 2.0;
}

PointSet sample_ppp(double n, const NormSpec& norm, Rng& rng) {
  if (n < 0.0) throw std::invalid_argument("sample_ppp: n must be nonnegative");
  PointSet ps;
  ps.dim = norm.dim;
  ps.intensity = n;
  const std::int64_t count = rng.poisson(n);
  ps.coords.resize(static_cast<std::size_t>(count) * norm.dim);
  for (double& c : ps.coords) c = rng.uniform();
  return ps;
}

PointSet sample_ppp(double n, const NormSpec& norm, std::uint64_t seed) {
  Rng rng(mix64(seed));
  PointSet ps = sample_ppp(n, norm, rng);
  ps.seed = seed;
  return ps;
}

std::int64_t edge_count_bruteforce(const PointSet& ps, double r, const NormSpec& norm) {
  std::int64_t edges = 0;
  const std::size_t count = ps.size();
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = i + 1; j < count; ++j) {
      if (torus_distance(ps.point(i), ps.point(j), norm) <= r) ++edges;
    }
  }
  return edges;
}

namespace {

int bucket_of(double x, int per_axis) {
  int b = static_cast<int>(x * per_axis);
  return std::clamp(b, 0, per_axis - 1);
}

}  // namespace

PointBuckets::PointBuckets(const PointSet& ps, double side) : ps_(&ps) {
  per_axis_ = std::max(1, static_cast<int>(std::floor(1.0 / side)));
  std::size_t total = 1;
  for (int k = 0; k < ps.dim; ++k) total *= static_cast<std::size_t>(per_axis_);
  start_.assign(total + 1, 0);
  const std::size_t count = ps.size();
  std::vector<std::uint32_t> key(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto p = ps.point(i);
    std::size_t b = 0;
    for (int k = 0; k < ps.dim; ++k) b = b * per_axis_ + bucket_of(p[k], per_axis_);
    key[i] = static_cast<std::uint32_t>(b);
    ++start_[b + 1];
  }
  for (std::size_t b = 0; b < total; ++b) start_[b + 1] += start_[b];
  order_.resize(count);
  std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
  for (std::size_t i = 0; i < count; ++i) order_[fill[key[i]]++] = static_cast<std::uint32_t>(i);
}

void PointBuckets::collect(std::span<const double> x, double reach, std::vector<std::uint32_t>& out) const {
  const int d = ps_->dim;
  int lo[kMaxDim], span[kMaxDim];
  for (int k = 0; k < d; ++k) {
    const int a = static_cast<int>(std::floor((x[k] - reach) * per_axis_));
    const int b = static_cast<int>(std::floor((x[k] + reach) * per_axis_));
    lo[k] = a;
    span[k] = std::min(b - a + 1, per_axis_);
  }
  int idx[kMaxDim] = {0, 0, 0, 0};
  for (;;) {
    std::uint32_t b = 0;
    for (int k = 0; k < d; ++k) {
      int c = (lo[k] + idx[k]) % per_axis_;
      if (c < 0) c += per_axis_;
      b = b * per_axis_ + static_cast<std::uint32_t>(c);
    }
    out.push_back(b);
    int k = d - 1;
    while (k >= 0 && ++idx[k] == span[k]) idx[k--] = 0;
    if (k < 0) break;
  }
}

std::int64_t edge_count(const PointSet& ps, double r, const NormSpec& norm) {
  if (!(r > 0.0 && r < 0.5)) throw std::invalid_argument("edge_count: r must lie in (0, 1/2)");
  const double side = std::max(r, 1.0 / 512.0);
  PointBuckets buckets(ps, side);
  // The visited bucket range is capped at one period per axis, so no bucket is
  // visited twice and each pair is counted once via j > i.
  std::int64_t edges = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    auto p = ps.point(i);
    buckets.for_each_near(p, side, [&](std::uint32_t j) {
      if (j > i && torus_distance(p, ps.point(j), norm) <= r) ++edges;
    });
  }
  return edges;
}

std::int64_t count_in_probe(const PointSet& ps, const ConvexProbe& probe, const NormSpec& norm) {
  std::int64_t count = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (probe_contains(probe, ps.point(i), norm)) ++count;
  }
  return count;
}

void write_pointset_csv(std::ostream& os, const PointSet& ps) {
  os << "dim,n,seed\n";
  {
    std::ostringstream head;
    head.precision(17);
    head << ps.dim << ',' << ps.intensity << ',' << ps.seed << '\n';
    os << head.str();
  }
  char buf[64];
  for (std::size_t i = 0; i < ps.size(); ++i) {
    auto p = ps.point(i);
    for (int k = 0; k < ps.dim; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", p[k]);
      os << (k ? "," : "") << buf;
    }
    os << '\n';
  }
}

PointSet read_pointset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("dim,n,seed", 0) != 0) {
    throw std::runtime_error("point set CSV: missing header");
  }
  PointSet ps;
  if (!std::getline(is, line)) throw std::runtime_error("point set CSV: missing metadata row");
  {
    std::istringstream row(line);
    char comma;
    row >> ps.dim >> comma >> ps.intensity >> comma >> ps.seed;
    if (!row || ps.dim < 1 || ps.dim > kMaxDim) throw std::runtime_error("point set CSV: bad metadata row");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    int k = 0;
    while (std::getline(row, cell, ',')) {
      ps.coords.push_back(std::stod(cell));
      ++k;
    }
    if (k != ps.dim) throw std::runtime_error("point set CSV: wrong number of coordinates");
  }
  return ps;
}

}  // namespace rggloc
