#include "rggloc/torus.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace rggloc {

NormSpec NormSpec::make(NormKind kind, int dim) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension must be in [1, 4]");
  NormSpec n;
  n.kind = kind;
  n.dim = dim;
  switch (kind) {
    case NormKind::Linf:
      n.nu = std::ldexp(1.0, dim);
      break;
    case NormKind::L1: {
      double fact = 1.0;
      for (int k = 2; k <= dim; ++k) fact *= k;
      n.nu = std::ldexp(1.0, dim) / fact;
      break;
    }
    case NormKind::L2:
      n.nu = std::pow(std::numbers::pi, dim / 2.0) / std::tgamma(dim / 2.0 + 1.0);
      break;
  }
  return n;
}

NormSpec NormSpec::parse(const std::string& name, int dim) {
  if (name == "L1") return make(NormKind::L1, dim);
  if (name == "L2") return make(NormKind::L2, dim);
  if (name == "Linf" || name == "LINF" || name == "Linfty") return make(NormKind::Linf, dim);
  throw std::invalid_argument("unknown norm: " + name);
}

std::string NormSpec::name() const {
  switch (kind) {
    case NormKind::L1: return "L1";
    case NormKind::L2: return "L2";
    case NormKind::Linf: return "Linf";
  }
  return "?";
}

double NormSpec::of(const double* v) const {
  double acc = 0.0;
  switch (kind) {
    case NormKind::L1:
      for (int k = 0; k < dim; ++k) acc += std::fabs(v[k]);
      return acc;
    case NormKind::L2:
      for (int k = 0; k < dim; ++k) acc += v[k] * v[k];
      return std::sqrt(acc);
    case NormKind::Linf:
      for (int k = 0; k < dim; ++k) acc = std::max(acc, std::fabs(v[k]));
      return acc;
  }
  return acc;
}

double NormSpec::diagonal() const {
  double ones[kMaxDim] = {1, 1, 1, 1};
  return of(ones);
}

double wrap_offset(double delta) {
  double w = delta - std::floor(delta);  // [0, 1)
  if (w >= 0.5) w -= 1.0;
  return w;
}

double torus_distance(std::span<const double> x, std::span<const double> y, const NormSpec& norm) {
  if (x.size() != static_cast<std::size_t>(norm.dim) || y.size() != x.size()) {
    throw std::invalid_argument("torus_distance: dimension mismatch");
  }
  double diff[kMaxDim];
  for (int k = 0; k < norm.dim; ++k) {
    const double a = std::fabs(x[k] - y[k]);
    diff[k] = std::min(a, 1.0 - a);
  }
  return norm.of(diff);
}

double ball_volume_tau(double r, const NormSpec& norm) {
  if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("ball_volume_tau: r must lie in (0, 1)");
  return norm.nu * std::pow(r / 2.0, norm.dim);
}

namespace {

double ball_measure(const Ball& b, const NormSpec& norm) { return norm.nu * std::pow(b.radius, norm.dim); }

double box_measure(const Box& b) {
  double v = 1.0;
  for (double s : b.sides) v *= s;
  return v;
}

// Box lower corner expressed relative to `origin`, chosen so the box center lies
// within half a period of the origin.
void box_relative(const Box& box, std::span<const double> origin, int dim, double* lo, double* hi) {
  for (int k = 0; k < dim; ++k) {
    const double center = wrap_offset(box.corner[k] + box.sides[k] / 2.0 - origin[k]);
    lo[k] = center - box.sides[k] / 2.0;
    hi[k] = center + box.sides[k] / 2.0;
  }
}

// Half-length of the ball's chord along the last axis at transverse offset y
// (norm taken over the first dim-1 coordinates); negative when the line misses.
double chord_half(double ynorm, double radius, NormKind kind) {
  switch (kind) {
    case NormKind::L2:
      return ynorm <= radius ? std::sqrt(std::max(0.0, radius * radius - ynorm * ynorm)) : -1.0;
    case NormKind::L1:
      return ynorm <= radius ? radius - ynorm : -1.0;
    case NormKind::Linf:
      return ynorm <= radius ? radius : -1.0;
  }
  return -1.0;
}

double chord_length(double half, double a, double b) {
  if (half < 0.0) return 0.0;
  return std::max(0.0, std::min(half, b) - std::max(-half, a));
}

struct ChordIntegrator {
  NormSpec sub;  // norm on the transverse coordinates
  NormKind kind;
  double radius;
  double a, b;       // box interval on the last axis
  double tol_density;  // allowed (max - min) * volume per unit volume
  int tdim;
  double value = 0.0;
  double error = 0.0;

  void run(double* lo, double* hi, int depth) {
    double near[kMaxDim], far[kMaxDim];
    double vol = 1.0;
    for (int k = 0; k < tdim; ++k) {
      near[k] = (lo[k] <= 0.0 && hi[k] >= 0.0) ? 0.0 : std::min(std::fabs(lo[k]), std::fabs(hi[k]));
      far[k] = std::max(std::fabs(lo[k]), std::fabs(hi[k]));
      vol *= hi[k] - lo[k];
    }
    const double fmax = chord_length(chord_half(sub.of(near), radius, kind), a, b);
    const double fmin = chord_length(chord_half(sub.of(far), radius, kind), a, b);
    const double gap = fmax - fmin;
    if (gap <= tol_density || depth >= 40) {
      value += 0.5 * (fmax + fmin) * vol;
      error += 0.5 * gap * vol;
      return;
    }
    // Split the widest transverse axis.
    int axis = 0;
    for (int k = 1; k < tdim; ++k) {
      if (hi[k] - lo[k] > hi[axis] - lo[axis]) axis = k;
    }
    const double mid = 0.5 * (lo[axis] + hi[axis]);
    double lo2[kMaxDim], hi2[kMaxDim];
    std::copy(lo, lo + tdim, lo2);
    std::copy(hi, hi + tdim, hi2);
    hi2[axis] = mid;
    run(lo2, hi2, depth + 1);
    lo2[axis] = mid;
    hi2[axis] = hi[axis];
    run(lo2, hi2, depth + 1);
  }
};

MeasureResult ball_box_measure(const BallBox& bb, const NormSpec& norm) {
  const int d = norm.dim;
  double lo[kMaxDim], hi[kMaxDim];
  box_relative(bb.box, bb.ball.center, d, lo, hi);
  const double rho = bb.ball.radius;
  for (int k = 0; k < d; ++k) {
    lo[k] = std::max(lo[k], -rho);
    hi[k] = std::min(hi[k], rho);
    if (lo[k] >= hi[k]) return {0.0, 0.0};
  }
  const double target = 1e-4 * ball_measure(bb.ball, norm);
  if (d == 1) return {hi[0] - lo[0], 0.0};
  ChordIntegrator integ;
  integ.tdim = d - 1;
  integ.sub = NormSpec::make(norm.kind, d - 1);
  integ.kind = norm.kind;
  integ.radius = rho;
  integ.a = lo[d - 1];
  integ.b = hi[d - 1];
  double tvol = 1.0;
  for (int k = 0; k < d - 1; ++k) tvol *= hi[k] - lo[k];
  // Accepting cells whose gap stays below target/tvol keeps the summed bound
  // (half gap times volume) below target/2.
  integ.tol_density = target / tvol;
  integ.run(lo, hi, 0);
  return {integ.value, integ.error};
}

bool in_box(const Box& box, std::span<const double> x, int dim) {
  for (int k = 0; k < dim; ++k) {
    double off = x[k] - box.corner[k];
    off -= std::floor(off);
    if (off > box.sides[k]) {
      // Points just below the corner wrap to off close to 1.
      return false;
    }
  }
  return true;
}

}  // namespace

void validate_probe(const ConvexProbe& probe, const NormSpec& norm) {
  auto check_point = [&](const TorusPoint& p) {
    if (p.size() != static_cast<std::size_t>(norm.dim)) throw std::invalid_argument("probe dimension mismatch");
  };
  auto check_ball = [&](const Ball& b) {
    check_point(b.center);
    if (!(b.radius > 0.0 && b.radius < 0.25)) throw std::invalid_argument("ball diameter must lie in (0, 1/2)");
  };
  auto check_box = [&](const Box& b) {
    check_point(b.corner);
    if (b.sides.size() != static_cast<std::size_t>(norm.dim)) throw std::invalid_argument("box dimension mismatch");
    for (double s : b.sides) {
      if (!(s > 0.0 && s < 0.5)) throw std::invalid_argument("box sides must lie in (0, 1/2)");
    }
  };
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Ball>) check_ball(p);
        if constexpr (std::is_same_v<T, Box>) check_box(p);
        if constexpr (std::is_same_v<T, BallBox>) {
          check_ball(p.ball);
          check_box(p.box);
        }
      },
      probe);
}

MeasureResult probe_measure_bounded(const ConvexProbe& probe, const NormSpec& norm) {
  return std::visit(
      [&](const auto& p) -> MeasureResult {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Ball>) return {ball_measure(p, norm), 0.0};
        if constexpr (std::is_same_v<T, Box>) return {box_measure(p), 0.0};
        if constexpr (std::is_same_v<T, BallBox>) return ball_box_measure(p, norm);
      },
      probe);
}

double probe_measure(const ConvexProbe& probe, const NormSpec& norm) {
  return probe_measure_bounded(probe, norm).value;
}

bool probe_contains(const ConvexProbe& probe, std::span<const double> x, const NormSpec& norm) {
  return std::visit(
      [&](const auto& p) -> bool {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Ball>) return torus_distance(x, p.center, norm) <= p.radius;
        if constexpr (std::is_same_v<T, Box>) return in_box(p, x, norm.dim);
        if constexpr (std::is_same_v<T, BallBox>) {
          return torus_distance(x, p.ball.center, norm) <= p.ball.radius && in_box(p.box, x, norm.dim);
        }
      },
      probe);
}

std::string describe_probe(const ConvexProbe& probe) {
  std::ostringstream os;
  os.precision(6);
  auto pt = [&](const std::vector<double>& v) {
    os << '(';
    for (std::size_t k = 0; k < v.size(); ++k) os << (k ? "," : "") << v[k];
    os << ')';
  };
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Ball>) {
          os << "ball center=";
          pt(p.center);
          os << " radius=" << p.radius;
        }
        if constexpr (std::is_same_v<T, Box>) {
          os << "box corner=";
          pt(p.corner);
          os << " sides=";
          pt(p.sides);
        }
        if constexpr (std::is_same_v<T, BallBox>) {
          os << "ball center=";
          pt(p.ball.center);
          os << " radius=" << p.ball.radius << " cap box corner=";
          pt(p.box.corner);
          os << " sides=";
          pt(p.box.sides);
        }
      },
      probe);
  return os.str();
}

}  // namespace rggloc
