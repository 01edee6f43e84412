#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rggloc {

inline constexpr int kMaxDim = 4;

enum class NormKind { L1, L2, Linf };

struct NormSpec {
  NormKind kind = NormKind::L2;
  int dim = 2;
  double nu = 0.0;  // volume of the unit ball

  static NormSpec make(NormKind kind, int dim);
  static NormSpec parse(const std::string& name, int dim);
  std::string name() const;

  // Norm of a real vector with `dim` entries.
  double of(const double* v) const;
  // Unit-cube diagonal length ||(1,...,1)||.
  double diagonal() const;
};

using TorusPoint = std::vector<double>;

// Wrapped offset in [-1/2, 1/2).
double wrap_offset(double delta);

double torus_distance(std::span<const double> x, std::span<const double> y, const NormSpec& norm);

// tau = nu (r/2)^d, the volume of a ball of diameter r.
double ball_volume_tau(double r, const NormSpec& norm);

struct Ball {
  TorusPoint center;
  double radius = 0.0;
};

// Axis-aligned box [corner, corner + sides] with wraparound.
struct Box {
  TorusPoint corner;
  std::vector<double> sides;
};

struct BallBox {
  Ball ball;
  Box box;
};

using ConvexProbe = std::variant<Ball, Box, BallBox>;

struct MeasureResult {
  double value = 0.0;
  double error_bound = 0.0;
};

// Closed forms for balls and boxes. Ball-box intersections integrate the exact
// chord length along the last axis over an adaptive grid on the remaining axes;
// the error bound is at most 1e-4 times the ball volume.
MeasureResult probe_measure_bounded(const ConvexProbe& probe, const NormSpec& norm);
double probe_measure(const ConvexProbe& probe, const NormSpec& norm);

// Closed-set membership.
bool probe_contains(const ConvexProbe& probe, std::span<const double> x, const NormSpec& norm);

// Validates extents (< 1/2), dimensions and positivity; throws std::invalid_argument.
void validate_probe(const ConvexProbe& probe, const NormSpec& norm);

std::string describe_probe(const ConvexProbe& probe);

}  // namespace rggloc
