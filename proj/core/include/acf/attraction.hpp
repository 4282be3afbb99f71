#pragma once

#include <optional>
#include <span>
#include <vector>

#include "acf/geometry.hpp"

namespace acf {

/// A predicted button acting as a point mass of strength `confidence`.
struct AttractionTarget {
  PointD center;
  Rect rect;
  double confidence = 0.0;
};

struct FieldConfig {
  double gain = 40.0;         // px^3
  double softening_px = 20.0;
  double max_pull_px = 8.0;
  bool dead_zone = true;

  /// Throws ContractViolation unless gain, softening and max pull are positive.
  void validate() const;
};

/// Sum over targets of gain * c * u / (d^2 + s^2), u the unit vector toward
/// the target center and d the distance to it; a target exactly under `pos`
/// contributes nothing. The total is clamped to max_pull_px and is zero
/// while `pos` lies inside any target rect (when dead_zone is set).
PointD pull_at(PointD pos, std::span<const AttractionTarget> targets, const FieldConfig& cfg);

/// raw_to + pull_at(raw_to), clamped to `screen` when given. `raw_from` is
/// accepted for interface parity with pointer-move events; the field is
/// position-only.
PointD apply_motion(PointD raw_from, PointD raw_to, std::span<const AttractionTarget> targets,
                    const FieldConfig& cfg, std::optional<Rect> screen = std::nullopt);

/// Upper bound on |pull(p) - pull(q)| for p, q outside every dead zone with
/// |p - q| <= 1. Infinite without dead zones (the kernel is singular at a
/// target center).
double lipschitz_bound(std::span<const AttractionTarget> targets, const FieldConfig& cfg);

struct FieldSample {
  PointD pos;
  PointD pull;
};

/// Samples pull_at on the grid origin + (i, j) * step, i < cols, j < rows.
std::vector<FieldSample> sample_field(PointD origin, int cols, int rows, double step_px,
                                      std::span<const AttractionTarget> targets, const FieldConfig& cfg);

}  // namespace acf
