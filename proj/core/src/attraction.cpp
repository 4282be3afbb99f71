#include "acf/attraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "acf/errors.hpp"

namespace acf {

void FieldConfig::validate() const {
  if (!(gain > 0.0 && softening_px > 0.0 && max_pull_px > 0.0))
    throw ContractViolation("field gain, softening and max pull must be positive");
}

PointD pull_at(PointD pos, std::span<const AttractionTarget> targets, const FieldConfig& cfg) {
  if (cfg.dead_zone) {
    for (const auto& t : targets)
      if (t.rect.contains(pos)) return {0.0, 0.0};
  }
  const double s2 = cfg.softening_px * cfg.softening_px;
  double fx = 0.0;
  double fy = 0.0;
  for (const auto& t : targets) {
    const double dx = t.center.x - pos.x;
    const double dy = t.center.y - pos.y;
    const double d = std::hypot(dx, dy);
    if (d == 0.0) continue;
    const double mag = cfg.gain * t.confidence / (d * d + s2);
    fx += mag * dx / d;
    fy += mag * dy / d;
  }
  const double norm = std::hypot(fx, fy);
  if (norm > cfg.max_pull_px) {
    fx *= cfg.max_pull_px / norm;
    fy *= cfg.max_pull_px / norm;
  }
  return {fx, fy};
}

PointD apply_motion(PointD /*raw_from*/, PointD raw_to, std::span<const AttractionTarget> targets,
                    const FieldConfig& cfg, std::optional<Rect> screen) {
  const PointD p = pull_at(raw_to, targets, cfg);
  PointD out{raw_to.x + p.x, raw_to.y + p.y};
  if (screen) {
    out.x = std::clamp(out.x, static_cast<double>(screen->x), static_cast<double>(screen->x + screen->w));
    out.y = std::clamp(out.y, static_cast<double>(screen->y), static_cast<double>(screen->y + screen->h));
  }
  return out;
}

double lipschitz_bound(std::span<const AttractionTarget> targets, const FieldConfig& cfg) {
  // Each term is phi(d) u with phi(d) = 1 / (d^2 + s^2). Its Jacobian has a
  // radial eigenvalue |phi'(d)| <= 9 / (8 sqrt(3) s^3) and a tangential one
  // phi(d) / d, which decreases in d. Points outside a rect are at least
  // min(w, h) / 2 from its center; a unit segment between two such points
  // stays at least sqrt(dmin^2 - 1/4) away. The clamp is a projection and
  // does not increase the constant.
  const double s = cfg.softening_px;
  const double radial = 9.0 / (8.0 * std::sqrt(3.0) * s * s * s);
  double bound = 0.0;
  for (const auto& t : targets) {
    if (t.confidence == 0.0) continue;
    if (!cfg.dead_zone || !t.rect.valid()) return std::numeric_limits<double>::infinity();
    const double half = std::min(t.rect.w, t.rect.h) / 2.0;
    const double d = std::sqrt(std::max(half * half - 0.25, 0.0));
    if (d == 0.0) return std::numeric_limits<double>::infinity();
    bound += cfg.gain * std::abs(t.confidence) * std::max(radial, 1.0 / (d * (d * d + s * s)));
  }
  return bound;
}

std::vector<FieldSample> sample_field(PointD origin, int cols, int rows, double step_px,
                                      std::span<const AttractionTarget> targets, const FieldConfig& cfg) {
  if (cols < 0 || rows < 0 || !(step_px > 0.0)) throw ContractViolation("invalid field grid");
  std::vector<FieldSample> out;
  out.reserve(static_cast<std::size_t>(cols) * static_cast<std::size_t>(rows));
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < cols; ++i) {
      const PointD p{origin.x + i * step_px, origin.y + j * step_px};
      out.push_back({p, pull_at(p, targets, cfg)});
    }
  }
  return out;
}

}  // namespace acf
