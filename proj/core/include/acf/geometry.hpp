#pragma once

#include <cstdint>

namespace acf {

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct PointD {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const PointD&, const PointD&) = default;
};

/// Axis-aligned rectangle in screen pixels. Containment is closed on all
/// four edges: a point on the border is inside.
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool valid() const { return w > 0 && h > 0; }
  std::int64_t area() const { return static_cast<std::int64_t>(w) * h; }
  bool contains(Point p) const { return p.x >= x && p.x <= x + w && p.y >= y && p.y <= y + h; }
  bool contains(PointD p) const { return p.x >= x && p.x <= x + w && p.y >= y && p.y <= y + h; }
  PointD center() const { return {x + w / 2.0, y + h / 2.0}; }

  friend bool operator==(const Rect&, const Rect&) = default;
};

}  // namespace acf
