#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ovdet {

// Axis-aligned box in pixel coordinates, x1 < x2 and y1 < y2.
struct BBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double cx() const { return 0.5 * (x1 + x2); }
  double cy() const { return 0.5 * (y1 + y2); }

  bool valid() const {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) &&
           x1 < x2 && y1 < y2;
  }

  bool contains_point(double px, double py, double eps = 0.0) const {
    return px > x1 + eps && px < x2 - eps && py > y1 + eps && py < y2 - eps;
  }

  bool operator==(const BBox&) const = default;
};

inline double intersection_area(const BBox& a, const BBox& b) {
  double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0 || ih <= 0) return 0.0;
  return iw * ih;
}

inline double iou(const BBox& a, const BBox& b) {
  double inter = intersection_area(a, b);
  double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

// Clip to [0,w]x[0,h]; may produce a degenerate box (check valid()).
inline BBox clip_box(const BBox& b, double w, double h) {
  return BBox{std::clamp(b.x1, 0.0, w), std::clamp(b.y1, 0.0, h), std::clamp(b.x2, 0.0, w),
              std::clamp(b.y2, 0.0, h)};
}

}  // namespace ovdet
