#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace gvdb {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline bool is_finite(Point p) { return std::isfinite(p.x) && std::isfinite(p.y); }

// Closed axis-aligned rectangle. A default-constructed Rect is "empty" (inverted)
// so that it acts as the identity for expand().
struct Rect {
  double x_min = std::numeric_limits<double>::infinity();
  double y_min = std::numeric_limits<double>::infinity();
  double x_max = -std::numeric_limits<double>::infinity();
  double y_max = -std::numeric_limits<double>::infinity();

  static Rect of_point(Point p) { return {p.x, p.y, p.x, p.y}; }
  static Rect of_points(Point a, Point b) {
    return {std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x), std::max(a.y, b.y)};
  }

  bool empty() const { return !(x_min <= x_max && y_min <= y_max); }
  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  Point center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }

  void expand(const Rect& o) {
    x_min = std::min(x_min, o.x_min);
    y_min = std::min(y_min, o.y_min);
    x_max = std::max(x_max, o.x_max);
    y_max = std::max(y_max, o.y_max);
  }
  void expand(Point p) { expand(of_point(p)); }

  Rect padded(double by) const { return {x_min - by, y_min - by, x_max + by, y_max + by}; }
  Rect translated(Point d) const { return {x_min + d.x, y_min + d.y, x_max + d.x, y_max + d.y}; }

  bool contains(Point p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
  bool contains(const Rect& o) const {
    return o.x_min >= x_min && o.x_max <= x_max && o.y_min >= y_min && o.y_max <= y_max;
  }
  // Closed-set intersection: touching rectangles intersect.
  bool intersects(const Rect& o) const {
    return x_min <= o.x_max && o.x_min <= x_max && y_min <= o.y_max && o.y_min <= y_max;
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

struct Segment {
  Point a;
  Point b;

  Rect bbox() const { return Rect::of_points(a, b); }
};

// True iff a and b, each grown by gap/2 on every side, do not intersect.
inline bool rects_disjoint(const Rect& a, const Rect& b, double gap) {
  return !a.padded(gap / 2).intersects(b.padded(gap / 2));
}

namespace detail {

inline int orientation(Point a, Point b, Point c) {
  const double v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  return (v > 0) - (v < 0);
}

// p is known to be collinear with [a, b].
inline bool within_span(Point a, Point b, Point p) {
  return p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) && p.y >= std::min(a.y, b.y) &&
         p.y <= std::max(a.y, b.y);
}

inline bool segments_intersect(Point p1, Point p2, Point q1, Point q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && within_span(p1, p2, q1)) return true;
  if (o2 == 0 && within_span(p1, p2, q2)) return true;
  if (o3 == 0 && within_span(q1, q2, p1)) return true;
  if (o4 == 0 && within_span(q1, q2, p2)) return true;
  return false;
}

}  // namespace detail

// Closed segment vs closed rectangle.
inline bool segment_intersects_rect(const Segment& seg, const Rect& r) {
  if (r.contains(seg.a) || r.contains(seg.b)) return true;
  if (!seg.bbox().intersects(r)) return false;
  const Point c00{r.x_min, r.y_min}, c10{r.x_max, r.y_min};
  const Point c11{r.x_max, r.y_max}, c01{r.x_min, r.y_max};
  return detail::segments_intersect(seg.a, seg.b, c00, c10) ||
         detail::segments_intersect(seg.a, seg.b, c10, c11) ||
         detail::segments_intersect(seg.a, seg.b, c11, c01) ||
         detail::segments_intersect(seg.a, seg.b, c01, c00);
}

}  // namespace gvdb
