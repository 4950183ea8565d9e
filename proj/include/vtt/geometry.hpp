#ifndef VTT_GEOMETRY_HPP_
#define VTT_GEOMETRY_HPP_

// Quadrilateral and rotated-rectangle text boxes.
//
// Coordinates are continuous image coordinates: x to the right, y down,
// pixel (row r, col c) covers [c, c+1) x [r, r+1). "Counter-clockwise"
// below refers to a positive shoelace area in these coordinates.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "vtt/errors.hpp"

namespace vtt {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point, Point) = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
/// Twice the signed area of triangle (o, a, b).
inline double cross(Point o, Point a, Point b) { return cross(a - o, b - o); }

struct Bounds {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
};

inline Bounds bounds_of(std::span<const Point> pts) {
  Bounds b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Point& p : pts) {
    b.min_x = std::min(b.min_x, p.x);
    b.min_y = std::min(b.min_y, p.y);
    b.max_x = std::max(b.max_x, p.x);
    b.max_y = std::max(b.max_y, p.y);
  }
  return b;
}

inline double signed_area(std::span<const Point> poly) {
  double acc = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) acc += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * acc;
}

inline double polygon_area(std::span<const Point> poly) { return std::abs(signed_area(poly)); }

/// Andrew's monotone chain. Counter-clockwise, collinear points dropped.
inline std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(),
            [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

/// Point inside (or on the boundary of) a counter-clockwise convex polygon.
inline bool convex_contains(std::span<const Point> hull, Point p) {
  const std::size_t n = hull.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (cross(hull[i], hull[(i + 1) % n], p) < 0.0) return false;
  }
  return true;
}

/// Angle difference folded modulo pi into [0, pi/2]; a rectangle at theta and
/// theta + pi is the same shape.
inline double angle_difference(double a, double b) {
  double d = std::fmod(std::abs(a - b), std::numbers::pi);
  if (d > std::numbers::pi / 2) d = std::numbers::pi - d;
  return d;
}

class Quad;

/// Center, side lengths and orientation. `theta` is the angle from the x-axis
/// to the side of length `w`. Canonical form has w >= h and theta in
/// [-pi/2, pi/2), or theta in [-pi/4, pi/4) for squares.
struct RotatedRect {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  double theta = 0.0;

  double area() const { return w * h; }
  std::array<Point, 4> corners() const {
    const Point u{std::cos(theta), std::sin(theta)};
    const Point n{-u.y, u.x};
    const Point c{cx, cy};
    const Point a = (0.5 * w) * u;
    const Point b = (0.5 * h) * n;
    return {c - a - b, c + a - b, c + a + b, c - a + b};
  }
  Quad to_quad() const;
};

namespace detail {

inline double wrap_angle(double theta, double period, double lo) {
  return theta - period * std::floor((theta - lo) / period);
}

inline bool nearly_square(double w, double h) {
  return std::abs(w - h) <= 1e-9 * std::max(w, h);
}

}  // namespace detail

/// Applies the w >= h / theta range convention.
inline RotatedRect canonicalize(RotatedRect r) {
  if (detail::nearly_square(r.w, r.h)) {
    r.theta = detail::wrap_angle(r.theta, std::numbers::pi / 2, -std::numbers::pi / 4);
    return r;
  }
  if (r.w < r.h) {
    std::swap(r.w, r.h);
    r.theta += std::numbers::pi / 2;
  }
  r.theta = detail::wrap_angle(r.theta, std::numbers::pi, -std::numbers::pi / 2);
  return r;
}

/// Minimum-area enclosing rectangle via rotating calipers over the convex hull.
inline RotatedRect min_area_rect(std::span<const Point> pts) {
  const std::vector<Point> hull = convex_hull({pts.begin(), pts.end()});
  if (hull.size() < 3 || polygon_area(hull) <= 0.0) {
    throw GeometryError("min_area_rect: point set has zero area");
  }
  RotatedRect best;
  double best_area = std::numeric_limits<double>::infinity();
  const std::size_t n = hull.size();
  for (std::size_t i = 0; i < n; ++i) {
    Point u = hull[(i + 1) % n] - hull[i];
    const double len = std::hypot(u.x, u.y);
    if (len == 0.0) continue;
    u = (1.0 / len) * u;
    const Point nrm{-u.y, u.x};
    double lo_u = std::numeric_limits<double>::infinity(), hi_u = -lo_u;
    double lo_n = lo_u, hi_n = -lo_u;
    for (const Point& p : hull) {
      const double pu = dot(p, u);
      const double pn = dot(p, nrm);
      lo_u = std::min(lo_u, pu);
      hi_u = std::max(hi_u, pu);
      lo_n = std::min(lo_n, pn);
      hi_n = std::max(hi_n, pn);
    }
    const double area = (hi_u - lo_u) * (hi_n - lo_n);
    if (area < best_area) {
      best_area = area;
      const Point c = (0.5 * (lo_u + hi_u)) * u + (0.5 * (lo_n + hi_n)) * nrm;
      best = {c.x, c.y, hi_u - lo_u, hi_n - lo_n, std::atan2(u.y, u.x)};
    }
  }
  return canonicalize(best);
}

/// Four-vertex text box. Vertices are kept counter-clockwise, starting with
/// the first vertex supplied. Construction rejects zero-area input.
class Quad {
 public:
  explicit Quad(const std::array<Point, 4>& v) : v_(v) {
    const Point c = 0.25 * (v[0] + v[1] + v[2] + v[3]);
    auto angle = [&](const Point& p) {
      const double a = std::atan2(p.y - c.y, p.x - c.x) - std::atan2(v[0].y - c.y, v[0].x - c.x);
      return detail::wrap_angle(a, 2 * std::numbers::pi, 0.0);
    };
    std::sort(v_.begin() + 1, v_.end(),
              [&](const Point& a, const Point& b) { return angle(a) < angle(b); });
    hull_ = convex_hull({v_.begin(), v_.end()});
    if (hull_.size() < 3 || polygon_area(hull_) <= 0.0) {
      throw GeometryError("quad has zero area");
    }
  }

  /// Axis-aligned box [x0, x1] x [y0, y1].
  static Quad axis_aligned(double x0, double y0, double x1, double y1) {
    return Quad({Point{x0, y0}, Point{x1, y0}, Point{x1, y1}, Point{x0, y1}});
  }

  const std::array<Point, 4>& vertices() const { return v_; }
  /// Convex hull of the vertices (3 or 4 points, counter-clockwise).
  std::span<const Point> hull() const { return hull_; }
  double area() const { return polygon_area(hull_); }
  Bounds bounds() const { return bounds_of(v_); }
  Point centroid() const { return 0.25 * (v_[0] + v_[1] + v_[2] + v_[3]); }

  friend bool operator==(const Quad& a, const Quad& b) { return a.v_ == b.v_; }

 private:
  std::array<Point, 4> v_;
  std::vector<Point> hull_;
};

inline Quad RotatedRect::to_quad() const { return Quad(corners()); }

inline RotatedRect quad_to_rotated_rect(const Quad& q) { return min_area_rect(q.vertices()); }

namespace detail {

// Sutherland-Hodgman: keep the part of `subject` left of the directed edge a->b.
inline std::vector<Point> clip_half_plane(const std::vector<Point>& subject, Point a, Point b) {
  std::vector<Point> out;
  const std::size_t n = subject.size();
  if (n == 0) return out;
  out.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = subject[i];
    const Point& q = subject[(i + 1) % n];
    const double sp = cross(a, b, p);
    const double sq = cross(a, b, q);
    if (sp >= 0.0) out.push_back(p);
    if ((sp >= 0.0) != (sq >= 0.0)) {
      const double t = sp / (sp - sq);
      out.push_back(p + t * (q - p));
    }
  }
  return out;
}

}  // namespace detail

/// Area of the intersection of two convex polygons (counter-clockwise).
inline double convex_intersection_area(std::span<const Point> a, std::span<const Point> b) {
  std::vector<Point> poly(a.begin(), a.end());
  const std::size_t n = b.size();
  for (std::size_t i = 0; i < n && !poly.empty(); ++i) {
    poly = detail::clip_half_plane(poly, b[i], b[(i + 1) % n]);
  }
  return poly.size() < 3 ? 0.0 : polygon_area(poly);
}

/// Intersection area of the convex hulls of two quads.
inline double intersection_area(const Quad& a, const Quad& b) {
  const Bounds ba = a.bounds(), bb = b.bounds();
  if (ba.max_x <= bb.min_x || bb.max_x <= ba.min_x || ba.max_y <= bb.min_y ||
      bb.max_y <= ba.min_y) {
    return 0.0;
  }
  // Both clip orders are averaged so the result is bitwise symmetric.
  const double ab = convex_intersection_area(a.hull(), b.hull());
  const double ba_ = convex_intersection_area(b.hull(), a.hull());
  return 0.5 * (ab + ba_);
}

inline double iou(const Quad& a, const Quad& b) {
  const double aa = a.area(), ab = b.area();
  if (aa <= 0.0 && ab <= 0.0) throw GeometryError("iou: both boxes have zero area");
  const double inter = std::min({intersection_area(a, b), aa, ab});
  const double uni = aa + ab - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace vtt

#endif  // VTT_GEOMETRY_HPP_
