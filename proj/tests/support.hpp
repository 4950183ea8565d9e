#ifndef VTT_TESTS_SUPPORT_HPP_
#define VTT_TESTS_SUPPORT_HPP_

// Independent oracles shared by the unit and acceptance suites. None of these
// call into the library routine they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "vtt/assignment.hpp"
#include "vtt/geometry.hpp"
#include "vtt/rng.hpp"

namespace vtt::testing {

inline constexpr double kPi = 3.14159265358979323846;

/// Ray-casting point-in-polygon (any winding, boundary counts as outside).
inline bool point_in_polygon(const std::vector<Point>& poly, double x, double y) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point a = poly[i], b = poly[j];
    if ((a.y > y) != (b.y > y)) {
      const double xi = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (x < xi) inside = !inside;
    }
  }
  return inside;
}

inline std::vector<Point> corners_of(double cx, double cy, double w, double h, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  std::vector<Point> out;
  for (auto [u, v] : std::array<std::pair<double, double>, 4>{
           {{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}}) {
    out.push_back({cx + c * u * w - s * v * h, cy + s * u * w + c * v * h});
  }
  return out;
}

inline Quad quad_of(const std::vector<Point>& p) { return Quad({p[0], p[1], p[2], p[3]}); }

struct McEstimate {
  double area_a = 0.0, area_b = 0.0, inter = 0.0;
  double iou() const { return inter / (area_a + area_b - inter); }
};

/// Jittered-stratified Monte-Carlo over the joint bounding box: one uniform
/// sample per cell of a side x side grid (side^2 ~ samples).
inline McEstimate monte_carlo(const std::vector<Point>& a, const std::vector<Point>& b,
                              std::size_t samples, Rng& rng) {
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (const auto* poly : {&a, &b}) {
    for (const Point& p : *poly) {
      x0 = std::min(x0, p.x);
      y0 = std::min(y0, p.y);
      x1 = std::max(x1, p.x);
      y1 = std::max(y1, p.y);
    }
  }
  const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(samples))));
  const double cw = (x1 - x0) / side, ch = (y1 - y0) / side;
  std::size_t na = 0, nb = 0, nab = 0;
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      const double x = x0 + (i + rng.uniform()) * cw;
      const double y = y0 + (j + rng.uniform()) * ch;
      const bool ia = point_in_polygon(a, x, y), ib = point_in_polygon(b, x, y);
      na += ia;
      nb += ib;
      nab += ia && ib;
    }
  }
  const double cell = cw * ch;
  return {na * cell, nb * cell, nab * cell};
}

/// Minimum total cost over all one-to-one matchings of size min(rows, cols).
inline double brute_force_min_cost(const DistanceMatrix& m) {
  const std::size_t r = m.rows(), c = m.cols();
  if (r == 0 || c == 0) return 0.0;
  const bool rows_small = r <= c;
  const std::size_t small = rows_small ? r : c, big = rows_small ? c : r;
  std::vector<std::size_t> perm(big);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  // Every injection small -> big appears as the prefix of some permutation.
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < small; ++i) s += rows_small ? m(i, perm[i]) : m(perm[i], i);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline DistanceMatrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  DistanceMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      // Mix of continuous and small-integer entries so ties occur.
      m(i, j) = rng.bernoulli(0.5) ? rng.uniform(0.0, 10.0) : static_cast<double>(rng.below(4));
    }
  }
  return m;
}

/// Area of the minimal enclosing rectangle found by sweeping the angle over
/// [0, 90) degrees in 0.1 degree steps, then around the best coarse angle in
/// 1e-4 degree steps.
inline double sweep_min_rect_area(const std::vector<Point>& pts) {
  auto area_at = [&](double deg) {
    const double a = deg * kPi / 180.0;
    const double c = std::cos(a), s = std::sin(a);
    double u0 = 1e300, u1 = -1e300, v0 = 1e300, v1 = -1e300;
    for (const Point& p : pts) {
      const double u = c * p.x + s * p.y, v = -s * p.x + c * p.y;
      u0 = std::min(u0, u);
      u1 = std::max(u1, u);
      v0 = std::min(v0, v);
      v1 = std::max(v1, v);
    }
    return (u1 - u0) * (v1 - v0);
  };
  double best = std::numeric_limits<double>::infinity(), best_deg = 0.0;
  for (int k = 0; k < 900; ++k) {
    const double a = area_at(k * 0.1);
    if (a < best) {
      best = a;
      best_deg = k * 0.1;
    }
  }
  for (int k = -1000; k <= 1000; ++k) best = std::min(best, area_at(best_deg + k * 1e-4));
  return best;
}

/// Random convex quad: four points on an ellipse at sorted random angles.
inline std::vector<Point> random_convex_quad(Rng& rng) {
  std::array<double, 4> ang;
  for (double& a : ang) a = rng.uniform(0.0, 2.0 * kPi);
  std::sort(ang.begin(), ang.end());
  const double rx = rng.uniform(1.0, 20.0), ry = rng.uniform(1.0, 20.0);
  const double cx = rng.uniform(-50.0, 50.0), cy = rng.uniform(-50.0, 50.0);
  const double rot = rng.uniform(0.0, kPi);
  std::vector<Point> out;
  for (double a : ang) {
    const double x = rx * std::cos(a), y = ry * std::sin(a);
    out.push_back({cx + std::cos(rot) * x - std::sin(rot) * y,
                   cy + std::sin(rot) * x + std::cos(rot) * y});
  }
  return out;
}

inline double polygon_area_oracle(const std::vector<Point>& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Point a = p[i], b = p[(i + 1) % p.size()];
    s += a.x * b.y - b.x * a.y;
  }
  return std::abs(0.5 * s);
}

}  // namespace vtt::testing

#endif  // VTT_TESTS_SUPPORT_HPP_
