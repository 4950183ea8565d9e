#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "vtt/errors.hpp"
#include "vtt/geometry.hpp"

namespace vtt {
namespace {

using testing::corners_of;
using testing::kPi;
using testing::quad_of;

Quad unit_square(double dx = 0.0, double dy = 0.0) {
  return Quad::axis_aligned(dx, dy, dx + 1.0, dy + 1.0);
}

TEST(Geometry, AxisAlignedSquareToRect) {
  const Quad q({Point{0, 0}, Point{2, 0}, Point{2, 2}, Point{0, 2}});
  const RotatedRect r = quad_to_rotated_rect(q);
  EXPECT_NEAR(r.cx, 1.0, 1e-12);
  EXPECT_NEAR(r.cy, 1.0, 1e-12);
  EXPECT_NEAR(r.w, 2.0, 1e-12);
  EXPECT_NEAR(r.h, 2.0, 1e-12);
  EXPECT_NEAR(r.theta, 0.0, 1e-12);
}

TEST(Geometry, RotatedSquareKeepsShape) {
  const Quad q = quad_of(corners_of(1, 1, 2, 2, kPi / 6));
  const RotatedRect r = quad_to_rotated_rect(q);
  EXPECT_NEAR(r.cx, 1.0, 1e-9);
  EXPECT_NEAR(r.cy, 1.0, 1e-9);
  EXPECT_NEAR(r.w, 2.0, 1e-9);
  EXPECT_NEAR(r.h, 2.0, 1e-9);
  // Squares are symmetric under quarter turns; pi/6 is already in the
  // canonical quarter-turn window.
  EXPECT_NEAR(r.theta, kPi / 6, 1e-9);
}

TEST(Geometry, RotatedRectRoundTrip) {
  Rng rng = make_stream(7, "geometry-roundtrip");
  for (int i = 0; i < 500; ++i) {
    const double w = rng.uniform(1.0, 50.0);
    const double h = rng.uniform(1.0, w * 0.95);
    const RotatedRect in{rng.uniform(-100, 100), rng.uniform(-100, 100), w, h,
                         rng.uniform(-kPi / 2, kPi / 2)};
    const RotatedRect out = quad_to_rotated_rect(in.to_quad());
    EXPECT_NEAR(out.cx, in.cx, 1e-6);
    EXPECT_NEAR(out.cy, in.cy, 1e-6);
    EXPECT_NEAR(out.w, in.w, 1e-6);
    EXPECT_NEAR(out.h, in.h, 1e-6);
    EXPECT_NEAR(out.theta, in.theta, 1e-6);
    EXPECT_GE(out.theta, -kPi / 2);
    EXPECT_LT(out.theta, kPi / 2);
  }
}

TEST(Geometry, TallRectIsCanonicalizedWide) {
  const RotatedRect r = quad_to_rotated_rect(Quad::axis_aligned(0, 0, 2, 6));
  EXPECT_NEAR(r.w, 6.0, 1e-12);
  EXPECT_NEAR(r.h, 2.0, 1e-12);
  EXPECT_NEAR(std::abs(r.theta), kPi / 2, 1e-12);
  EXPECT_LT(r.theta, kPi / 2);
}

TEST(Geometry, MinAreaRectMatchesAngleSweep) {
  Rng rng = make_stream(11, "geometry-sweep");
  for (int i = 0; i < 200; ++i) {
    const std::vector<Point> pts = testing::random_convex_quad(rng);
    const RotatedRect r = quad_to_rotated_rect(quad_of(pts));
    const double sweep = testing::sweep_min_rect_area(pts);
    EXPECT_LE(r.area(), sweep * (1.0 + 1e-9)) << i;
    EXPECT_GE(r.area(), sweep * (1.0 - 0.005)) << i;
    // Encloses every vertex.
    const double c = std::cos(r.theta), s = std::sin(r.theta);
    for (const Point& p : pts) {
      const double u = c * (p.x - r.cx) + s * (p.y - r.cy);
      const double v = -s * (p.x - r.cx) + c * (p.y - r.cy);
      EXPECT_LE(std::abs(u), 0.5 * r.w + 1e-7);
      EXPECT_LE(std::abs(v), 0.5 * r.h + 1e-7);
    }
  }
}

TEST(Geometry, DegenerateQuadThrows) {
  EXPECT_THROW(Quad({Point{0, 0}, Point{1, 1}, Point{2, 2}, Point{3, 3}}), GeometryError);
  EXPECT_THROW(Quad({Point{1, 1}, Point{1, 1}, Point{1, 1}, Point{1, 1}}), GeometryError);
}

TEST(Geometry, IntersectionAreaClosedForms) {
  EXPECT_NEAR(intersection_area(unit_square(), unit_square()), 1.0, 1e-12);
  EXPECT_NEAR(intersection_area(unit_square(), unit_square(0.5, 0)), 0.5, 1e-12);
  EXPECT_EQ(intersection_area(unit_square(), unit_square(3, 0)), 0.0);
  // Containment.
  const Quad big = Quad::axis_aligned(-1, -1, 3, 3);
  EXPECT_NEAR(intersection_area(unit_square(), big), 1.0, 1e-12);
}

TEST(Geometry, IntersectionAreaMatchesMonteCarlo) {
  Rng rng = make_stream(13, "geometry-mc");
  Rng mc = make_stream(13, "geometry-mc-samples");
  for (int i = 0; i < 100; ++i) {
    const auto a = corners_of(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(0.5, 1.5),
                              rng.uniform(0.3, 1.0), rng.uniform(-kPi, kPi));
    const auto b = corners_of(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(0.5, 1.5),
                              rng.uniform(0.3, 1.0), rng.uniform(-kPi, kPi));
    const testing::McEstimate est = testing::monte_carlo(a, b, 100000, mc);
    EXPECT_NEAR(intersection_area(quad_of(a), quad_of(b)), est.inter, 1e-2) << i;
  }
}

TEST(Geometry, IouExamples) {
  EXPECT_DOUBLE_EQ(iou(unit_square(), unit_square()), 1.0);
  EXPECT_EQ(iou(unit_square(), unit_square(2, 2)), 0.0);
  EXPECT_NEAR(iou(unit_square(), unit_square(0.5, 0)), 1.0 / 3.0, 1e-12);
}

TEST(Geometry, IouSymmetryContainmentAndRigidInvariance) {
  Rng rng = make_stream(17, "geometry-props");
  for (int i = 0; i < 300; ++i) {
    const double ax = rng.uniform(-5, 5), ay = rng.uniform(-5, 5);
    const double aw = rng.uniform(2, 10), ah = rng.uniform(1, 6), at = rng.uniform(-kPi, kPi);
    const double bx = rng.uniform(-5, 5), by = rng.uniform(-5, 5);
    const double bw = rng.uniform(2, 10), bh = rng.uniform(1, 6), bt = rng.uniform(-kPi, kPi);
    const Quad a = quad_of(corners_of(ax, ay, aw, ah, at));
    const Quad b = quad_of(corners_of(bx, by, bw, bh, bt));
    EXPECT_NEAR(iou(a, b), iou(b, a), 1e-9);
    EXPECT_EQ(intersection_area(a, b), intersection_area(b, a));

    // Rigid transform of both boxes.
    const double phi = rng.uniform(-kPi, kPi), tx = rng.uniform(-50, 50), ty = rng.uniform(-50, 50);
    auto move = [&](double x, double y) {
      return Point{std::cos(phi) * x - std::sin(phi) * y + tx,
                   std::sin(phi) * x + std::cos(phi) * y + ty};
    };
    const Point ca = move(ax, ay), cb = move(bx, by);
    const Quad a2 = quad_of(corners_of(ca.x, ca.y, aw, ah, at + phi));
    const Quad b2 = quad_of(corners_of(cb.x, cb.y, bw, bh, bt + phi));
    EXPECT_NEAR(iou(a, b), iou(a2, b2), 1e-6);

    // Containment: a scaled-down copy inside a.
    const Quad inner = quad_of(corners_of(ax, ay, 0.5 * aw, 0.5 * ah, at));
    EXPECT_NEAR(iou(a, inner), inner.area() / a.area(), 1e-6);
  }
}

TEST(Geometry, QuadAreaMatchesShoelace) {
  Rng rng = make_stream(19, "geometry-area");
  for (int i = 0; i < 100; ++i) {
    const auto pts = testing::random_convex_quad(rng);
    EXPECT_NEAR(quad_of(pts).area(), testing::polygon_area_oracle(pts), 1e-9);
  }
}

TEST(Geometry, AngleDifferenceFoldsHalfTurns) {
  EXPECT_NEAR(angle_difference(0.0, kPi), 0.0, 1e-12);
  EXPECT_NEAR(angle_difference(0.1, -0.1), 0.2, 1e-12);
  EXPECT_NEAR(angle_difference(-kPi / 2 + 0.05, kPi / 2 - 0.05), 0.1, 1e-12);
  EXPECT_NEAR(angle_difference(0.0, kPi / 2), kPi / 2, 1e-12);
}

}  // namespace
}  // namespace vtt
