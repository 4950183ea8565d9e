#ifndef VTT_ASSOCIATION_HPP_
#define VTT_ASSOCIATION_HPP_

// Pairwise distances between a trajectory's latest instance and a current
// detection, their weighted fusion, and the trajectory x detection matrix.

#include <cmath>
#include <span>
#include <vector>

#include "vtt/assignment.hpp"
#include "vtt/errors.hpp"
#include "vtt/geometry.hpp"
#include "vtt/types.hpp"

namespace vtt {

/// Fusion weights (alpha, beta, gamma) for appearance / IOU / morphology and
/// the morphology balance terms sigma1..3.
struct DistanceWeights {
  double alpha = 0.6;
  double beta = 0.2;
  double gamma = 0.2;
  double sigma1 = 0.3;
  double sigma2 = 0.3;
  double sigma3 = 0.7;

  void validate() const {
    for (double x : {alpha, beta, gamma, sigma1, sigma2, sigma3}) {
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw ValidationError("distance weights must be finite and non-negative");
      }
    }
    if (!(alpha + beta + gamma > 0.0)) throw ValidationError("alpha + beta + gamma must be > 0");
  }
};

/// Euclidean distance between two embeddings of equal dimension.
inline double embedding_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("embedding_distance: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

inline double iou_distance(const Quad& a, const Quad& b) { return 1.0 - iou(a, b); }

/// Shape/position/orientation dissimilarity. The position/size term is in
/// pixels and divided by the frame interval; the aspect and angle terms are
/// unitless. Angles are compared modulo pi.
inline double morphological_distance(const RotatedRect& ri, const RotatedRect& rj, int delta_f,
                                     const DistanceWeights& w) {
  if (delta_f < 1) throw ContractError("morphological_distance: frame interval must be >= 1");
  if (!(ri.w > 0 && ri.h > 0 && rj.w > 0 && rj.h > 0)) {
    throw ContractError("morphological_distance: rectangle sides must be positive");
  }
  const double shape = std::abs(ri.cx - rj.cx) + std::abs(ri.cy - rj.cy) + std::abs(ri.h - rj.h) +
                       std::abs(ri.w - rj.w);
  const double aspect = std::abs(ri.w / ri.h - rj.w / rj.h);
  return w.sigma1 * shape / static_cast<double>(delta_f) + w.sigma2 * aspect +
         w.sigma3 * angle_difference(ri.theta, rj.theta);
}

inline double fused_distance(double d_e, double d_p, double d_m, const DistanceWeights& w) {
  return w.alpha * d_e + w.beta * d_p + w.gamma * d_m;
}

/// Fused distance between every live trajectory's latest instance (rows, in
/// ascending id) and every detection (columns) at frame `t`. When
/// `use_embeddings` is false the appearance term is exactly zero.
inline DistanceMatrix build_distance_matrix(const TrajectoryPool& pool,
                                            std::span<const Detection> detections, int t,
                                            const DistanceWeights& w, bool use_embeddings) {
  DistanceMatrix m(pool.live().size(), detections.size());
  if (m.empty()) return m;

  std::vector<RotatedRect> det_rects;
  det_rects.reserve(detections.size());
  for (const Detection& d : detections) det_rects.push_back(quad_to_rotated_rect(d.quad));

  std::size_t row = 0;
  for (const auto& [id, traj] : pool.live()) {
    const TextInstance& head = traj.latest();
    const RotatedRect head_rect = quad_to_rotated_rect(head.quad);
    const int delta_f = t - head.frame;
    for (std::size_t col = 0; col < detections.size(); ++col) {
      const Detection& det = detections[col];
      double d_e = 0.0;
      if (use_embeddings) {
        if (!head.embedding || !det.embedding) {
          throw ContractError("build_distance_matrix: embedding missing in appearance mode");
        }
        d_e = embedding_distance(*head.embedding, *det.embedding);
      }
      const double d_p = iou_distance(head.quad, det.quad);
      const double d_m = morphological_distance(head_rect, det_rects[col], delta_f, w);
      m(row, col) = fused_distance(d_e, d_p, d_m, w);
    }
    ++row;
  }
  return m;
}

}  // namespace vtt

#endif  // VTT_ASSOCIATION_HPP_
