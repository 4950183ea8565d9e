#ifndef VTT_METRICS_HPP_
#define VTT_METRICS_HPP_

// CLEAR-MOT (MOTA, MOTP, FP/FN/ID switches), IDF1, mostly-matched /
// partially-matched / mostly-lost classification and detection P/R/F.

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vtt/assignment.hpp"
#include "vtt/errors.hpp"
#include "vtt/geometry.hpp"
#include "vtt/tracker.hpp"

namespace vtt {

struct GtBox {
  int frame = 0;
  Quad quad;
  std::optional<std::string> transcription;
};

/// Ground-truth trajectories keyed by id; each frame-ordered.
struct GroundTruth {
  std::map<int, std::vector<GtBox>> trajectories;

  std::size_t box_count() const {
    std::size_t n = 0;
    for (const auto& [id, boxes] : trajectories) n += boxes.size();
    return n;
  }

  void validate() const {
    for (const auto& [id, boxes] : trajectories) {
      for (std::size_t i = 1; i < boxes.size(); ++i) {
        if (boxes[i].frame <= boxes[i - 1].frame) {
          throw ValidationError("ground truth id " + std::to_string(id) +
                                ": frames must strictly increase");
        }
      }
    }
  }
};

/// A box with an identity (ground-truth id or predicted trajectory id).
struct TrackBox {
  int id = 0;
  Quad quad;
};

/// frame -> boxes in that frame.
using FrameBoxes = std::map<int, std::vector<TrackBox>>;

inline FrameBoxes frame_boxes(const GroundTruth& gt) {
  FrameBoxes out;
  for (const auto& [id, boxes] : gt.trajectories) {
    for (const GtBox& b : boxes) out[b.frame].push_back({id, b.quad});
  }
  return out;
}

inline FrameBoxes frame_boxes(std::span<const TextInstance> instances) {
  FrameBoxes out;
  for (const TextInstance& i : instances) out[i.frame].push_back({i.trajectory_id, i.quad});
  return out;
}

inline FrameBoxes frame_boxes(const TrackingResult& r) { return frame_boxes(r.instances); }

struct BoxMatch {
  std::size_t gt = 0;    // index into the frame's ground-truth boxes
  std::size_t pred = 0;  // index into the frame's predicted boxes
  double iou = 0.0;
};

/// Maximum-cardinality matching among pairs with IOU >= threshold, minimum
/// total (1 - IOU) among those. Returned in ascending gt index.
inline std::vector<BoxMatch> gated_box_matching(std::span<const TrackBox> gt,
                                                std::span<const TrackBox> pred,
                                                double iou_threshold) {
  std::vector<BoxMatch> out;
  if (gt.empty() || pred.empty()) return out;
  DistanceMatrix ious(gt.size(), pred.size());
  for (std::size_t g = 0; g < gt.size(); ++g) {
    for (std::size_t p = 0; p < pred.size(); ++p) ious(g, p) = iou(gt[g].quad, pred[p].quad);
  }
  // Infeasible pairs cost more than any complete set of feasible ones.
  const double infeasible = 2.0 * static_cast<double>(std::min(gt.size(), pred.size()) + 1);
  DistanceMatrix cost(gt.size(), pred.size());
  for (std::size_t g = 0; g < gt.size(); ++g) {
    for (std::size_t p = 0; p < pred.size(); ++p) {
      cost(g, p) = ious(g, p) >= iou_threshold ? 1.0 - ious(g, p) : infeasible;
    }
  }
  const Assignment a = solve_assignment(cost, 1.0 - iou_threshold);
  for (auto [g, p] : a.pairs) out.push_back({g, p, ious(g, p)});
  return out;
}

/// CLEAR-MOT frame matching: correspondences (gt id -> predicted id) from
/// the previous frame are kept while their IOU stays >= threshold; the rest
/// are matched by `gated_box_matching`.
inline std::vector<BoxMatch> match_frame(std::span<const TrackBox> gt,
                                         std::span<const TrackBox> pred,
                                         const std::map<int, int>& prev_matches,
                                         double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw ContractError("match_frame: iou_threshold must lie in (0, 1)");
  }
  std::vector<BoxMatch> out;
  std::vector<char> gt_used(gt.size(), 0), pred_used(pred.size(), 0);
  for (std::size_t g = 0; g < gt.size(); ++g) {
    const auto it = prev_matches.find(gt[g].id);
    if (it == prev_matches.end()) continue;
    for (std::size_t p = 0; p < pred.size(); ++p) {
      if (pred_used[p] || pred[p].id != it->second) continue;
      const double v = iou(gt[g].quad, pred[p].quad);
      if (v >= iou_threshold) {
        out.push_back({g, p, v});
        gt_used[g] = pred_used[p] = 1;
      }
      break;
    }
  }
  std::vector<TrackBox> rest_gt, rest_pred;
  std::vector<std::size_t> gt_idx, pred_idx;
  for (std::size_t g = 0; g < gt.size(); ++g) {
    if (!gt_used[g]) {
      rest_gt.push_back(gt[g]);
      gt_idx.push_back(g);
    }
  }
  for (std::size_t p = 0; p < pred.size(); ++p) {
    if (!pred_used[p]) {
      rest_pred.push_back(pred[p]);
      pred_idx.push_back(p);
    }
  }
  for (const BoxMatch& m : gated_box_matching(rest_gt, rest_pred, iou_threshold)) {
    out.push_back({gt_idx[m.gt], pred_idx[m.pred], m.iou});
  }
  std::sort(out.begin(), out.end(), [](const BoxMatch& a, const BoxMatch& b) { return a.gt < b.gt; });
  return out;
}

struct ClearMot {
  double mota = 0.0;
  double motp = 0.0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t idsw = 0;
  std::size_t matches = 0;
  std::size_t gt_boxes = 0;
  std::size_t pred_boxes = 0;
  /// gt id -> number of frames in which it was matched.
  std::map<int, std::size_t> matched_frames;
};

inline ClearMot clear_mot(const FrameBoxes& gt, const FrameBoxes& pred,
                          double iou_threshold = 0.5) {
  ClearMot r;
  std::vector<int> frames;
  for (const auto& [f, b] : gt) frames.push_back(f);
  for (const auto& [f, b] : pred) frames.push_back(f);
  std::sort(frames.begin(), frames.end());
  frames.erase(std::unique(frames.begin(), frames.end()), frames.end());

  const std::vector<TrackBox> none;
  std::map<int, int> prev;          // previous frame's gt id -> pred id
  std::map<int, int> last_matched;  // gt id -> most recent matched pred id
  double iou_sum = 0.0;
  for (int f : frames) {
    const auto gi = gt.find(f);
    const auto pi = pred.find(f);
    const std::vector<TrackBox>& g = gi == gt.end() ? none : gi->second;
    const std::vector<TrackBox>& p = pi == pred.end() ? none : pi->second;
    const std::vector<BoxMatch> m = match_frame(g, p, prev, iou_threshold);
    r.gt_boxes += g.size();
    r.pred_boxes += p.size();
    r.matches += m.size();
    r.fn += g.size() - m.size();
    r.fp += p.size() - m.size();
    prev.clear();
    for (const BoxMatch& bm : m) {
      const int gid = g[bm.gt].id, pid = p[bm.pred].id;
      iou_sum += bm.iou;
      const auto lm = last_matched.find(gid);
      if (lm != last_matched.end() && lm->second != pid) ++r.idsw;
      last_matched[gid] = pid;
      prev[gid] = pid;
      ++r.matched_frames[gid];
    }
  }
  if (r.gt_boxes == 0) throw UndefinedMetricError("clear_mot: no ground-truth boxes");
  r.mota = 1.0 - static_cast<double>(r.fn + r.fp + r.idsw) / static_cast<double>(r.gt_boxes);
  r.motp = r.matches == 0 ? 0.0 : iou_sum / static_cast<double>(r.matches);
  return r;
}

struct Idf1 {
  double idf1 = 0.0;
  std::size_t idtp = 0;
  std::size_t idfp = 0;
  std::size_t idfn = 0;
};

/// Identity true positives of the best one-to-one trajectory matching for an
/// overlap-count matrix (rows gt, cols pred).
inline std::size_t identity_true_positives(const std::vector<std::vector<std::size_t>>& overlap) {
  if (overlap.empty() || overlap.front().empty()) return 0;
  std::size_t top = 0;
  for (const auto& row : overlap) {
    for (std::size_t v : row) top = std::max(top, v);
  }
  DistanceMatrix cost(overlap.size(), overlap.front().size());
  for (std::size_t g = 0; g < cost.rows(); ++g) {
    for (std::size_t p = 0; p < cost.cols(); ++p) {
      cost(g, p) = static_cast<double>(top - overlap[g][p]);
    }
  }
  std::size_t idtp = 0;
  for (auto [g, p] : solve_assignment(cost).pairs) idtp += overlap[g][p];
  return idtp;
}

/// IDF1 = 2 IDTP / (2 IDTP + IDFP + IDFN); a pair of boxes counts towards a
/// trajectory pair's overlap when their IOU is >= threshold.
inline Idf1 idf1(const FrameBoxes& gt, const FrameBoxes& pred, double iou_threshold = 0.5) {
  std::map<int, std::size_t> gt_row, pred_col;
  std::size_t gt_total = 0, pred_total = 0;
  for (const auto& [f, boxes] : gt) {
    for (const TrackBox& b : boxes) gt_row.emplace(b.id, gt_row.size());
    gt_total += boxes.size();
  }
  for (const auto& [f, boxes] : pred) {
    for (const TrackBox& b : boxes) pred_col.emplace(b.id, pred_col.size());
    pred_total += boxes.size();
  }
  if (gt_total == 0) throw UndefinedMetricError("idf1: no ground-truth boxes");
  std::vector<std::vector<std::size_t>> overlap(gt_row.size(),
                                                std::vector<std::size_t>(pred_col.size(), 0));
  for (const auto& [f, g] : gt) {
    const auto pi = pred.find(f);
    if (pi == pred.end()) continue;
    for (const TrackBox& gb : g) {
      for (const TrackBox& pb : pi->second) {
        if (iou(gb.quad, pb.quad) >= iou_threshold) ++overlap[gt_row[gb.id]][pred_col[pb.id]];
      }
    }
  }
  Idf1 r;
  r.idtp = pred_col.empty() ? 0 : identity_true_positives(overlap);
  r.idfp = pred_total - r.idtp;
  r.idfn = gt_total - r.idtp;
  r.idf1 = 2.0 * static_cast<double>(r.idtp) /
           static_cast<double>(2 * r.idtp + r.idfp + r.idfn);
  return r;
}

struct MatchClasses {
  std::size_t mm = 0;
  std::size_t pm = 0;
  std::size_t ml = 0;
};

struct ClassThresholds {
  double mostly_matched = 0.8;
  double mostly_lost = 0.2;
};

/// Classifies each ground-truth trajectory by the fraction of its frames in
/// which CLEAR-MOT matching found it.
inline MatchClasses match_classes(const GroundTruth& gt, const ClearMot& mot,
                                  ClassThresholds th = {}) {
  MatchClasses r;
  for (const auto& [id, boxes] : gt.trajectories) {
    if (boxes.empty()) {
      ++r.ml;
      continue;
    }
    const auto it = mot.matched_frames.find(id);
    const double matched = it == mot.matched_frames.end() ? 0.0 : static_cast<double>(it->second);
    const double coverage = matched / static_cast<double>(boxes.size());
    if (coverage >= th.mostly_matched) {
      ++r.mm;
    } else if (coverage <= th.mostly_lost) {
      ++r.ml;
    } else {
      ++r.pm;
    }
  }
  return r;
}

inline MatchClasses match_classes(const GroundTruth& gt, const FrameBoxes& pred,
                                  double iou_threshold = 0.5, ClassThresholds th = {}) {
  const FrameBoxes g = frame_boxes(gt);
  if (g.empty()) return {0, 0, gt.trajectories.size()};
  return match_classes(gt, clear_mot(g, pred, iou_threshold), th);
}

struct DetectionScores {
  double precision = 0.0;
  double recall = 0.0;
  double fmeasure = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

/// Per-frame gated optimal matching, identities ignored. Undefined ratios
/// (no detections, no ground truth) are reported as 0.
inline DetectionScores detection_prf(const FrameBoxes& gt, const FrameBoxes& dets,
                                     double iou_threshold = 0.5) {
  DetectionScores s;
  std::size_t n_gt = 0, n_det = 0;
  for (const auto& [f, g] : gt) {
    n_gt += g.size();
    const auto di = dets.find(f);
    if (di != dets.end()) s.tp += gated_box_matching(g, di->second, iou_threshold).size();
  }
  for (const auto& [f, d] : dets) n_det += d.size();
  s.fp = n_det - s.tp;
  s.fn = n_gt - s.tp;
  s.precision = n_det == 0 ? 0.0 : static_cast<double>(s.tp) / static_cast<double>(n_det);
  s.recall = n_gt == 0 ? 0.0 : static_cast<double>(s.tp) / static_cast<double>(n_gt);
  s.fmeasure = s.precision + s.recall == 0.0
                   ? 0.0
                   : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

struct MetricsReport {
  double mota = 0.0;
  double motp = 0.0;
  double idf1 = 0.0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t idsw = 0;
  std::size_t mm = 0;
  std::size_t pm = 0;
  std::size_t ml = 0;
  double precision = 0.0;
  double recall = 0.0;
  double fmeasure = 0.0;
  std::size_t gt_trajectories = 0;
  std::size_t gt_boxes = 0;
  std::size_t pred_boxes = 0;
  std::size_t idtp = 0;
  std::size_t idfp = 0;
  std::size_t idfn = 0;
};

struct EvalOptions {
  double iou_threshold = 0.5;
  ClassThresholds classes;
};

inline MetricsReport evaluate(const GroundTruth& gt, std::span<const TextInstance> predictions,
                              const EvalOptions& opt = {}) {
  const FrameBoxes g = frame_boxes(gt);
  const FrameBoxes p = frame_boxes(predictions);
  const ClearMot mot = clear_mot(g, p, opt.iou_threshold);
  const Idf1 id = idf1(g, p, opt.iou_threshold);
  const MatchClasses mc = match_classes(gt, mot, opt.classes);
  const DetectionScores det = detection_prf(g, p, opt.iou_threshold);
  MetricsReport r;
  r.mota = mot.mota;
  r.motp = mot.motp;
  r.idf1 = id.idf1;
  r.fp = mot.fp;
  r.fn = mot.fn;
  r.idsw = mot.idsw;
  r.mm = mc.mm;
  r.pm = mc.pm;
  r.ml = mc.ml;
  r.precision = det.precision;
  r.recall = det.recall;
  r.fmeasure = det.fmeasure;
  r.gt_trajectories = gt.trajectories.size();
  r.gt_boxes = mot.gt_boxes;
  r.pred_boxes = mot.pred_boxes;
  r.idtp = id.idtp;
  r.idfp = id.idfp;
  r.idfn = id.idfn;
  return r;
}

inline MetricsReport evaluate(const GroundTruth& gt, const TrackingResult& result,
                              const EvalOptions& opt = {}) {
  return evaluate(gt, result.instances, opt);
}

}  // namespace vtt

#endif  // VTT_METRICS_HPP_
