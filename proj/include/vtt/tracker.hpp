#ifndef VTT_TRACKER_HPP_
#define VTT_TRACKER_HPP_

// Online tracking state machine. Per frame:
//   1. localization: raw detections, optionally complemented from the
//      previous frame and re-extracted from the fused mask;
//   2. embeddings for the localized detections;
//   3. fused distance matrix + gated Hungarian assignment;
//   4. trajectory updating (append / birth / lost / archive).

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vtt/assignment.hpp"
#include "vtt/association.hpp"
#include "vtt/embeddings.hpp"
#include "vtt/errors.hpp"
#include "vtt/localization.hpp"
#include "vtt/types.hpp"

namespace vtt {

struct TrackerConfig {
  DistanceWeights weights;
  /// Assigned pairs with fused distance above this are split.
  double gate = 4.0;
  double h1 = 0.6;
  double h2 = 0.3;
  /// Frames a trajectory may stay lost before it is archived.
  int max_lost = 30;
  ComplementConfig complement{.only_lost = true};
  bool complement_enabled = true;
  FusionMode fusion = FusionMode::kMaskBoost;
  int min_area = 9;
  /// Keep raw detections and add only unexplained components (see localize).
  bool keep_raw = true;
  bool embedding_enabled = true;
  EmbeddingProvider provider;
  /// Unmatched detections below this confidence do not start trajectories.
  double new_track_min_conf = 0.4;
  /// Carried for embedding training utilities; tracking does not use it.
  double triplet_margin = 1.0;

  bool needs_frames() const {
    return complement_enabled || (embedding_enabled && provider.needs_frames());
  }

  void validate() const {
    weights.validate();
    complement.validate();
    provider.validate();
    if (!(gate >= 0.0)) throw ValidationError("gate must be >= 0");
    if (!(0.0 <= h2 && h2 <= h1 && h1 <= 1.0)) {
      throw ValidationError("thresholds must satisfy 0 <= h2 <= h1 <= 1");
    }
    if (max_lost < 1) throw ValidationError("max_lost must be >= 1");
    if (min_area < 1) throw ValidationError("min_area must be >= 1");
    if (!(new_track_min_conf >= 0.0 && new_track_min_conf <= 1.0)) {
      throw ValidationError("new_track_min_conf must lie in [0, 1]");
    }
    if (!(triplet_margin >= 0.0)) throw ValidationError("triplet_margin must be >= 0");
  }
};

namespace detail {

inline double best_iou(const Quad& q, std::span<const Detection> dets, std::size_t* index) {
  double best = 0.0;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const double v = iou(q, dets[i].quad);
    if (v > best) {
      best = v;
      *index = i;
    }
  }
  return best;
}

/// Fraction of the quad's in-frame pixels where the raw map exceeds h2
/// (1 when no pixel is in frame, so such instances are never complemented).
inline double raw_coverage(const Quad& q, const ProbabilityMap& prob, double h2) {
  std::size_t total = 0, hit = 0;
  for_each_covered_pixel(q, prob.width(), prob.height(), [&](int r, int c) {
    ++total;
    hit += prob.at(r, c) > h2 ? 1 : 0;
  });
  return total == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(total);
}

}  // namespace detail

/// Builds the current frame's detection set from the raw detections, the
/// previous frame's localized detections and both frames.
///
/// With keep_raw the raw detections pass through unchanged and only
/// components of the fused mask that the raw map does not explain (less than
/// half their area above h2) are appended. Otherwise the re-extracted
/// components replace the raw set. Re-extracted boxes inherit transcription,
/// file embedding and hint from the raw detection they overlap (IOU >= 0.5),
/// else from the previous detection whose complement stamp they overlap.
/// With complement.only_lost, previous detections at least half covered by
/// the raw map are not searched.
inline std::vector<Detection> localize(std::span<const Detection> raw,
                                       std::span<const Detection> previous,
                                       const GrayFrame* prev_frame, const GrayFrame& cur_frame,
                                       const TrackerConfig& cfg) {
  const int width = cur_frame.width(), height = cur_frame.height();
  const ProbabilityMap prob = synthesize_probability_map(raw, width, height);

  std::vector<Quad> sources;
  std::vector<std::size_t> source_index;
  for (std::size_t i = 0; i < previous.size(); ++i) {
    if (cfg.complement.only_lost &&
        detail::raw_coverage(previous[i].quad, prob, cfg.h2) >= 0.5) {
      continue;
    }
    sources.push_back(previous[i].quad);
    source_index.push_back(i);
  }
  ComplementResult comp{BinaryMask(width, height, 0), {}};
  if (!sources.empty()) {
    if (prev_frame == nullptr) throw ContractError("localize: previous frame required");
    comp = complement(sources, *prev_frame, cur_frame, cfg.complement);
  }

  const FusionResult fused = fuse_and_binarize(prob, comp.mask, cfg.h1, cfg.h2, cfg.fusion);
  std::vector<Detection> extracted = extract_boxes(fused.mask, fused.fused, cfg.min_area);

  auto inherit = [&](Detection& d, bool try_raw) {
    std::size_t k = 0;
    const Detection* donor = nullptr;
    if (try_raw && detail::best_iou(d.quad, raw, &k) >= 0.5) {
      donor = &raw[k];
    } else {
      double best = 0.0;
      for (const ComplementStamp& s : comp.stamps) {
        const Quad sq = Quad::axis_aligned(s.rect.x, s.rect.y, s.rect.x + s.rect.w,
                                           s.rect.y + s.rect.h);
        const double v = iou(d.quad, sq);
        if (v >= 0.5 && v > best) {
          best = v;
          donor = &previous[source_index[s.source]];
        }
      }
    }
    if (donor != nullptr) {
      d.transcription = donor->transcription;
      d.embedding = donor->embedding;
      d.hint = donor->hint;
    }
  };

  if (!cfg.keep_raw) {
    for (Detection& d : extracted) inherit(d, true);
    return extracted;
  }
  std::vector<Detection> out(raw.begin(), raw.end());
  for (Detection& d : extracted) {
    if (detail::raw_coverage(d.quad, prob, cfg.h2) >= 0.5) continue;
    inherit(d, false);
    out.push_back(std::move(d));
  }
  return out;
}

/// Applies an assignment between the pool's live trajectories (rows, in
/// ascending id) and `detections` (columns) at frame t. Returns the instances
/// assigned at t in ascending id order.
inline std::vector<TextInstance> update_trajectories(TrajectoryPool& pool,
                                                     const Assignment& assignment,
                                                     std::span<const Detection> detections, int t,
                                                     const TrackerConfig& cfg) {
  std::vector<int> row_ids;
  row_ids.reserve(pool.live().size());
  for (const auto& [id, traj] : pool.live()) row_ids.push_back(id);

  std::vector<TextInstance> out;
  auto instance_of = [&](const Detection& d) {
    return TextInstance{d.quad, d.embedding, d.confidence, 0, t};
  };

  for (auto [row, col] : assignment.pairs) {
    if (row >= row_ids.size() || col >= detections.size()) {
      throw ContractError("update_trajectories: assignment index out of range");
    }
    Trajectory& traj = pool.live().at(row_ids[row]);
    TextInstance inst = instance_of(detections[col]);
    inst.trajectory_id = traj.id;
    traj.instances.push_back(inst);
    traj.state = TrackState::kActive;
    traj.lost_for = 0;
    out.push_back(std::move(inst));
  }

  std::vector<int> expired;
  for (std::size_t row : assignment.unmatched_rows) {
    Trajectory& traj = pool.live().at(row_ids.at(row));
    traj.state = TrackState::kLost;
    traj.lost_for = t - traj.last_frame();
    if (traj.lost_for > cfg.max_lost) expired.push_back(traj.id);
  }
  for (int id : expired) pool.archive(id);

  for (std::size_t col : assignment.unmatched_cols) {
    if (col >= detections.size()) throw ContractError("update_trajectories: column out of range");
    const Detection& d = detections[col];
    if (d.confidence < cfg.new_track_min_conf) continue;
    out.push_back(pool.start(instance_of(d)).latest());
  }

  std::sort(out.begin(), out.end(),
            [](const TextInstance& a, const TextInstance& b) { return a.trajectory_id < b.trajectory_id; });
  return out;
}

class Tracker {
 public:
  explicit Tracker(TrackerConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

  /// Processes frame t. `prev_frame` / `cur_frame` are required when the
  /// configuration uses pixels (complementation or patch embeddings).
  std::vector<TextInstance> step(std::span<const Detection> raw, const GrayFrame* prev_frame,
                                 const GrayFrame* cur_frame, int t) {
    if (last_t_ && t <= *last_t_) throw ContractError("Tracker::step: frame index must increase");
    if (cfg_.needs_frames() && cur_frame == nullptr) {
      throw ContractError("Tracker::step: current frame required by configuration");
    }
    for (const Detection& d : raw) {
      if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
        throw ValidationError("detection confidence outside [0, 1]");
      }
    }

    std::vector<Detection> dets;
    if (cfg_.complement_enabled) {
      // Without the previous frame (first call) nothing can be complemented.
      const bool have_prev = last_t_ && *last_t_ == t - 1;
      dets = localize(raw, have_prev ? std::span<const Detection>(previous_)
                                     : std::span<const Detection>(),
                      prev_frame, *cur_frame, cfg_);
    } else {
      dets.assign(raw.begin(), raw.end());
    }

    if (cfg_.embedding_enabled) {
      for (Detection& d : dets) d.embedding = cfg_.provider.embed(d, cur_frame);
    }

    const DistanceMatrix m =
        build_distance_matrix(pool_, dets, t, cfg_.weights, cfg_.embedding_enabled);
    const Assignment a = solve_assignment(m, cfg_.gate);
    std::vector<TextInstance> out = update_trajectories(pool_, a, dets, t, cfg_);

    previous_ = std::move(dets);
    last_t_ = t;
    return out;
  }

  const TrajectoryPool& pool() const { return pool_; }
  const TrackerConfig& config() const { return cfg_; }

 private:
  TrackerConfig cfg_;
  TrajectoryPool pool_;
  std::optional<int> last_t_;
  std::vector<Detection> previous_;
};

struct TrajectorySummary {
  int id = 0;
  int birth_frame = 0;
  int last_frame = 0;
  std::size_t length = 0;
  /// "active", "lost" or "archived".
  std::string state;

  friend bool operator==(const TrajectorySummary&, const TrajectorySummary&) = default;
};

struct TrackingResult {
  /// Every assigned instance, sorted by (frame, trajectory id).
  std::vector<TextInstance> instances;
  std::vector<TrajectorySummary> trajectories;
  int frame_count = 0;
  TrackerConfig config;
  std::uint64_t seed = 0;
};

/// Frame loader for run_video; returns the frame with the given index.
using FrameSource = std::function<GrayFrame(int)>;

inline std::vector<TrajectorySummary> summarize(const TrajectoryPool& pool) {
  std::vector<TrajectorySummary> out;
  for (const Trajectory& t : pool.removed()) {
    out.push_back({t.id, t.birth_frame(), t.last_frame(), t.instances.size(), "archived"});
  }
  for (const auto& [id, t] : pool.live()) {
    out.push_back({t.id, t.birth_frame(), t.last_frame(), t.instances.size(),
                   t.state == TrackState::kActive ? "active" : "lost"});
  }
  std::sort(out.begin(), out.end(),
            [](const TrajectorySummary& a, const TrajectorySummary& b) { return a.id < b.id; });
  return out;
}

/// Runs the tracker over `frames` consecutive frames starting at 0.
/// `detections[t]` holds frame t's detections (missing tail = no detections).
inline TrackingResult run_video(std::span<const FrameDetections> detections, int frame_count,
                                const FrameSource& frames, const TrackerConfig& cfg) {
  Tracker tracker(cfg);
  if (cfg.needs_frames() && frame_count > 0 && !frames) {
    throw ContractError("run_video: configuration needs frames but none were supplied");
  }
  TrackingResult result;
  result.frame_count = frame_count;
  result.config = cfg;
  result.seed = cfg.provider.seed;

  const FrameDetections empty;
  std::optional<GrayFrame> prev, cur;
  for (int t = 0; t < frame_count; ++t) {
    if (cfg.needs_frames()) {
      try {
        cur = frames(t);
      } catch (const IoError& e) {
        throw IoError("frame " + std::to_string(t) + ": " + e.what());
      }
    }
    const FrameDetections& raw =
        t < static_cast<int>(detections.size()) ? detections[static_cast<std::size_t>(t)] : empty;
    std::vector<TextInstance> out =
        tracker.step(raw, prev ? &*prev : nullptr, cur ? &*cur : nullptr, t);
    result.instances.insert(result.instances.end(), std::make_move_iterator(out.begin()),
                            std::make_move_iterator(out.end()));
    prev = std::move(cur);
    cur.reset();
  }
  result.trajectories = summarize(tracker.pool());
  return result;
}

}  // namespace vtt

#endif  // VTT_TRACKER_HPP_
