#ifndef VTT_TYPES_HPP_
#define VTT_TYPES_HPP_

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vtt/errors.hpp"
#include "vtt/geometry.hpp"

namespace vtt {

/// Appearance feature of a text instance. Dimension is fixed within a run.
using Embedding = std::vector<double>;

inline void validate_embedding(const Embedding& e) {
  for (double x : e) {
    if (!std::isfinite(x)) throw ValidationError("embedding has a non-finite entry");
  }
}

/// Candidate text box for one frame.
struct Detection {
  Quad quad;
  double confidence = 1.0;
  std::optional<Embedding> embedding;
  std::optional<std::string> transcription;
  /// Identity hint carried by the input file (-1 if none). The tracker never
  /// reads it; the synthetic generator stores the source ground-truth id here.
  int hint = -1;
};

using FrameDetections = std::vector<Detection>;

/// A detection once it has been given a trajectory id.
struct TextInstance {
  Quad quad;
  std::optional<Embedding> embedding;
  double confidence = 1.0;
  int trajectory_id = 0;
  int frame = 0;
};

enum class TrackState { kActive, kLost };

struct Trajectory {
  int id = 0;
  std::vector<TextInstance> instances;
  TrackState state = TrackState::kActive;
  /// Consecutive frames without an associated detection (0 while active).
  int lost_for = 0;

  const TextInstance& latest() const { return instances.back(); }
  int birth_frame() const { return instances.front().frame; }
  int last_frame() const { return instances.back().frame; }
};

/// Live trajectories keyed by id (iteration in ascending id) plus the archive
/// of removed ones. Ids are never reused.
class TrajectoryPool {
 public:
  const std::map<int, Trajectory>& live() const { return live_; }
  std::map<int, Trajectory>& live() { return live_; }
  const std::vector<Trajectory>& removed() const { return removed_; }
  int next_id() const { return next_id_; }
  bool empty() const { return live_.empty(); }

  Trajectory& start(TextInstance first) {
    const int id = next_id_++;
    first.trajectory_id = id;
    Trajectory t;
    t.id = id;
    t.instances.push_back(std::move(first));
    return live_.emplace(id, std::move(t)).first->second;
  }

  void archive(int id) {
    auto it = live_.find(id);
    if (it == live_.end()) return;
    removed_.push_back(std::move(it->second));
    live_.erase(it);
  }

  friend bool operator==(const TrajectoryPool&, const TrajectoryPool&) = default;

 private:
  std::map<int, Trajectory> live_;
  std::vector<Trajectory> removed_;
  int next_id_ = 1;
};

inline bool operator==(const TextInstance& a, const TextInstance& b) {
  return a.quad == b.quad && a.embedding == b.embedding && a.confidence == b.confidence &&
         a.trajectory_id == b.trajectory_id && a.frame == b.frame;
}

inline bool operator==(const Trajectory& a, const Trajectory& b) {
  return a.id == b.id && a.instances == b.instances && a.state == b.state &&
         a.lost_for == b.lost_for;
}

}  // namespace vtt

#endif  // VTT_TYPES_HPP_
