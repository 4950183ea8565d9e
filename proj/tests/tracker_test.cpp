#include <gtest/gtest.h>

#include <map>
#include <set>

#include "vtt/synth.hpp"
#include "vtt/tracker.hpp"

namespace vtt {
namespace {

Detection det(double x, double y, double w = 40, double h = 12, double c = 0.9) {
  return Detection{Quad::axis_aligned(x, y, x + w, y + h), c, {}, {}, -1};
}

TrackerConfig geometric() {
  TrackerConfig c;
  c.complement_enabled = false;
  c.embedding_enabled = false;
  return c;
}

std::vector<int> ids(const std::vector<TextInstance>& v) {
  std::vector<int> out;
  for (const TextInstance& i : v) out.push_back(i.trajectory_id);
  return out;
}

TEST(Tracker, ColdStartIssuesIdsInDetectionOrder) {
  Tracker tr(geometric());
  const std::vector<Detection> d{det(100, 10), det(10, 10), det(50, 60)};
  const auto out = tr.step(d, nullptr, nullptr, 0);
  EXPECT_EQ(ids(out), (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(out[0].quad, d[0].quad);
  EXPECT_EQ(out[1].quad, d[1].quad);
  EXPECT_EQ(out[2].quad, d[2].quad);
  EXPECT_EQ(tr.pool().next_id(), 4);
}

TEST(Tracker, PerfectContinuation) {
  TrackerConfig cfg = geometric();
  cfg.embedding_enabled = true;
  cfg.provider.kind = EmbeddingKind::kFromFile;
  Tracker tr(cfg);
  Detection d = det(20, 20);
  d.embedding = Embedding{0.6, 0.8};
  tr.step(std::vector<Detection>{d}, nullptr, nullptr, 0);
  const auto out = tr.step(std::vector<Detection>{d}, nullptr, nullptr, 1);
  EXPECT_EQ(ids(out), (std::vector<int>{1}));
  EXPECT_EQ(tr.pool().next_id(), 2);
  EXPECT_EQ(tr.pool().live().at(1).instances.size(), 2u);
}

TEST(Tracker, AllMatchedKeepsEveryTrajectoryActive) {
  Tracker tr(geometric());
  for (int t = 0; t < 5; ++t) {
    const std::vector<Detection> d{det(10 + t, 10), det(100 + t, 50), det(200 - t, 100)};
    EXPECT_EQ(ids(tr.step(d, nullptr, nullptr, t)), (std::vector<int>{1, 2, 3}));
  }
  for (const auto& [id, traj] : tr.pool().live()) {
    EXPECT_EQ(traj.state, TrackState::kActive);
    EXPECT_EQ(traj.instances.size(), 5u);
  }
}

TEST(Tracker, LostTrajectoryArchivedAfterMaxLostPlusOne) {
  TrackerConfig cfg = geometric();
  cfg.max_lost = 3;
  Tracker tr(cfg);
  tr.step(std::vector<Detection>{det(10, 10)}, nullptr, nullptr, 0);
  for (int t = 1; t <= 3; ++t) {
    tr.step({}, nullptr, nullptr, t);
    ASSERT_EQ(tr.pool().live().count(1), 1u) << t;
    EXPECT_EQ(tr.pool().live().at(1).state, TrackState::kLost);
    EXPECT_EQ(tr.pool().live().at(1).lost_for, t);
  }
  tr.step({}, nullptr, nullptr, 4);
  EXPECT_TRUE(tr.pool().live().empty());
  ASSERT_EQ(tr.pool().removed().size(), 1u);
  EXPECT_EQ(tr.pool().removed()[0].id, 1);

  // A reappearing box gets a fresh id.
  const auto out = tr.step(std::vector<Detection>{det(10, 10)}, nullptr, nullptr, 5);
  EXPECT_EQ(ids(out), (std::vector<int>{2}));
}

TEST(Tracker, GateRejectionStartsNewTrajectory) {
  Tracker tr(geometric());
  tr.step(std::vector<Detection>{det(0, 0)}, nullptr, nullptr, 0);
  // Far away: 0.2 * 1 + 0.2 * 0.3 * 300 = 18.2 > gate 4.
  const auto out = tr.step(std::vector<Detection>{det(300, 0)}, nullptr, nullptr, 1);
  EXPECT_EQ(ids(out), (std::vector<int>{2}));
  EXPECT_EQ(tr.pool().live().at(1).state, TrackState::kLost);
  EXPECT_EQ(tr.pool().live().at(1).lost_for, 1);
  EXPECT_EQ(tr.pool().live().at(2).state, TrackState::kActive);
}

TEST(Tracker, LowConfidenceExtendsButNeverStarts) {
  Tracker tr(geometric());
  EXPECT_TRUE(tr.step(std::vector<Detection>{det(10, 10, 40, 12, 0.3)}, nullptr, nullptr, 0).empty());
  tr.step(std::vector<Detection>{det(10, 10)}, nullptr, nullptr, 1);
  const auto out = tr.step(std::vector<Detection>{det(11, 10, 40, 12, 0.3)}, nullptr, nullptr, 2);
  EXPECT_EQ(ids(out), (std::vector<int>{1}));
}

TEST(Tracker, LostTrajectoryKeepsLatestEmbedding) {
  TrackerConfig cfg = geometric();
  cfg.embedding_enabled = true;
  cfg.provider.kind = EmbeddingKind::kFromFile;
  Tracker tr(cfg);
  Detection d = det(10, 10);
  d.embedding = Embedding{1.0, 0.0};
  tr.step(std::vector<Detection>{d}, nullptr, nullptr, 0);
  Detection far = det(300, 200);
  far.embedding = Embedding{0.0, 1.0};
  tr.step(std::vector<Detection>{far}, nullptr, nullptr, 1);
  EXPECT_EQ(tr.pool().live().at(1).latest().embedding, (Embedding{1.0, 0.0}));
}

TEST(Tracker, Preconditions) {
  Tracker tr(geometric());
  tr.step({}, nullptr, nullptr, 3);
  EXPECT_THROW(tr.step({}, nullptr, nullptr, 3), ContractError);
  EXPECT_THROW(tr.step({}, nullptr, nullptr, 2), ContractError);
  EXPECT_THROW(tr.step(std::vector<Detection>{det(0, 0, 40, 12, 1.5)}, nullptr, nullptr, 4),
               ValidationError);

  Tracker px(TrackerConfig{});
  EXPECT_THROW(px.step({}, nullptr, nullptr, 0), ContractError);

  TrackerConfig bad;
  bad.max_lost = 0;
  EXPECT_THROW(Tracker{bad}, ValidationError);
}

TEST(Tracker, ComplementRecoversDeletedDetection) {
  GrayFrame frame(160, 120, 128);
  Rng rng = make_stream(501, "tracker-static");
  for (auto& v : frame.values()) v = static_cast<std::uint8_t>(rng.integer(120, 136));
  std::vector<Detection> all;
  const int xs[3] = {10, 90, 30}, ys[3] = {10, 20, 80};
  for (int i = 0; i < 3; ++i) {
    render_box(frame, RotatedRect{xs[i] + 20.0, ys[i] + 6.0, 40, 12, 0.0}, 900 + i);
    all.push_back(det(xs[i], ys[i]));
  }
  TrackerConfig cfg;
  cfg.embedding_enabled = false;
  Tracker tr(cfg);
  tr.step(all, nullptr, &frame, 0);
  const std::vector<Detection> missing(all.begin() + 1, all.end());
  const auto out = tr.step(missing, &frame, &frame, 1);
  EXPECT_EQ(ids(out), (std::vector<int>{1, 2, 3}));
  ASSERT_EQ(out.size(), 3u);
  EXPECT_GE(iou(out[0].quad, all[0].quad), 0.7);

  cfg.complement_enabled = false;
  Tracker off(cfg);
  off.step(all, nullptr, nullptr, 0);
  EXPECT_EQ(ids(off.step(missing, nullptr, nullptr, 1)), (std::vector<int>{2, 3}));
}

// Two equal boxes moving head-on along nearly the same row. At the crossover
// a geometry-only tracker prefers the swapped pairing; distinct embeddings
// must prevent it. Identities are recovered from the detection quads.
struct Crossing {
  std::vector<FrameDetections> frames;
  std::map<std::pair<int, int>, int> truth;  // (frame, quad index key) -> gt id
};

Crossing crossing_harness(std::uint64_t seed) {
  Rng rng = make_stream(seed, "crossing-harness");
  Crossing c;
  for (int t = 0; t < 30; ++t) {
    FrameDetections f;
    const double ax = 20 + 3.0 * t, bx = 107 - 3.0 * t;
    for (auto [gt, x, y, word] : {std::tuple{1, ax, 50.0, "ALPHA"}, std::tuple{2, bx, 52.0, "OMEGA"}}) {
      Detection d = det(x + rng.normal(), y + 0.5 * rng.normal());
      d.transcription = word;
      d.hint = gt;
      f.push_back(d);
    }
    c.frames.push_back(f);
  }
  return c;
}

std::size_t count_switches(const Crossing& c, const TrackingResult& r) {
  std::map<int, std::vector<int>> seq;  // gt id -> assigned trajectory ids
  for (const TextInstance& inst : r.instances) {
    for (const Detection& d : c.frames[static_cast<std::size_t>(inst.frame)]) {
      if (d.quad == inst.quad) seq[d.hint].push_back(inst.trajectory_id);
    }
  }
  std::size_t sw = 0;
  for (const auto& [gt, s] : seq) {
    for (std::size_t i = 1; i < s.size(); ++i) sw += s[i] != s[i - 1];
  }
  return sw;
}

TEST(Tracker, CrossingHarnessEmbeddingsPreventSwitches) {
  int swapped_seeds = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Crossing c = crossing_harness(seed);
    TrackerConfig with = geometric();
    with.embedding_enabled = true;
    with.provider.kind = EmbeddingKind::kSynthetic;
    with.provider.seed = seed;
    const TrackingResult a = run_video(c.frames, 30, {}, with);
    EXPECT_EQ(count_switches(c, a), 0u) << seed;
    EXPECT_EQ(a.instances.size(), 60u);

    const TrackingResult g = run_video(c.frames, 30, {}, geometric());
    if (count_switches(c, g) >= 1) ++swapped_seeds;
  }
  EXPECT_GE(swapped_seeds, 3);
}

TEST(Tracker, RunVideoTrivialCases) {
  const TrackingResult e = run_video({}, 0, {}, geometric());
  EXPECT_TRUE(e.instances.empty());
  EXPECT_TRUE(e.trajectories.empty());

  const std::vector<FrameDetections> one{{det(0, 0), det(100, 0), det(0, 100)}};
  const TrackingResult r = run_video(one, 1, {}, geometric());
  ASSERT_EQ(r.trajectories.size(), 3u);
  for (const TrajectorySummary& s : r.trajectories) EXPECT_EQ(s.length, 1u);
}

ScenarioSpec small_spec(std::uint64_t seed) {
  ScenarioSpec s;
  s.width = 256;
  s.height = 192;
  s.frames = 200;
  s.tracks = 8;
  s.box_w_min = 20;
  s.box_w_max = 40;
  s.box_h_min = 8;
  s.box_h_max = 12;
  s.min_lifespan = 40;
  s.distractor_rate = 0.3;
  s.seed = seed;
  return s;
}

TEST(Tracker, RunVideoMatchesManualStepReplay) {
  const Scenario sc = generate(small_spec(11));
  const TrackerConfig cfg;
  const TrackingResult r = run_video(sc.detections, sc.spec.frames,
                                     [&](int t) { return sc.frames[static_cast<std::size_t>(t)]; }, cfg);
  Tracker tr(cfg);
  std::vector<TextInstance> all;
  std::size_t k = 0;
  for (int t = 0; t < sc.spec.frames; ++t) {
    const GrayFrame* prev = t > 0 ? &sc.frames[static_cast<std::size_t>(t - 1)] : nullptr;
    const auto out = tr.step(sc.detections[static_cast<std::size_t>(t)], prev,
                             &sc.frames[static_cast<std::size_t>(t)], t);
    std::size_t in_result = 0;
    while (k + in_result < r.instances.size() && r.instances[k + in_result].frame == t) ++in_result;
    EXPECT_EQ(out.size(), in_result) << t;
    k += in_result;
    all.insert(all.end(), out.begin(), out.end());
  }
  EXPECT_EQ(all, r.instances);
  EXPECT_EQ(r.trajectories.size(), static_cast<std::size_t>(tr.pool().next_id() - 1));
}

TEST(Tracker, ScenarioInvariantsAndDeterminism) {
  for (std::uint64_t seed = 21; seed < 24; ++seed) {
    const Scenario sc = generate(small_spec(seed));
    TrackerConfig cfg;
    cfg.max_lost = 10;
    const FrameSource src = [&](int t) { return sc.frames[static_cast<std::size_t>(t)]; };
    Tracker tr(cfg);
    std::set<int> archived;
    std::map<int, int> last_frame;
    for (int t = 0; t < sc.spec.frames; ++t) {
      const GrayFrame* prev = t > 0 ? &sc.frames[static_cast<std::size_t>(t - 1)] : nullptr;
      const auto out = tr.step(sc.detections[static_cast<std::size_t>(t)], prev,
                               &sc.frames[static_cast<std::size_t>(t)], t);
      std::set<int> seen;
      for (const TextInstance& i : out) {
        EXPECT_TRUE(seen.insert(i.trajectory_id).second) << "duplicate id in frame " << t;
        EXPECT_FALSE(archived.count(i.trajectory_id)) << "archived id reused";
        EXPECT_GT(i.trajectory_id, 0);
        auto it = last_frame.find(i.trajectory_id);
        if (it != last_frame.end()) {
          EXPECT_LT(it->second, t);
        }
        last_frame[i.trajectory_id] = t;
      }
      for (const auto& [id, traj] : tr.pool().live()) {
        EXPECT_LE(traj.lost_for, cfg.max_lost);
        if (traj.state == TrackState::kLost) {
          EXPECT_EQ(traj.lost_for, t - traj.last_frame());
        }
        EXPECT_EQ(traj.last_frame(), traj.instances.back().frame);
      }
      for (const Trajectory& a : tr.pool().removed()) archived.insert(a.id);
    }
    const TrackingResult a = run_video(sc.detections, sc.spec.frames, src, cfg);
    const TrackingResult b = run_video(sc.detections, sc.spec.frames, src, cfg);
    EXPECT_EQ(a.instances, b.instances);
    EXPECT_EQ(a.trajectories, b.trajectories);
  }
}

}  // namespace
}  // namespace vtt
