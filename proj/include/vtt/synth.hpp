#ifndef VTT_SYNTH_HPP_
#define VTT_SYNTH_HPP_

// Deterministic synthetic video-text scenarios: textured boxes moving over a
// noisy background, their ground truth, and detections derived from the
// ground truth by dropout, vertex jitter and random false boxes.
//
// Random streams (see rng.hpp): "tracks" (layout, sizes, motion, lifespans,
// words), "hardness", "texture", "dropout", "jitter", "confidence",
// "distractor", and "background" indexed by frame.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "vtt/errors.hpp"
#include "vtt/geometry.hpp"
#include "vtt/localization.hpp"
#include "vtt/metrics.hpp"
#include "vtt/rng.hpp"
#include "vtt/types.hpp"

namespace vtt {

enum class MotionKind { kLinear, kCrossing, kCircular, kMixed };

struct ScenarioSpec {
  int width = 512;
  int height = 384;
  int frames = 200;
  int tracks = 20;
  MotionKind motion = MotionKind::kLinear;
  /// Pixels per frame.
  double speed = 2.0;
  double dropout_p = 0.3;
  double jitter_sigma = 0.5;
  /// Expected false boxes per frame.
  double distractor_rate = 0.0;
  /// Pairs of tracks sharing texture, transcription and box size.
  int twin_pairs = 0;
  std::uint64_t seed = 1;

  int box_w_min = 32;
  int box_w_max = 72;
  int box_h_min = 12;
  int box_h_max = 20;
  /// Shortest track lifetime in frames; 0 means every track spans the video.
  int min_lifespan = 0;
  /// Fraction of tracks the simulated detector mostly misses. Their drop
  /// probability is `hard_dropout_p`; the others' is lowered so the expected
  /// drop rate over all tracks stays `dropout_p`.
  double hard_fraction = 0.0;
  double hard_dropout_p = 0.9;
  double confidence_min = 0.7;
  double confidence_max = 0.99;
  /// Background is 128 +- this, redrawn every frame.
  int noise_amplitude = 16;

  void validate() const {
    if (width <= 0 || height <= 0) throw ValidationError("scenario dimensions must be positive");
    if (frames < 0 || tracks < 0) throw ValidationError("frames and tracks must be >= 0");
    for (double p : {dropout_p, hard_fraction, hard_dropout_p}) {
      if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("probabilities must lie in [0, 1]");
    }
    if (!(speed >= 0.0) || !(jitter_sigma >= 0.0) || !(distractor_rate >= 0.0)) {
      throw ValidationError("speed, jitter_sigma and distractor_rate must be >= 0");
    }
    if (twin_pairs < 0 || 2 * twin_pairs > tracks) {
      throw ValidationError("twin_pairs must satisfy 0 <= 2 * twin_pairs <= tracks");
    }
    if (box_w_min < 2 || box_h_min < 2 || box_w_min > box_w_max || box_h_min > box_h_max) {
      throw ValidationError("invalid box size range");
    }
    if (box_w_max >= width || box_h_max >= height) {
      throw ValidationError("tracks cannot fit in the frame");
    }
    if (min_lifespan < 0 || min_lifespan > frames) {
      throw ValidationError("min_lifespan must lie in [0, frames]");
    }
    if (!(0.0 <= confidence_min && confidence_min <= confidence_max && confidence_max <= 1.0)) {
      throw ValidationError("invalid confidence range");
    }
    if (noise_amplitude < 0 || noise_amplitude > 127) {
      throw ValidationError("noise_amplitude must lie in [0, 127]");
    }
  }
};

/// Word list for transcriptions.
inline constexpr std::array<const char*, 96> kWordList = {
    "STOP",    "EXIT",    "OPEN",    "CLOSED",  "SALE",    "HOTEL",   "BANK",    "PARK",
    "TAXI",    "POLICE",  "CAFE",    "BAKERY",  "MARKET",  "PHARMACY", "SCHOOL", "MUSEUM",
    "STATION", "TICKETS", "PLATFORM", "GATE",   "NORTH",   "SOUTH",   "EAST",    "WEST",
    "CENTRAL", "AVENUE",  "STREET",  "ROAD",    "BRIDGE",  "TUNNEL",  "AIRPORT", "HARBOR",
    "LIBRARY", "THEATER", "CINEMA",  "GARDEN",  "PLAZA",   "TOWER",   "MALL",    "OUTLET",
    "DINER",   "PIZZA",   "SUSHI",   "NOODLES", "COFFEE",  "TEA",     "JUICE",   "BAR",
    "PUB",     "GRILL",   "KITCHEN", "FLOWERS", "BOOKS",   "MUSIC",   "GAMES",   "TOYS",
    "SHOES",   "FASHION", "JEWELRY", "WATCHES", "OPTICS",  "DENTIST", "CLINIC",  "HOSPITAL",
    "FIRE",    "WATER",   "POWER",   "FUEL",    "PARKING", "TOLL",    "YIELD",   "SLOW",
    "DETOUR",  "CAUTION", "DANGER",  "WELCOME", "THANKS",  "INFO",    "HELP",    "TOILET",
    "ENTRY",   "LOBBY",   "FLOOR",   "LEVEL",   "ZONE",    "SECTOR",  "BLOCK",   "UNIT",
    "OFFICE",  "STUDIO",  "GALLERY", "ARENA",   "STADIUM", "COURT",   "FIELD",   "HALL",
};

/// Per-seed cell pattern painted over a box in box-normalized coordinates.
struct Texture {
  static constexpr int kRows = 4;
  static constexpr int kCols = 12;
  std::array<std::uint8_t, kRows * kCols> cells{};

  static Texture from_seed(std::uint64_t texture_seed) {
    Rng rng = make_stream(texture_seed, "texture");
    Texture t;
    for (std::size_t i = 0; i < t.cells.size(); ++i) {
      const bool dark = i == 0 ? true : i == 1 ? false : rng.bernoulli(0.5);
      t.cells[i] = static_cast<std::uint8_t>(dark ? rng.integer(20, 80) : rng.integer(170, 235));
    }
    return t;
  }

  /// u, v in [0, 1] across the box's w and h sides.
  std::uint8_t sample(double u, double v) const {
    const int c = std::clamp(static_cast<int>(u * kCols), 0, kCols - 1);
    const int r = std::clamp(static_cast<int>(v * kRows), 0, kRows - 1);
    return cells[static_cast<std::size_t>(r) * kCols + c];
  }
};

/// Paints the texture over every pixel whose center lies in `rect`. Hard
/// edges, no anti-aliasing.
inline void render_box(GrayFrame& frame, const RotatedRect& rect, std::uint64_t texture_seed) {
  const Texture tex = Texture::from_seed(texture_seed);
  const double c = std::cos(rect.theta), s = std::sin(rect.theta);
  for_each_covered_pixel(rect.to_quad(), frame.width(), frame.height(), [&](int row, int col) {
    const double dx = col + 0.5 - rect.cx, dy = row + 0.5 - rect.cy;
    const double lu = c * dx + s * dy + 0.5 * rect.w;
    const double lv = -s * dx + c * dy + 0.5 * rect.h;
    frame.at(row, col) = tex.sample(lu / rect.w, lv / rect.h);
  });
}

struct TrackInfo {
  int id = 0;
  int start_frame = 0;
  int end_frame = 0;  // inclusive
  double w = 0.0;
  double h = 0.0;
  std::uint64_t texture_seed = 0;
  std::string transcription;
  double dropout_p = 0.0;
  /// Id of the twin track, or 0.
  int twin = 0;
};

struct Scenario {
  ScenarioSpec spec;
  std::vector<TrackInfo> tracks;
  std::vector<GrayFrame> frames;
  GroundTruth gt;
  std::vector<FrameDetections> detections;
  /// Number of ground-truth boxes removed by dropout.
  std::size_t dropped = 0;
};

namespace detail {

inline double reflect(double x, double lo, double hi) {
  const double len = hi - lo;
  if (len <= 0.0) return lo;
  double y = std::fmod(x - lo, 2.0 * len);
  if (y < 0.0) y += 2.0 * len;
  return lo + (y > len ? 2.0 * len - y : y);
}

struct Motion {
  MotionKind kind = MotionKind::kLinear;
  double x0 = 0, y0 = 0, vx = 0, vy = 0;  // linear / crossing (reference at t0)
  double t0 = 0;
  double radius = 0, omega = 0, phase = 0;  // circular around (x0, y0)
};

inline Point center_at(const Motion& m, double t, double w, double h, const ScenarioSpec& s) {
  const double lo_x = 0.5 * w, hi_x = s.width - 0.5 * w;
  const double lo_y = 0.5 * h, hi_y = s.height - 0.5 * h;
  if (m.kind == MotionKind::kCircular) {
    return {m.x0 + m.radius * std::cos(m.omega * t + m.phase),
            m.y0 + m.radius * std::sin(m.omega * t + m.phase)};
  }
  return {reflect(m.x0 + m.vx * (t - m.t0), lo_x, hi_x),
          reflect(m.y0 + m.vy * (t - m.t0), lo_y, hi_y)};
}

}  // namespace detail

/// Generates frames, ground truth and corrupted detections. Bitwise
/// deterministic in `spec.seed`.
inline Scenario generate(const ScenarioSpec& spec) {
  spec.validate();
  Scenario sc;
  sc.spec = spec;
  const int n = spec.tracks;
  Rng layout = make_stream(spec.seed, "tracks");

  // Distinct words for distinct tracks; twins share.
  std::vector<std::size_t> word_order(kWordList.size());
  for (std::size_t i = 0; i < word_order.size(); ++i) word_order[i] = i;
  for (std::size_t i = word_order.size(); i > 1; --i) {
    std::swap(word_order[i - 1], word_order[layout.below(i)]);
  }

  std::vector<detail::Motion> motion(n);
  sc.tracks.resize(n);
  for (int k = 0; k < n; ++k) {
    TrackInfo& tr = sc.tracks[k];
    tr.id = k + 1;
    const bool twin_second = spec.twin_pairs > 0 && k >= spec.twin_pairs && k < 2 * spec.twin_pairs;
    MotionKind kind = spec.motion;
    if (kind == MotionKind::kMixed) kind = layout.bernoulli(0.5) ? MotionKind::kLinear
                                                                : MotionKind::kCircular;
    const bool crossing_second = kind == MotionKind::kCrossing && k % 2 == 1;
    if (kind == MotionKind::kCrossing && k % 2 == 0 && k + 1 >= n) kind = MotionKind::kLinear;

    tr.w = layout.integer(spec.box_w_min, spec.box_w_max);
    tr.h = layout.integer(spec.box_h_min, spec.box_h_max);
    if (twin_second) {
      tr.w = sc.tracks[k - spec.twin_pairs].w;
      tr.h = sc.tracks[k - spec.twin_pairs].h;
    } else if (crossing_second) {
      tr.w = sc.tracks[k - 1].w;
      tr.h = sc.tracks[k - 1].h;
    }

    if (spec.min_lifespan > 0 && spec.min_lifespan < spec.frames) {
      const int len = layout.integer(spec.min_lifespan, spec.frames);
      tr.start_frame = layout.integer(0, spec.frames - len);
      tr.end_frame = tr.start_frame + len - 1;
    } else {
      tr.start_frame = 0;
      tr.end_frame = spec.frames - 1;
    }
    if (crossing_second) {
      tr.start_frame = sc.tracks[k - 1].start_frame;
      tr.end_frame = sc.tracks[k - 1].end_frame;
    }

    detail::Motion& m = motion[k];
    const double lo_x = 0.5 * tr.w, hi_x = spec.width - 0.5 * tr.w;
    const double lo_y = 0.5 * tr.h, hi_y = spec.height - 0.5 * tr.h;
    if (kind == MotionKind::kCircular) {
      const double max_r = std::min({60.0, 0.5 * (hi_x - lo_x), 0.5 * (hi_y - lo_y)});
      m.kind = kind;
      m.radius = max_r < 10.0 ? max_r : layout.uniform(10.0, max_r);
      m.x0 = layout.uniform(lo_x + m.radius, hi_x - m.radius);
      m.y0 = layout.uniform(lo_y + m.radius, hi_y - m.radius);
      m.omega = m.radius > 0.0 ? spec.speed / m.radius : 0.0;
      if (layout.bernoulli(0.5)) m.omega = -m.omega;
      m.phase = layout.uniform(0.0, 2.0 * std::numbers::pi);
    } else if (crossing_second) {
      // Mirror of the partner around the meeting point, a few pixels apart
      // vertically.
      const detail::Motion& p = motion[k - 1];
      m = p;
      m.vx = -p.vx;
      m.y0 = std::clamp(p.y0 + layout.uniform(-2.0, 2.0), lo_y, hi_y);
    } else if (kind == MotionKind::kCrossing) {
      m.kind = kind;
      m.x0 = layout.uniform(lo_x, hi_x);
      m.y0 = layout.uniform(lo_y, hi_y);
      m.vx = layout.bernoulli(0.5) ? spec.speed : -spec.speed;
      m.vy = 0.0;
      m.t0 = layout.uniform(tr.start_frame, tr.end_frame + 1);
    } else {
      const double dir = layout.uniform(0.0, 2.0 * std::numbers::pi);
      m.kind = MotionKind::kLinear;
      m.x0 = layout.uniform(lo_x, hi_x);
      m.y0 = layout.uniform(lo_y, hi_y);
      m.vx = spec.speed * std::cos(dir);
      m.vy = spec.speed * std::sin(dir);
    }

    tr.texture_seed = make_stream(spec.seed, "texture", static_cast<std::uint64_t>(k)).next();
    const std::size_t wi = static_cast<std::size_t>(k) % word_order.size();
    tr.transcription = kWordList[word_order[wi]];
    if (static_cast<std::size_t>(k) >= word_order.size()) {
      tr.transcription += std::to_string(k / static_cast<int>(word_order.size()));
    }
    if (twin_second) {
      TrackInfo& first = sc.tracks[k - spec.twin_pairs];
      tr.texture_seed = first.texture_seed;
      tr.transcription = first.transcription;
      tr.twin = first.id;
      first.twin = tr.id;
    }
  }

  // Hard tracks and per-track drop probabilities.
  {
    Rng hard_rng = make_stream(spec.seed, "hardness");
    const int n_hard = static_cast<int>(std::lround(spec.hard_fraction * n));
    std::vector<int> order(n);
    for (int k = 0; k < n; ++k) order[k] = k;
    for (int i = n; i > 1; --i) std::swap(order[i - 1], order[hard_rng.below(i)]);
    const double f = n > 0 ? static_cast<double>(n_hard) / n : 0.0;
    const double easy = f < 1.0 ? std::clamp((spec.dropout_p - f * spec.hard_dropout_p) / (1.0 - f),
                                             0.0, 1.0)
                                : spec.dropout_p;
    for (int k = 0; k < n; ++k) sc.tracks[k].dropout_p = easy;
    for (int i = 0; i < n_hard; ++i) sc.tracks[order[i]].dropout_p = spec.hard_dropout_p;
  }

  Rng drop_rng = make_stream(spec.seed, "dropout");
  Rng jitter_rng = make_stream(spec.seed, "jitter");
  Rng conf_rng = make_stream(spec.seed, "confidence");
  Rng distractor_rng = make_stream(spec.seed, "distractor");

  sc.frames.reserve(spec.frames);
  sc.detections.resize(spec.frames);
  for (int f = 0; f < spec.frames; ++f) {
    GrayFrame frame(spec.width, spec.height);
    Rng bg = make_stream(spec.seed, "background", static_cast<std::uint64_t>(f));
    for (auto& px : frame.values()) {
      px = static_cast<std::uint8_t>(128 + bg.integer(-spec.noise_amplitude, spec.noise_amplitude));
    }
    FrameDetections& dets = sc.detections[f];
    for (int k = 0; k < n; ++k) {
      const TrackInfo& tr = sc.tracks[k];
      if (f < tr.start_frame || f > tr.end_frame) continue;
      const Point c = detail::center_at(motion[k], f, tr.w, tr.h, spec);
      const RotatedRect rect{c.x, c.y, tr.w, tr.h, 0.0};
      render_box(frame, rect, tr.texture_seed);
      const Quad gt_quad = rect.to_quad();
      sc.gt.trajectories[tr.id].push_back({f, gt_quad, tr.transcription});

      // Every stream advances for every box so knobs stay independent.
      const bool dropped = drop_rng.bernoulli(tr.dropout_p);
      std::array<Point, 4> v = gt_quad.vertices();
      for (Point& p : v) {
        p.x += spec.jitter_sigma * jitter_rng.normal();
        p.y += spec.jitter_sigma * jitter_rng.normal();
      }
      const double conf = conf_rng.uniform(spec.confidence_min, spec.confidence_max);
      if (dropped) {
        ++sc.dropped;
        continue;
      }
      Quad q = gt_quad;
      try {
        q = Quad(v);
      } catch (const GeometryError&) {
      }
      dets.push_back({q, conf, std::nullopt, tr.transcription, tr.id});
    }
    const int n_false = distractor_rng.poisson(spec.distractor_rate);
    for (int i = 0; i < n_false; ++i) {
      const double w = distractor_rng.integer(spec.box_w_min, spec.box_w_max);
      const double h = distractor_rng.integer(spec.box_h_min, spec.box_h_max);
      const double x = distractor_rng.uniform(0.0, spec.width - w);
      const double y = distractor_rng.uniform(0.0, spec.height - h);
      const double conf = distractor_rng.uniform(spec.confidence_min, spec.confidence_max);
      const char* word = kWordList[distractor_rng.below(kWordList.size())];
      dets.push_back({Quad::axis_aligned(x, y, x + w, y + h), conf, std::nullopt, word, -1});
    }
    sc.frames.push_back(std::move(frame));
  }
  return sc;
}

}  // namespace vtt

#endif  // VTT_SYNTH_HPP_
