#ifndef VTT_LOCALIZATION_HPP_
#define VTT_LOCALIZATION_HPP_

// Spatio-temporal text localization: a probability map stamped from raw
// detections, a correlation complementer that re-locates the previous
// frame's instances in the current frame, mask fusion and binarization, and
// box extraction from the binary mask.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "vtt/errors.hpp"
#include "vtt/geometry.hpp"
#include "vtt/types.hpp"

namespace vtt {

/// Row-major 2-D grid. The tag keeps frames, masks and maps apart.
template <typename T, typename Tag>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw ContractError("grid dimensions must be non-negative");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  bool same_shape(int w, int h) const { return width_ == w && height_ == h; }
  template <typename U, typename G>
  bool same_shape(const Grid<U, G>& o) const {
    return width_ == o.width() && height_ == o.height();
  }

  T& at(int row, int col) { return data_[index(row, col)]; }
  const T& at(int row, int col) const { return data_[index(row, col)]; }

  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

struct ProbabilityTag {};
struct MaskTag {};
struct FrameTag {};

/// Per-pixel text probability. Values may exceed 1 after fusion.
using ProbabilityMap = Grid<double, ProbabilityTag>;
/// Values in {0, 1}.
using BinaryMask = Grid<std::uint8_t, MaskTag>;
/// 8-bit grayscale intensities.
using GrayFrame = Grid<std::uint8_t, FrameTag>;

/// Integer pixel rectangle [x, x+w) x [y, y+h).
struct PixelRect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool empty() const { return w <= 0 || h <= 0; }
  friend bool operator==(PixelRect, PixelRect) = default;
};

inline PixelRect clip(PixelRect r, int width, int height) {
  const int x0 = std::max(r.x, 0), y0 = std::max(r.y, 0);
  const int x1 = std::min(r.x + r.w, width), y1 = std::min(r.y + r.h, height);
  return {x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

/// Axis-aligned pixel box of a quad, edges rounded to the nearest pixel boundary.
inline PixelRect pixel_box(const Quad& q) {
  const Bounds b = q.bounds();
  const int x0 = static_cast<int>(std::lround(b.min_x));
  const int y0 = static_cast<int>(std::lround(b.min_y));
  const int x1 = static_cast<int>(std::lround(b.max_x));
  const int y1 = static_cast<int>(std::lround(b.max_y));
  return {x0, y0, x1 - x0, y1 - y0};
}

template <typename T, typename Tag>
Grid<T, Tag> crop(const Grid<T, Tag>& src, PixelRect r) {
  r = clip(r, src.width(), src.height());
  Grid<T, Tag> out(r.w, r.h);
  for (int row = 0; row < r.h; ++row) {
    for (int col = 0; col < r.w; ++col) out.at(row, col) = src.at(r.y + row, r.x + col);
  }
  return out;
}

/// Calls f(row, col) for every in-frame pixel whose center lies inside the
/// quad's convex hull.
template <typename F>
void for_each_covered_pixel(const Quad& q, int width, int height, F&& f) {
  const Bounds b = q.bounds();
  const int r0 = std::max(0, static_cast<int>(std::floor(b.min_y - 0.5)));
  const int r1 = std::min(height - 1, static_cast<int>(std::ceil(b.max_y - 0.5)));
  const int c0 = std::max(0, static_cast<int>(std::floor(b.min_x - 0.5)));
  const int c1 = std::min(width - 1, static_cast<int>(std::ceil(b.max_x - 0.5)));
  const auto hull = q.hull();
  for (int row = r0; row <= r1; ++row) {
    for (int col = c0; col <= c1; ++col) {
      if (convex_contains(hull, Point{col + 0.5, row + 0.5})) f(row, col);
    }
  }
}

/// Stamps each detection's confidence over its interior; overlaps keep the
/// maximum, background stays 0.
inline ProbabilityMap synthesize_probability_map(std::span<const Detection> detections, int width,
                                                 int height) {
  ProbabilityMap map(width, height, 0.0);
  for (const Detection& d : detections) {
    for_each_covered_pixel(d.quad, width, height, [&](int r, int c) {
      map.at(r, c) = std::max(map.at(r, c), d.confidence);
    });
  }
  return map;
}

struct NccPeak {
  int row = 0;
  int col = 0;
  double score = 0.0;
};

/// Zero-mean normalized cross-correlation of `tmpl` over every placement
/// inside `search`. Returns the top-left offset of the best placement (first
/// in row-major order on ties). Windows with zero variance score 0.
inline NccPeak ncc_correlate(const GrayFrame& tmpl, const GrayFrame& search) {
  const int tw = tmpl.width(), th = tmpl.height();
  const int sw = search.width(), sh = search.height();
  if (tw <= 0 || th <= 0 || tw >= sw || th >= sh) {
    throw ContractError("ncc_correlate: template must be strictly smaller than the search region");
  }
  const std::int64_t n = static_cast<std::int64_t>(tw) * th;
  std::int64_t t_sum = 0, t_sq = 0;
  for (std::uint8_t v : tmpl.values()) {
    t_sum += v;
    t_sq += static_cast<std::int64_t>(v) * v;
  }
  const double t_var = static_cast<double>(n * t_sq - t_sum * t_sum);
  if (t_var <= 0.0) throw NoSignalError("ncc_correlate: template has zero variance");

  // Integral images of the search region (sum and sum of squares).
  const int iw = sw + 1;
  std::vector<std::int64_t> integ(static_cast<std::size_t>(iw) * (sh + 1), 0);
  std::vector<std::int64_t> integ_sq(integ.size(), 0);
  for (int r = 0; r < sh; ++r) {
    std::int64_t row_sum = 0, row_sq = 0;
    for (int c = 0; c < sw; ++c) {
      const std::int64_t v = search.at(r, c);
      row_sum += v;
      row_sq += v * v;
      const std::size_t k = static_cast<std::size_t>(r + 1) * iw + (c + 1);
      integ[k] = integ[k - iw] + row_sum;
      integ_sq[k] = integ_sq[k - iw] + row_sq;
    }
  }
  auto box = [&](const std::vector<std::int64_t>& ii, int r, int c) {
    const std::size_t a = static_cast<std::size_t>(r) * iw + c;
    const std::size_t b = static_cast<std::size_t>(r + th) * iw + c;
    return ii[b + tw] - ii[b] - ii[a + tw] + ii[a];
  };

  NccPeak best{0, 0, -2.0};
  const std::uint8_t* tp = tmpl.values().data();
  const std::uint8_t* sp = search.values().data();
  for (int r = 0; r + th <= sh; ++r) {
    for (int c = 0; c + tw <= sw; ++c) {
      std::int64_t cross_sum = 0;
      for (int y = 0; y < th; ++y) {
        const std::uint8_t* trow = tp + static_cast<std::size_t>(y) * tw;
        const std::uint8_t* srow = sp + static_cast<std::size_t>(r + y) * sw + c;
        std::int32_t acc = 0;
        for (int x = 0; x < tw; ++x) acc += static_cast<std::int32_t>(trow[x]) * srow[x];
        cross_sum += acc;
      }
      const std::int64_t s_sum = box(integ, r, c);
      const std::int64_t s_sq = box(integ_sq, r, c);
      const double s_var = static_cast<double>(n * s_sq - s_sum * s_sum);
      double score = 0.0;
      if (s_var > 0.0) {
        score = static_cast<double>(n * cross_sum - t_sum * s_sum) / std::sqrt(t_var * s_var);
      }
      if (score > best.score) best = {r, c, score};
    }
  }
  best.score = std::clamp(best.score, -1.0, 1.0);
  return best;
}

struct ComplementConfig {
  /// Search region size relative to the template, per dimension.
  double search_scale = 2.0;
  /// Minimum correlation peak for a template to be declared found.
  double ncc_accept = 0.6;
  /// Upper bound on templates per frame; 0 means no bound.
  int max_templates = 0;
  /// Only complement previous instances with no overlapping raw detection in
  /// the current frame.
  bool only_lost = false;

  void validate() const {
    if (!(search_scale > 1.0)) throw ValidationError("search_scale must be > 1");
    if (!(ncc_accept > -1.0 && ncc_accept <= 1.0)) {
      throw ValidationError("ncc_accept must lie in (-1, 1]");
    }
    if (max_templates < 0) throw ValidationError("max_templates must be >= 0");
  }
};

/// One successful re-location: which previous box, where it was stamped.
struct ComplementStamp {
  std::size_t source = 0;
  PixelRect rect;
  double score = 0.0;
};

struct ComplementResult {
  BinaryMask mask;
  std::vector<ComplementStamp> stamps;
};

/// Re-locates every previous-frame box in the current frame by correlation
/// and OR-combines template-sized stamps at the accepted peaks.
inline ComplementResult complement(std::span<const Quad> previous, const GrayFrame& prev_frame,
                                   const GrayFrame& cur_frame, const ComplementConfig& cfg) {
  if (!prev_frame.same_shape(cur_frame)) {
    throw ContractError("complement: frames differ in size");
  }
  const int width = cur_frame.width(), height = cur_frame.height();
  ComplementResult out{BinaryMask(width, height, 0), {}};
  std::size_t budget = cfg.max_templates > 0 ? static_cast<std::size_t>(cfg.max_templates)
                                             : previous.size();
  for (std::size_t i = 0; i < previous.size() && budget > 0; ++i) {
    const PixelRect tr = clip(pixel_box(previous[i]), width, height);
    if (tr.empty()) continue;
    --budget;
    const int sw = static_cast<int>(std::lround(cfg.search_scale * tr.w));
    const int sh = static_cast<int>(std::lround(cfg.search_scale * tr.h));
    const int sx = static_cast<int>(std::lround(tr.x + 0.5 * tr.w - 0.5 * sw));
    const int sy = static_cast<int>(std::lround(tr.y + 0.5 * tr.h - 0.5 * sh));
    const PixelRect sr = clip(PixelRect{sx, sy, sw, sh}, width, height);
    if (sr.w <= tr.w || sr.h <= tr.h) continue;
    NccPeak peak;
    try {
      peak = ncc_correlate(crop(prev_frame, tr), crop(cur_frame, sr));
    } catch (const NoSignalError&) {
      continue;
    }
    if (peak.score < cfg.ncc_accept) continue;
    const PixelRect stamp{sr.x + peak.col, sr.y + peak.row, tr.w, tr.h};
    for (int r = stamp.y; r < stamp.y + stamp.h; ++r) {
      for (int c = stamp.x; c < stamp.x + stamp.w; ++c) out.mask.at(r, c) = 1;
    }
    out.stamps.push_back({i, stamp, peak.score});
  }
  return out;
}

inline BinaryMask build_complement_mask(std::span<const Quad> previous,
                                        const GrayFrame& prev_frame, const GrayFrame& cur_frame,
                                        const ComplementConfig& cfg) {
  return complement(previous, prev_frame, cur_frame, cfg).mask;
}

enum class FusionMode {
  /// B' = B + M only where B > h1 (the mask boosts pixels that are already
  /// confident).
  kGatedBoost,
  /// B' = B + M everywhere, so complementer stamps survive binarization even
  /// where the detector fired nothing.
  kMaskBoost,
};

struct FusionResult {
  /// Unclamped fused map B'.
  ProbabilityMap fused;
  BinaryMask mask;
};

inline FusionResult fuse_and_binarize(const ProbabilityMap& b, const BinaryMask& m, double h1,
                                      double h2, FusionMode mode = FusionMode::kGatedBoost) {
  if (!b.same_shape(m)) throw ContractError("fuse_and_binarize: dimension mismatch");
  if (!(0.0 <= h2 && h2 <= h1 && h1 <= 1.0)) {
    throw ContractError("fuse_and_binarize: thresholds must satisfy 0 <= h2 <= h1 <= 1");
  }
  FusionResult out{ProbabilityMap(b.width(), b.height()), BinaryMask(b.width(), b.height())};
  const auto& bv = b.values();
  const auto& mv = m.values();
  auto& fv = out.fused.values();
  auto& ov = out.mask.values();
  for (std::size_t i = 0; i < bv.size(); ++i) {
    const bool boost = mode == FusionMode::kMaskBoost || bv[i] > h1;
    fv[i] = boost ? bv[i] + static_cast<double>(mv[i]) : bv[i];
    ov[i] = fv[i] > h2 ? 1 : 0;
  }
  return out;
}

/// A connected mask component with its pixel bounding box.
struct Component {
  PixelRect box;
  std::vector<std::pair<int, int>> pixels;  // (row, col)
};

/// 8-connected components in row-major discovery order.
inline std::vector<Component> connected_components(const BinaryMask& mask) {
  const int w = mask.width(), h = mask.height();
  std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
  std::vector<Component> comps;
  std::vector<std::pair<int, int>> stack;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!mask.at(r, c) || label[static_cast<std::size_t>(r) * w + c] >= 0) continue;
      const int id = static_cast<int>(comps.size());
      Component comp;
      int min_r = r, max_r = r, min_c = c, max_c = c;
      stack.assign(1, {r, c});
      label[static_cast<std::size_t>(r) * w + c] = id;
      while (!stack.empty()) {
        const auto [pr, pc] = stack.back();
        stack.pop_back();
        comp.pixels.emplace_back(pr, pc);
        min_r = std::min(min_r, pr);
        max_r = std::max(max_r, pr);
        min_c = std::min(min_c, pc);
        max_c = std::max(max_c, pc);
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int nr = pr + dr, nc = pc + dc;
            if (nr < 0 || nr >= h || nc < 0 || nc >= w || !mask.at(nr, nc)) continue;
            int& l = label[static_cast<std::size_t>(nr) * w + nc];
            if (l >= 0) continue;
            l = id;
            stack.emplace_back(nr, nc);
          }
        }
      }
      comp.box = {min_c, min_r, max_c - min_c + 1, max_r - min_r + 1};
      comps.push_back(std::move(comp));
    }
  }
  return comps;
}

/// One detection per 8-connected mask component of at least `min_area`
/// pixels: the quad is the minimum-area rectangle around the component's
/// pixel squares, the confidence the mean fused probability clamped to [0, 1].
/// Output is ordered by the (top, left) of each component's bounding box.
inline std::vector<Detection> extract_boxes(const BinaryMask& mask, const ProbabilityMap& fused,
                                            int min_area = 9) {
  if (!mask.same_shape(fused)) throw ContractError("extract_boxes: dimension mismatch");
  std::vector<Component> comps = connected_components(mask);
  std::stable_sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
    return a.box.y < b.box.y || (a.box.y == b.box.y && a.box.x < b.box.x);
  });
  std::vector<Detection> out;
  for (const Component& comp : comps) {
    if (static_cast<int>(comp.pixels.size()) < min_area) continue;
    // Row spans are enough: interior pixel squares never touch the hull.
    std::vector<int> lo(comp.box.h, comp.box.x + comp.box.w), hi(comp.box.h, comp.box.x - 1);
    double conf = 0.0;
    for (const auto& [r, c] : comp.pixels) {
      lo[r - comp.box.y] = std::min(lo[r - comp.box.y], c);
      hi[r - comp.box.y] = std::max(hi[r - comp.box.y], c);
      conf += std::clamp(fused.at(r, c), 0.0, 1.0);
    }
    std::vector<Point> pts;
    pts.reserve(4 * lo.size());
    for (int i = 0; i < comp.box.h; ++i) {
      const double y = comp.box.y + i;
      pts.push_back({static_cast<double>(lo[i]), y});
      pts.push_back({static_cast<double>(lo[i]), y + 1});
      pts.push_back({static_cast<double>(hi[i] + 1), y});
      pts.push_back({static_cast<double>(hi[i] + 1), y + 1});
    }
    Detection d{min_area_rect(pts).to_quad(), conf / static_cast<double>(comp.pixels.size()), {},
                {}, -1};
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace vtt

#endif  // VTT_LOCALIZATION_HPP_
