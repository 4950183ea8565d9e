#ifndef VTT_EMBEDDINGS_HPP_
#define VTT_EMBEDDINGS_HPP_

// Per-detection appearance embeddings and triplet-loss utilities.
//
// The visual part is a normalized 16x16 intensity descriptor of the
// detection's patch, the semantic part a character-bigram histogram of its
// transcription. Both are 256-d; the combined embedding concatenates them
// (visual first) into 512-d. All sums run in a fixed order so results are
// bitwise reproducible.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vtt/association.hpp"
#include "vtt/errors.hpp"
#include "vtt/localization.hpp"
#include "vtt/rng.hpp"
#include "vtt/types.hpp"

namespace vtt {

namespace detail {

inline void normalize_in_place(Embedding& e) {
  double sq = 0.0;
  for (double x : e) sq += x * x;
  if (sq <= 0.0) {
    std::fill(e.begin(), e.end(), 0.0);
    return;
  }
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : e) x *= inv;
}

inline double bilinear(const GrayFrame& img, double y, double x) {
  y = std::clamp(y, 0.0, static_cast<double>(img.height() - 1));
  x = std::clamp(x, 0.0, static_cast<double>(img.width() - 1));
  const int y0 = static_cast<int>(y), x0 = static_cast<int>(x);
  const int y1 = std::min(y0 + 1, img.height() - 1), x1 = std::min(x0 + 1, img.width() - 1);
  const double fy = y - y0, fx = x - x0;
  const double top = (1 - fx) * img.at(y0, x0) + fx * img.at(y0, x1);
  const double bot = (1 - fx) * img.at(y1, x0) + fx * img.at(y1, x1);
  return (1 - fy) * top + fy * bot;
}

}  // namespace detail

inline constexpr int kPatchGrid = 16;
inline constexpr int kTranscriptionBuckets = 256;

/// Patch resampled to a side x side grid (bilinear, pixel-center aligned),
/// flattened row-major, mean-subtracted and scaled to unit norm. A flat patch
/// gives the zero vector.
inline Embedding patch_descriptor(const GrayFrame& patch, int side = kPatchGrid) {
  if (patch.empty()) throw ContractError("patch_descriptor: empty patch");
  Embedding e(static_cast<std::size_t>(side) * side);
  const double sy = static_cast<double>(patch.height()) / side;
  const double sx = static_cast<double>(patch.width()) / side;
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      e[static_cast<std::size_t>(i) * side + j] =
          detail::bilinear(patch, (i + 0.5) * sy - 0.5, (j + 0.5) * sx - 0.5);
    }
  }
  double mean = 0.0;
  for (double x : e) mean += x;
  mean /= static_cast<double>(e.size());
  for (double& x : e) x -= mean;
  // Sub-ulp residue of a flat patch must read as zero variance.
  double sq = 0.0;
  for (double x : e) sq += x * x;
  if (sq < 1e-18) return Embedding(e.size(), 0.0);
  detail::normalize_in_place(e);
  return e;
}

/// Bucket of an ordered byte pair: FNV-1a-32 over the two bytes, mod buckets.
inline std::size_t bigram_bucket(unsigned char a, unsigned char b, std::size_t buckets) {
  std::uint32_t h = 2166136261u;
  h = (h ^ a) * 16777619u;
  h = (h ^ b) * 16777619u;
  return h % buckets;
}

/// Histogram of byte bigrams of "\x02" + text + "\x03" (start/end sentinels)
/// over `buckets` hash buckets, scaled to unit norm. Empty text gives zero.
inline Embedding transcription_descriptor(std::string_view text,
                                          std::size_t buckets = kTranscriptionBuckets) {
  Embedding e(buckets, 0.0);
  if (text.empty()) return e;
  std::string seq;
  seq.reserve(text.size() + 2);
  seq.push_back('\x02');
  seq.append(text);
  seq.push_back('\x03');
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    e[bigram_bucket(static_cast<unsigned char>(seq[i]), static_cast<unsigned char>(seq[i + 1]),
                    buckets)] += 1.0;
  }
  detail::normalize_in_place(e);
  return e;
}

/// Visual part first, then semantic.
inline Embedding concat_embedding(std::span<const double> visual, std::span<const double> semantic,
                                  std::size_t dim_visual, std::size_t dim_semantic) {
  if (visual.size() != dim_visual || semantic.size() != dim_semantic) {
    throw ContractError("concat_embedding: part dimension mismatch");
  }
  Embedding e;
  e.reserve(dim_visual + dim_semantic);
  e.insert(e.end(), visual.begin(), visual.end());
  e.insert(e.end(), semantic.begin(), semantic.end());
  return e;
}

/// max(0, |a-p| - |a-n| + margin) with Euclidean distances.
inline double triplet_loss(std::span<const double> a, std::span<const double> p,
                           std::span<const double> n, double margin) {
  if (a.size() != p.size() || a.size() != n.size()) {
    throw ContractError("triplet_loss: dimension mismatch");
  }
  if (margin < 0.0) throw ContractError("triplet_loss: margin must be >= 0");
  return std::max(0.0, -(embedding_distance(a, n) - embedding_distance(a, p)) + margin);
}

struct LabeledEmbedding {
  Embedding embedding;
  int id = 0;
};

struct Triplet {
  Embedding anchor, positive, negative;
  int anchor_id = 0, positive_id = 0, negative_id = 0;
  std::size_t anchor_index = 0, positive_index = 0, negative_index = 0;
};

/// Batch-hard mining: for every anchor, the farthest same-id sample and the
/// nearest other-id sample (lowest index wins ties). Anchors without a
/// positive or a negative are skipped.
inline std::vector<Triplet> hard_mine(std::span<const LabeledEmbedding> batch) {
  const std::size_t n = batch.size();
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dist[i * n + j] = dist[j * n + i] = embedding_distance(batch[i].embedding, batch[j].embedding);
    }
  }
  std::vector<Triplet> out;
  for (std::size_t a = 0; a < n; ++a) {
    std::optional<std::size_t> pos, neg;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == a) continue;
      const double d = dist[a * n + j];
      if (batch[j].id == batch[a].id) {
        if (!pos || d > dist[a * n + *pos]) pos = j;
      } else if (!neg || d < dist[a * n + *neg]) {
        neg = j;
      }
    }
    if (!pos || !neg) continue;
    out.push_back({batch[a].embedding, batch[*pos].embedding, batch[*neg].embedding, batch[a].id,
                   batch[*pos].id, batch[*neg].id, a, *pos, *neg});
  }
  return out;
}

enum class EmbeddingKind {
  kFromFile,
  kPatch,
  kTranscription,
  kPatchPlusTranscription,
  kSynthetic,
};

/// Computes the embedding attached to each detection before association.
struct EmbeddingProvider {
  EmbeddingKind kind = EmbeddingKind::kPatchPlusTranscription;
  std::size_t dim_visual = kPatchGrid * kPatchGrid;
  std::size_t dim_semantic = kTranscriptionBuckets;
  std::uint64_t seed = 0;

  std::size_t dimension() const {
    switch (kind) {
      case EmbeddingKind::kPatch:
        return dim_visual;
      case EmbeddingKind::kTranscription:
        return dim_semantic;
      default:
        return dim_visual + dim_semantic;
    }
  }

  bool needs_frames() const {
    return kind == EmbeddingKind::kPatch || kind == EmbeddingKind::kPatchPlusTranscription;
  }

  void validate() const {
    if (needs_frames() && dim_visual != static_cast<std::size_t>(kPatchGrid * kPatchGrid)) {
      throw ValidationError("dim_visual must be 256 for patch descriptors");
    }
    if ((kind == EmbeddingKind::kTranscription || kind == EmbeddingKind::kPatchPlusTranscription) &&
        dim_semantic == 0) {
      throw ValidationError("dim_semantic must be positive");
    }
    if (kind == EmbeddingKind::kSynthetic && dimension() == 0) {
      throw ValidationError("synthetic embedding dimension must be positive");
    }
  }

  Embedding embed(const Detection& d, const GrayFrame* frame) const {
    switch (kind) {
      case EmbeddingKind::kFromFile:
        if (!d.embedding) throw ValidationError("detection has no embedding in from-file mode");
        return *d.embedding;
      case EmbeddingKind::kPatch:
        return visual(d, frame);
      case EmbeddingKind::kTranscription:
        return transcription_descriptor(d.transcription.value_or(""), dim_semantic);
      case EmbeddingKind::kPatchPlusTranscription:
        return concat_embedding(visual(d, frame),
                                transcription_descriptor(d.transcription.value_or(""), dim_semantic),
                                dim_visual, dim_semantic);
      case EmbeddingKind::kSynthetic: {
        // Unit vector keyed by (seed, transcription).
        Rng rng = make_stream(seed, "synthetic-embedding",
                              fnv1a64(d.transcription.value_or("")));
        Embedding e(dimension());
        for (double& x : e) x = rng.normal();
        detail::normalize_in_place(e);
        return e;
      }
    }
    throw ContractError("unknown embedding kind");
  }

 private:
  Embedding visual(const Detection& d, const GrayFrame* frame) const {
    if (frame == nullptr || frame->empty()) {
      throw ContractError("patch embedding requires the current frame");
    }
    const PixelRect r = clip(pixel_box(d.quad), frame->width(), frame->height());
    if (r.empty()) return Embedding(dim_visual, 0.0);
    return patch_descriptor(crop(*frame, r));
  }
};

}  // namespace vtt

#endif  // VTT_EMBEDDINGS_HPP_
