#ifndef VTT_BENCH_HPP_
#define VTT_BENCH_HPP_

// Ablation harness over synthetic scenarios. Each ablation is a list of
// configuration cells; every cell is run on the same k scenarios (spec seed,
// spec seed + 1, ...) and evaluated against the scenario's ground truth.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "vtt/errors.hpp"
#include "vtt/metrics.hpp"
#include "vtt/synth.hpp"
#include "vtt/tracker.hpp"

namespace vtt {

enum class Ablation { kScm, kEmbedding, kDistances };

inline Ablation parse_ablation(std::string_view s) {
  if (s == "scm") return Ablation::kScm;
  if (s == "embedding") return Ablation::kEmbedding;
  if (s == "distances") return Ablation::kDistances;
  throw ValidationError("unknown ablation '" + std::string(s) + "' (scm, embedding, distances)");
}

struct BenchCell {
  std::string label;
  TrackerConfig config;
};

/// Cells of an ablation, derived from `base`.
inline std::vector<BenchCell> ablation_cells(Ablation a, const TrackerConfig& base = {}) {
  std::vector<BenchCell> cells;
  switch (a) {
    case Ablation::kScm: {
      TrackerConfig off = base;
      off.complement_enabled = false;
      TrackerConfig on = base;
      on.complement_enabled = true;
      cells = {{"scm_off", off}, {"scm_on", on}};
      break;
    }
    case Ablation::kEmbedding: {
      TrackerConfig geo = base;
      geo.embedding_enabled = false;
      auto with = [&](EmbeddingKind k) {
        TrackerConfig c = base;
        c.embedding_enabled = true;
        c.provider.kind = k;
        return c;
      };
      cells = {{"geometry", geo},
               {"ve", with(EmbeddingKind::kPatch)},
               {"se", with(EmbeddingKind::kTranscription)},
               {"ve_se", with(EmbeddingKind::kPatchPlusTranscription)}};
      break;
    }
    case Ablation::kDistances: {
      auto with = [&](double beta, double gamma) {
        TrackerConfig c = base;
        c.weights.beta = beta;
        c.weights.gamma = gamma;
        return c;
      };
      const double b = base.weights.beta, g = base.weights.gamma;
      cells = {{"de", with(0.0, 0.0)},
               {"de_dm", with(0.0, g)},
               {"de_dp", with(b, 0.0)},
               {"de_dp_dm", with(b, g)}};
      break;
    }
  }
  return cells;
}

struct BenchRow {
  std::string label;
  std::uint64_t seed = 0;
  MetricsReport report;
};

inline MetricsReport run_cell(const Scenario& sc, const TrackerConfig& cfg) {
  const TrackingResult r =
      run_video(sc.detections, static_cast<int>(sc.frames.size()),
                [&sc](int t) { return sc.frames.at(static_cast<std::size_t>(t)); }, cfg);
  return evaluate(sc.gt, r);
}

/// Rows ordered by seed, then cell.
inline std::vector<BenchRow> run_ablation(const ScenarioSpec& spec, int seeds,
                                          const std::vector<BenchCell>& cells) {
  if (seeds < 1) throw ValidationError("seeds must be >= 1");
  std::vector<BenchRow> rows;
  for (int k = 0; k < seeds; ++k) {
    ScenarioSpec s = spec;
    s.seed = spec.seed + static_cast<std::uint64_t>(k);
    const Scenario sc = generate(s);
    for (const BenchCell& c : cells) rows.push_back({c.label, s.seed, run_cell(sc, c.config)});
  }
  return rows;
}

/// Pools box and identity counts over rows with the given label and
/// recomputes the ratio metrics from the pooled counts.
inline MetricsReport aggregate(const std::vector<BenchRow>& rows, std::string_view label) {
  MetricsReport a;
  std::size_t matches = 0;
  double motp_sum = 0.0;
  for (const BenchRow& r : rows) {
    if (r.label != label) continue;
    const MetricsReport& m = r.report;
    a.fp += m.fp;
    a.fn += m.fn;
    a.idsw += m.idsw;
    a.mm += m.mm;
    a.pm += m.pm;
    a.ml += m.ml;
    a.gt_trajectories += m.gt_trajectories;
    a.gt_boxes += m.gt_boxes;
    a.pred_boxes += m.pred_boxes;
    a.idtp += m.idtp;
    a.idfp += m.idfp;
    a.idfn += m.idfn;
    const std::size_t mt = m.gt_boxes - m.fn;
    matches += mt;
    motp_sum += m.motp * static_cast<double>(mt);
  }
  if (a.gt_boxes > 0) {
    a.mota = 1.0 - static_cast<double>(a.fp + a.fn + a.idsw) / static_cast<double>(a.gt_boxes);
  }
  a.motp = matches == 0 ? 0.0 : motp_sum / static_cast<double>(matches);
  const std::size_t id_den = 2 * a.idtp + a.idfp + a.idfn;
  a.idf1 = id_den == 0 ? 0.0 : 2.0 * static_cast<double>(a.idtp) / static_cast<double>(id_den);
  a.precision = a.pred_boxes == 0
                    ? 0.0
                    : static_cast<double>(a.pred_boxes - a.fp) / static_cast<double>(a.pred_boxes);
  a.recall = a.gt_boxes == 0
                 ? 0.0
                 : static_cast<double>(a.gt_boxes - a.fn) / static_cast<double>(a.gt_boxes);
  a.fmeasure = a.precision + a.recall == 0.0
                   ? 0.0
                   : 2.0 * a.precision * a.recall / (a.precision + a.recall);
  return a;
}

}  // namespace vtt

#endif  // VTT_BENCH_HPP_
