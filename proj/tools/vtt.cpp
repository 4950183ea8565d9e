// vtt: command-line front end.
//
//   vtt track --detections F [--frames DIR] [--config C] --out R
//   vtt eval  --gt G --result R --out REPORT [--json J]
//   vtt synth --spec S --out DIR
//   vtt bench --spec S --ablate {scm,embedding,distances} --seeds K [--config C] [--out DIR]
//
// Exit status: 0 success, 1 invalid input, 2 I/O failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vtt/bench.hpp"
#include "vtt/io.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_track(const fs::path& detections, const std::optional<fs::path>& frames,
              const std::optional<fs::path>& config, const fs::path& out) {
  const vtt::TrackerConfig cfg = config ? vtt::io::load_config(*config) : vtt::TrackerConfig{};
  const vtt::io::VideoInput in = vtt::io::load_video(detections, frames);
  if (cfg.needs_frames() && !in.frames_dir) {
    throw vtt::ValidationError("configuration uses pixels (complementation or patch embeddings); "
                               "pass --frames");
  }
  const vtt::TrackingResult r =
      vtt::run_video(in.detections, in.frame_count, in.frame_source(), cfg);
  vtt::io::write_file_atomic(out, vtt::io::format_result(r));
  return 0;
}

int cmd_eval(const fs::path& gt_path, const fs::path& result_path, const fs::path& out,
             const std::optional<fs::path>& json) {
  const vtt::GroundTruth gt = vtt::io::load_ground_truth(gt_path);
  const vtt::TrackingResult r = vtt::io::load_result(result_path);
  const vtt::MetricsReport m = vtt::evaluate(gt, r);
  vtt::io::OutputTransaction tx;
  tx.write(out, vtt::io::format_report_text(m));
  if (json) tx.write(*json, vtt::io::report_json(m).dump(2) + "\n");
  tx.commit();
  std::cout << vtt::io::format_report_text(m);
  return 0;
}

int cmd_synth(const fs::path& spec_path, const fs::path& out) {
  const vtt::ScenarioSpec spec = vtt::io::load_spec(spec_path);
  const vtt::Scenario sc = vtt::generate(spec);
  const bool existed = fs::exists(out);
  try {
    vtt::io::OutputTransaction tx;
    vtt::io::stage_scenario(tx, out, sc);
    tx.commit();
  } catch (...) {
    std::error_code ec;
    if (!existed) fs::remove_all(out, ec);
    throw;
  }
  std::cout << "frames=" << sc.frames.size() << " tracks=" << sc.tracks.size()
            << " gt_boxes=" << sc.gt.box_count() << " dropped=" << sc.dropped << "\n";
  return 0;
}

int cmd_bench(const fs::path& spec_path, const std::string& ablate, int seeds,
              const std::optional<fs::path>& config, const std::optional<fs::path>& out) {
  const vtt::ScenarioSpec spec = vtt::io::load_spec(spec_path);
  const vtt::TrackerConfig base = config ? vtt::io::load_config(*config) : vtt::TrackerConfig{};
  const std::vector<vtt::BenchCell> cells = vtt::ablation_cells(vtt::parse_ablation(ablate), base);
  const std::vector<vtt::BenchRow> rows = vtt::run_ablation(spec, seeds, cells);

  std::string table = "cell seed mota motp idf1 idsw recall ml\n";
  auto line = [](const std::string& label, const std::string& seed, const vtt::MetricsReport& m) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s %s %.4f %.4f %.4f %zu %.4f %zu\n", label.c_str(),
                  seed.c_str(), m.mota, m.motp, m.idf1, m.idsw, m.recall, m.ml);
    return std::string(buf);
  };
  for (const vtt::BenchRow& r : rows) table += line(r.label, std::to_string(r.seed), r.report);
  for (const vtt::BenchCell& c : cells) table += line(c.label, "all", vtt::aggregate(rows, c.label));
  std::cout << table;

  if (out) {
    const bool existed = fs::exists(*out);
    try {
      fs::create_directories(*out);
      vtt::io::OutputTransaction tx;
      for (const vtt::BenchRow& r : rows) {
        const std::string stem = r.label + "_seed" + std::to_string(r.seed);
        tx.write(*out / (stem + ".txt"), vtt::io::format_report_text(r.report));
        tx.write(*out / (stem + ".json"), vtt::io::report_json(r.report).dump(2) + "\n");
      }
      for (const vtt::BenchCell& c : cells) {
        const vtt::MetricsReport a = vtt::aggregate(rows, c.label);
        tx.write(*out / (c.label + "_all.txt"), vtt::io::format_report_text(a));
        tx.write(*out / (c.label + "_all.json"), vtt::io::report_json(a).dump(2) + "\n");
      }
      tx.write(*out / "summary.txt", table);
      tx.commit();
    } catch (...) {
      std::error_code ec;
      if (!existed) fs::remove_all(*out, ec);
      throw;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online multi-text tracking: track, eval, synth, bench"};
  app.require_subcommand(1);

  fs::path detections, out, gt, result, spec;
  std::optional<fs::path> frames, config, json, bench_out;
  std::string ablate;
  int seeds = 5;

  auto* track = app.add_subcommand("track", "Track text instances through a video");
  track->add_option("--detections", detections, "Detection file")->required();
  track->add_option("--frames", frames, "Directory of %06d.pgm frames");
  track->add_option("--config", config, "key=value tracker configuration");
  track->add_option("--out", out, "Result file")->required();

  auto* eval = app.add_subcommand("eval", "Score a tracking result against ground truth");
  eval->add_option("--gt", gt, "Ground-truth file (canonical or ICDAR XML)")->required();
  eval->add_option("--result", result, "Result file written by track")->required();
  eval->add_option("--out", out, "Report (key=value text)")->required();
  eval->add_option("--json", json, "Also write the report as JSON");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic scenario");
  synth->add_option("--spec", spec, "Scenario spec (key=value)")->required();
  synth->add_option("--out", out, "Output directory")->required();

  auto* bench = app.add_subcommand("bench", "Run an ablation on synthetic scenarios");
  bench->add_option("--spec", spec, "Scenario spec (key=value)")->required();
  bench->add_option("--ablate", ablate, "Ablation")
      ->required()
      ->check(CLI::IsMember({"scm", "embedding", "distances"}));
  bench->add_option("--seeds", seeds, "Scenarios per cell")->check(CLI::PositiveNumber);
  bench->add_option("--config", config, "Base tracker configuration");
  bench->add_option("--out", bench_out, "Directory for per-cell reports");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*track) return cmd_track(detections, frames, config, out);
    if (*eval) return cmd_eval(gt, result, out, json);
    if (*synth) return cmd_synth(spec, out);
    if (*bench) return cmd_bench(spec, ablate, seeds, config, bench_out);
  } catch (const vtt::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
