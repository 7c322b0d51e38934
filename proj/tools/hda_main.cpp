#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "hda/pipeline.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool print_config = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Pipeline config JSON");
  cmd->add_option("--seed", args.seed, "Random seed");
  cmd->add_option("--out", args.out_dir, "Output directory (overrides paths.output_dir)");
  cmd->add_flag("--print-config", args.print_config,
                "Print the resolved configuration and exit");
}

hda::PipelineConfig resolve_config(const CommonArgs& args) {
  hda::PipelineConfig cfg = args.config_path.empty()
                                ? hda::default_config()
                                : hda::load_config(args.config_path);
  if (!args.out_dir.empty()) cfg.paths.output_dir = args.out_dir;
  return cfg;
}

void print_sites(const hda::AssessResult& result) {
  std::cout << "candidates: " << result.ranked.size()
            << "  required side: " << result.required_px << " px\n";
  const std::size_t shown = std::min<std::size_t>(result.ranked.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) {
    const hda::SiteAssessment& s = result.ranked[i];
    std::cout << "  #" << s.rank << " region(" << s.region.x << "," << s.region.y
              << " side " << s.region.side << ")";
    if (s.status == hda::AssessStatus::assessed) {
      std::cout << " area " << s.area_m2 << " m^2, slope " << s.slope_deg
                << " deg, roughness " << s.roughness_m << " m, cost " << s.cost
                << (s.safe ? "" : " [unsafe]");
    } else {
      std::cout << " [" << hda::assess_status_name(s.status) << "]";
    }
    std::cout << "\n";
  }
  for (const hda::StageTiming& t : result.timings)
    std::cout << "  " << t.stage << ": " << t.ms << " ms\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Descent-imagery landing site assessment pipeline"};
  app.require_subcommand(1);

  CommonArgs synth_args, assess_args, bench_args;
  int repeats = 20;
  std::string detections_override;
  int min_leaf = -1;
  double margin = -1.0, score_threshold = -1.0;

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic scene");
  add_common(synth, synth_args);

  CLI::App* assess = app.add_subcommand("assess", "Rank safe landing sites");
  add_common(assess, assess_args);
  assess->add_option("--detections", detections_override, "Detections JSON path");
  assess->add_option("--min-leaf", min_leaf, "Quadtree minimum leaf side, pixels");
  assess->add_option("--margin", margin, "Hazard bbox dilation, pixels");
  assess->add_option("--score-threshold", score_threshold,
                     "Minimum detection score");

  CLI::App* bench = app.add_subcommand("bench", "Time the mask + quadtree stages");
  add_common(bench, bench_args);
  bench->add_option("--repeats", repeats, "Benchmark repetitions");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      const hda::PipelineConfig cfg = resolve_config(synth_args);
      if (synth_args.print_config) {
        std::cout << hda::config_to_json(cfg);
        return 0;
      }
      const hda::SynthArtifacts art =
          hda::cmd_synth(cfg, synth_args.seed, cfg.paths.output_dir);
      std::cout << "wrote " << art.manifest_path << "\n"
                << "wrote " << art.dem_path << "\n"
                << "wrote " << art.mask_path << "\n"
                << "wrote " << art.detections_path << "\n"
                << "wrote " << art.correspondences_path << "\n";
      return 0;
    }
    if (assess->parsed()) {
      hda::PipelineConfig cfg = resolve_config(assess_args);
      if (!detections_override.empty()) cfg.paths.detections = detections_override;
      if (min_leaf > 0) cfg.mask.min_leaf = min_leaf;
      if (margin >= 0.0) cfg.mask.margin_px = margin;
      if (score_threshold >= 0.0) cfg.mask.score_threshold = score_threshold;
      if (assess_args.print_config) {
        std::cout << hda::config_to_json(cfg);
        return 0;
      }
      const hda::AssessResult result = hda::cmd_assess(cfg, cfg.paths.output_dir);
      if (result.no_candidates) {
        std::cerr << "no candidate regions at required side " << result.required_px
                  << " px\n";
        return hda::errc_exit_code(hda::Errc::no_candidates);
      }
      print_sites(result);
      std::cout << "report: " << result.report_path << "\n";
      return 0;
    }
    if (bench->parsed()) {
      const hda::PipelineConfig cfg = resolve_config(bench_args);
      if (bench_args.print_config) {
        std::cout << hda::config_to_json(cfg);
        return 0;
      }
      const auto stats = hda::cmd_bench(cfg, repeats, bench_args.seed);
      std::cout << "resolution " << cfg.camera.width << "x" << cfg.camera.height
                << ", repeats " << repeats << "\n";
      for (const hda::StageBenchStats& s : stats)
        std::cout << "  " << s.stage << ": median " << s.median_ms << " ms, p95 "
                  << s.p95_ms << " ms\n";
      return 0;
    }
  } catch (const hda::Error& e) {
    std::cerr << hda::errc_name(e.code()) << ": " << e.what() << "\n";
    return hda::errc_exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
