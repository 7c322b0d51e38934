#ifndef HDA_PIPELINE_HPP
#define HDA_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "hda/camera.hpp"
#include "hda/hazard_map.hpp"
#include "hda/reconstruction.hpp"
#include "hda/scene_io.hpp"
#include "hda/site_assess.hpp"
#include "hda/synth.hpp"

namespace hda {

struct MaskConfig {
  int min_leaf = 8;
  double margin_px = 0.0;
  double score_threshold = 0.5;
};

struct ReconstructionConfig {
  double max_reproj_px = 2.0;
  bool refine = false;
};

struct CorrespondenceConfig {
  int count = 800;
  double noise_px = 0.5;
};

// Input paths are resolved as given; detections/correspondences may be empty,
// in which case `assess` derives them from the scene manifest.
struct PathsConfig {
  std::string detections = "out/detections.json";
  std::string correspondences = "out/correspondences.csv";
  std::string scene_manifest = "out/scene.json";
  std::string output_dir = "out";
};

struct PipelineConfig {
  CameraIntrinsics camera;
  double cant_deg = 45.0;  // camera cant from nadir
  MaskConfig mask;
  AssessConfig assess;
  ReconstructionConfig reconstruction;
  SceneParams synth;
  DetectorSimParams detector;
  CorrespondenceConfig correspondences;
  PathsConfig paths;
  double vfde_side_m = 10.0;
};

PipelineConfig default_config();

/// Strict fixed-schema JSON config; unknown keys raise Error(parse_error).
PipelineConfig load_config(const std::string& path);

/// Resolved configuration, pretty-printed (the --print-config output).
std::string config_to_json(const PipelineConfig& cfg);

struct StageTiming {
  std::string stage;
  double ms = 0.0;
};

struct SynthArtifacts {
  std::string manifest_path;
  std::string dem_path;
  std::string mask_path;
  std::string detections_path;
  std::string correspondences_path;
};

/// Generates a scene and writes all five artifacts into out_dir. Rerunning
/// with the same config and seed is byte-identical.
SynthArtifacts cmd_synth(const PipelineConfig& cfg, std::uint64_t seed,
                         const std::string& out_dir);

struct AssessResult {
  std::vector<SiteAssessment> ranked;
  std::vector<StageTiming> timings;
  CloudBuildStats cloud_stats;
  int required_px = 0;
  bool no_candidates = false;
  std::string report_path;
  std::string overlay_path;
  std::string timings_path;
  std::string cloud_path;  // empty when no candidates survived
};

/// mask -> quadtree -> candidates -> reconstruction -> assessment -> ranking.
/// Writes the ranked-site report (JSON array), the overlay PPM, and the
/// per-stage timing log into out_dir. An empty candidate list is reported in
/// the result (and as an empty report), not thrown.
AssessResult cmd_assess(const PipelineConfig& cfg, const std::string& out_dir);

struct StageBenchStats {
  std::string stage;
  double median_ms = 0.0;
  double p95_ms = 0.0;
};

/// Times mask build + quadtree + candidate extraction at the configured
/// camera resolution over `repeats` runs against a seeded 250-detection set.
std::vector<StageBenchStats> cmd_bench(const PipelineConfig& cfg, int repeats,
                                       std::uint64_t seed);

/// Ranked-site report serialization (shared with tests).
std::string report_to_json(const std::vector<SiteAssessment>& ranked);

}  // namespace hda

#endif
