#include "hda/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "hda/rng.hpp"
#include "json.hpp"

namespace hda {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return it.key() == k;
        }) == allowed.end())
      raise(Errc::parse_error, "config: unknown key \"" + it.key() + "\" in " + where);
  }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

void parse_camera(const json& j, PipelineConfig& cfg) {
  check_keys(j, {"fx", "fy", "cx", "cy", "width", "height", "fov_deg", "cant_deg"},
             "camera");
  read_field(j, "fx", cfg.camera.fx);
  read_field(j, "fy", cfg.camera.fy);
  read_field(j, "cx", cfg.camera.cx);
  read_field(j, "cy", cfg.camera.cy);
  read_field(j, "width", cfg.camera.width);
  read_field(j, "height", cfg.camera.height);
  read_field(j, "fov_deg", cfg.camera.fov_deg);
  read_field(j, "cant_deg", cfg.cant_deg);
}

void parse_assess(const json& j, AssessConfig& cfg) {
  check_keys(j,
             {"gravity_axis", "slope_max_deg", "roughness_max_m", "area_min_m2",
              "n_min", "roughness_aggregate"},
             "assess");
  if (j.contains("gravity_axis")) {
    const auto& g = j.at("gravity_axis");
    if (!g.is_array() || g.size() != 3)
      raise(Errc::parse_error, "config: assess.gravity_axis must be [x, y, z]");
    cfg.gravity_axis = {g[0].get<double>(), g[1].get<double>(), g[2].get<double>()};
  }
  read_field(j, "slope_max_deg", cfg.slope_max_deg);
  read_field(j, "roughness_max_m", cfg.roughness_max_m);
  read_field(j, "area_min_m2", cfg.area_min_m2);
  read_field(j, "n_min", cfg.n_min);
  if (j.contains("roughness_aggregate")) {
    const std::string agg = j.at("roughness_aggregate").get<std::string>();
    if (agg == "max") cfg.roughness_aggregate = RoughnessAggregate::max;
    else if (agg == "rms") cfg.roughness_aggregate = RoughnessAggregate::rms;
    else raise(Errc::parse_error, "config: roughness_aggregate must be max or rms");
  }
}

void parse_synth(const json& j, PipelineConfig& cfg) {
  check_keys(j, {"dem", "hazards", "descent", "detector", "correspondences"}, "synth");
  if (j.contains("dem")) {
    const json& d = j.at("dem");
    check_keys(d, {"ncols", "nrows", "cellsize", "amplitude_m", "smoothness_m"},
               "synth.dem");
    read_field(d, "ncols", cfg.synth.dem_cols);
    read_field(d, "nrows", cfg.synth.dem_rows);
    read_field(d, "cellsize", cfg.synth.cellsize);
    read_field(d, "amplitude_m", cfg.synth.amplitude_m);
    read_field(d, "smoothness_m", cfg.synth.smoothness_m);
  }
  if (j.contains("hazards")) {
    const json& h = j.at("hazards");
    check_keys(h,
               {"rock_density", "crater_density", "q_exponent", "d_min", "d_max",
                "rock_height_ratio", "crater_depth_ratio", "crater_rim_ratio"},
               "synth.hazards");
    read_field(h, "rock_density", cfg.synth.hazards.rock_density);
    read_field(h, "crater_density", cfg.synth.hazards.crater_density);
    read_field(h, "q_exponent", cfg.synth.hazards.q_exponent);
    read_field(h, "d_min", cfg.synth.hazards.d_min);
    read_field(h, "d_max", cfg.synth.hazards.d_max);
    read_field(h, "rock_height_ratio", cfg.synth.hazards.rock_height_ratio);
    read_field(h, "crater_depth_ratio", cfg.synth.hazards.crater_depth_ratio);
    read_field(h, "crater_rim_ratio", cfg.synth.hazards.crater_rim_ratio);
  }
  if (j.contains("descent")) {
    const json& d = j.at("descent");
    check_keys(d,
               {"start_altitude", "start_downrange", "n_frames",
                "acquisition_window_s", "approach_speed_mps"},
               "synth.descent");
    read_field(d, "start_altitude", cfg.synth.descent.start_altitude);
    read_field(d, "start_downrange", cfg.synth.descent.start_downrange);
    read_field(d, "n_frames", cfg.synth.descent.n_frames);
    read_field(d, "acquisition_window_s", cfg.synth.descent.acquisition_window_s);
    read_field(d, "approach_speed_mps", cfg.synth.descent.approach_speed_mps);
  }
  if (j.contains("detector")) {
    const json& d = j.at("detector");
    check_keys(d, {"miss_rate", "jitter_px"}, "synth.detector");
    read_field(d, "miss_rate", cfg.detector.miss_rate);
    read_field(d, "jitter_px", cfg.detector.jitter_px);
  }
  if (j.contains("correspondences")) {
    const json& c = j.at("correspondences");
    check_keys(c, {"count", "noise_px"}, "synth.correspondences");
    read_field(c, "count", cfg.correspondences.count);
    read_field(c, "noise_px", cfg.correspondences.noise_px);
  }
}

// Times each stage and attributes upstream failures to it.
class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& log) : log_(log) {}

  template <typename F>
  auto run(const std::string& stage, F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        record(stage, t0);
      } else {
        auto result = fn();
        record(stage, t0);
        return result;
      }
    } catch (const Error& e) {
      raise(e.code(), "stage " + stage + ": " + e.what());
    }
  }

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point t0) {
    const auto t1 = std::chrono::steady_clock::now();
    log_.push_back({stage, std::chrono::duration<double, std::milli>(t1 - t0).count()});
  }

  std::vector<StageTiming>& log_;
};

void draw_rect(RgbImage& img, double x0, double y0, double x1, double y1, int thickness,
               std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const int ix0 = static_cast<int>(std::floor(x0));
  const int iy0 = static_cast<int>(std::floor(y0));
  const int ix1 = static_cast<int>(std::ceil(x1)) - 1;
  const int iy1 = static_cast<int>(std::ceil(y1)) - 1;
  for (int t = 0; t < thickness; ++t) {
    for (int x = ix0; x <= ix1; ++x) {
      img.set(x, iy0 + t, r, g, b);
      img.set(x, iy1 - t, r, g, b);
    }
    for (int y = iy0; y <= iy1; ++y) {
      img.set(ix0 + t, y, r, g, b);
      img.set(ix1 - t, y, r, g, b);
    }
  }
}

RgbImage render_overlay(const HazardMask& mask, const std::vector<Detection>& detections,
                        const std::vector<SiteAssessment>& ranked) {
  RgbImage img = RgbImage::filled(mask.width, mask.height, 26, 26, 30);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(x, y)) img.set(x, y, 110, 110, 116);

  for (const Detection& d : detections) {
    if (d.cls == HazardClass::crater)
      draw_rect(img, d.x_min, d.y_min, d.x_max, d.y_max, 2, 235, 205, 60);
    else
      draw_rect(img, d.x_min, d.y_min, d.x_max, d.y_max, 2, 225, 60, 50);
  }
  for (const SiteAssessment& s : ranked)
    draw_rect(img, s.region.x, s.region.y, s.region.x + s.region.side,
              s.region.y + s.region.side, 2, 70, 200, 90);
  if (!ranked.empty() && ranked.front().status == AssessStatus::assessed) {
    const SiteAssessment& top = ranked.front();
    draw_rect(img, top.region.x, top.region.y, top.region.x + top.region.side,
              top.region.y + top.region.side, 4, 130, 255, 140);
  }
  return img;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) raise(Errc::io_error, "cannot write " + path);
  out << text;
  if (!out) raise(Errc::io_error, "short write: " + path);
}

std::string timings_to_json(const std::vector<StageTiming>& timings) {
  json arr = json::array();
  for (const StageTiming& t : timings) arr.push_back({{"stage", t.stage}, {"ms", t.ms}});
  return arr.dump(2) + "\n";
}

double percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  if (v.empty()) return 0.0;
  const double idx = p * (v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(idx);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (v[hi] - v[lo]) * (idx - lo);
}

}  // namespace

PipelineConfig default_config() { return PipelineConfig{}; }

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::io_error, "cannot read config: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    raise(Errc::parse_error, path + ": " + e.what());
  }

  PipelineConfig cfg;
  try {
    check_keys(j,
               {"camera", "mask", "assess", "reconstruction", "synth", "paths",
                "vfde_side_m"},
               "top level");
    if (j.contains("camera")) parse_camera(j.at("camera"), cfg);
    if (j.contains("mask")) {
      const json& m = j.at("mask");
      check_keys(m, {"min_leaf", "margin_px", "score_threshold"}, "mask");
      read_field(m, "min_leaf", cfg.mask.min_leaf);
      read_field(m, "margin_px", cfg.mask.margin_px);
      read_field(m, "score_threshold", cfg.mask.score_threshold);
    }
    if (j.contains("assess")) parse_assess(j.at("assess"), cfg.assess);
    if (j.contains("reconstruction")) {
      const json& r = j.at("reconstruction");
      check_keys(r, {"max_reproj_px", "refine"}, "reconstruction");
      read_field(r, "max_reproj_px", cfg.reconstruction.max_reproj_px);
      read_field(r, "refine", cfg.reconstruction.refine);
    }
    if (j.contains("synth")) parse_synth(j.at("synth"), cfg);
    if (j.contains("paths")) {
      const json& p = j.at("paths");
      check_keys(p, {"detections", "correspondences", "scene_manifest", "output_dir"},
                 "paths");
      read_field(p, "detections", cfg.paths.detections);
      read_field(p, "correspondences", cfg.paths.correspondences);
      read_field(p, "scene_manifest", cfg.paths.scene_manifest);
      read_field(p, "output_dir", cfg.paths.output_dir);
    }
    read_field(j, "vfde_side_m", cfg.vfde_side_m);
  } catch (const json::exception& e) {
    raise(Errc::parse_error, path + ": " + e.what());
  }

  cfg.camera.validate();
  cfg.assess.validate();
  if (!(cfg.vfde_side_m > 0.0))
    raise(Errc::bounds_error, "config: vfde_side_m must be positive");
  return cfg;
}

std::string config_to_json(const PipelineConfig& cfg) {
  json j;
  j["camera"] = {{"fx", cfg.camera.fx},   {"fy", cfg.camera.fy},
                 {"cx", cfg.camera.cx},   {"cy", cfg.camera.cy},
                 {"width", cfg.camera.width}, {"height", cfg.camera.height},
                 {"fov_deg", cfg.camera.fov_deg}, {"cant_deg", cfg.cant_deg}};
  j["mask"] = {{"min_leaf", cfg.mask.min_leaf},
               {"margin_px", cfg.mask.margin_px},
               {"score_threshold", cfg.mask.score_threshold}};
  j["assess"] = {
      {"gravity_axis",
       {cfg.assess.gravity_axis.x(), cfg.assess.gravity_axis.y(),
        cfg.assess.gravity_axis.z()}},
      {"slope_max_deg", cfg.assess.slope_max_deg},
      {"roughness_max_m", cfg.assess.roughness_max_m},
      {"area_min_m2", cfg.assess.area_min_m2},
      {"n_min", cfg.assess.n_min},
      {"roughness_aggregate",
       cfg.assess.roughness_aggregate == RoughnessAggregate::max ? "max" : "rms"}};
  j["reconstruction"] = {{"max_reproj_px", cfg.reconstruction.max_reproj_px},
                         {"refine", cfg.reconstruction.refine}};
  j["synth"] = {
      {"dem",
       {{"ncols", cfg.synth.dem_cols},
        {"nrows", cfg.synth.dem_rows},
        {"cellsize", cfg.synth.cellsize},
        {"amplitude_m", cfg.synth.amplitude_m},
        {"smoothness_m", cfg.synth.smoothness_m}}},
      {"hazards",
       {{"rock_density", cfg.synth.hazards.rock_density},
        {"crater_density", cfg.synth.hazards.crater_density},
        {"q_exponent", cfg.synth.hazards.q_exponent},
        {"d_min", cfg.synth.hazards.d_min},
        {"d_max", cfg.synth.hazards.d_max},
        {"rock_height_ratio", cfg.synth.hazards.rock_height_ratio},
        {"crater_depth_ratio", cfg.synth.hazards.crater_depth_ratio},
        {"crater_rim_ratio", cfg.synth.hazards.crater_rim_ratio}}},
      {"descent",
       {{"start_altitude", cfg.synth.descent.start_altitude},
        {"start_downrange", cfg.synth.descent.start_downrange},
        {"n_frames", cfg.synth.descent.n_frames},
        {"acquisition_window_s", cfg.synth.descent.acquisition_window_s},
        {"approach_speed_mps", cfg.synth.descent.approach_speed_mps}}},
      {"detector",
       {{"miss_rate", cfg.detector.miss_rate}, {"jitter_px", cfg.detector.jitter_px}}},
      {"correspondences",
       {{"count", cfg.correspondences.count},
        {"noise_px", cfg.correspondences.noise_px}}}};
  j["paths"] = {{"detections", cfg.paths.detections},
                {"correspondences", cfg.paths.correspondences},
                {"scene_manifest", cfg.paths.scene_manifest},
                {"output_dir", cfg.paths.output_dir}};
  j["vfde_side_m"] = cfg.vfde_side_m;
  return j.dump(2) + "\n";
}

std::string report_to_json(const std::vector<SiteAssessment>& ranked) {
  json arr = json::array();
  for (const SiteAssessment& s : ranked) {
    json site;
    site["rank"] = s.rank;
    site["region"] = {{"x", s.region.x}, {"y", s.region.y}, {"side", s.region.side}};
    site["area_m2"] = s.area_m2;
    if (s.status == AssessStatus::assessed) {
      site["slope_deg"] = s.slope_deg;
      site["roughness_m"] = s.roughness_m;
      site["cost"] = s.cost;
    } else {
      site["slope_deg"] = nullptr;
      site["roughness_m"] = nullptr;
      site["cost"] = nullptr;
    }
    site["safe"] = s.safe;
    site["status"] = assess_status_name(s.status);
    arr.push_back(site);
  }
  return arr.dump(2) + "\n";
}

SynthArtifacts cmd_synth(const PipelineConfig& cfg, std::uint64_t seed,
                         const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) raise(Errc::io_error, "cannot create output directory: " + out_dir);

  SceneParams params = cfg.synth;
  params.cant_deg = cfg.cant_deg;
  const Scene scene = make_scene(params, seed);
  const Pose& reference = scene.poses.back();

  SynthArtifacts art;
  art.dem_path = (fs::path(out_dir) / "dem.asc").string();
  art.manifest_path = (fs::path(out_dir) / "scene.json").string();
  art.mask_path = (fs::path(out_dir) / "gt_mask.pgm").string();
  art.detections_path = (fs::path(out_dir) / "detections.json").string();
  art.correspondences_path = (fs::path(out_dir) / "correspondences.csv").string();

  write_dem(art.dem_path, scene.dem);
  write_scene_manifest(art.manifest_path,
                       {"dem.asc", scene.hazards, scene.poses, seed});
  write_pgm(art.mask_path, ground_truth_mask(scene, reference, cfg.camera));
  write_detections(art.detections_path,
                   simulate_detector(scene.hazards, reference, cfg.camera,
                                     cfg.detector, seed));
  write_correspondences(
      art.correspondences_path,
      synth_correspondences(scene, scene.poses.front(), reference, cfg.camera,
                            cfg.correspondences.count, cfg.correspondences.noise_px,
                            seed)
          .matches);
  return art;
}

AssessResult cmd_assess(const PipelineConfig& cfg, const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) raise(Errc::io_error, "cannot create output directory: " + out_dir);

  AssessResult result;
  StageClock clock(result.timings);
  const CameraIntrinsics& intr = cfg.camera;
  intr.validate();

  const SceneManifest manifest = read_scene_manifest(cfg.paths.scene_manifest);
  if (manifest.poses.size() < 2)
    raise(Errc::parse_error, "scene manifest must carry at least two poses");
  const Pose& pose_a = manifest.poses.front();
  const Pose& pose_b = manifest.poses.back();  // reference: later, lower view

  // Scene reconstruction is only needed when detections or correspondences
  // are not supplied as files.
  const bool have_detections_file =
      !cfg.paths.detections.empty() && fs::exists(cfg.paths.detections);
  const bool have_matches_file =
      !cfg.paths.correspondences.empty() && fs::exists(cfg.paths.correspondences);
  Scene scene;
  if (!have_detections_file || !have_matches_file) {
    scene.dem = read_dem(resolve_relative(cfg.paths.scene_manifest, manifest.dem_path));
    scene.hazards = manifest.hazards;
    scene.poses = manifest.poses;
    scene.seed = manifest.seed;
  }

  const std::vector<Detection> detections = clock.run("load_detections", [&] {
    return have_detections_file
               ? load_detections(cfg.paths.detections, intr.width, intr.height)
               : simulate_detector(manifest.hazards, pose_b, intr, cfg.detector,
                                   manifest.seed);
  });

  const HazardMask mask = clock.run("build_mask", [&] {
    return build_mask(detections, intr.width, intr.height, cfg.mask.margin_px,
                      cfg.mask.score_threshold);
  });

  const std::vector<QuadLeaf> leaves = clock.run("quadtree", [&] {
    return quadtree_decompose(mask, cfg.mask.min_leaf);
  });

  const double altitude = pose_b.center().z();
  const auto scale_at = [&](double, double v) {
    // Ground scale varies along the canted (vertical image) axis.
    GroundResolutionQuery q;
    q.pix_location = std::clamp(v, 0.0, double(intr.height) - 1e-9);
    q.altitude = altitude;
    q.cam_angle_deg = cfg.cant_deg;
    q.fov_deg = intr.fov_deg;
    q.num_pixels = intr.height;
    return ground_resolution(q);
  };
  result.required_px = required_pixels(
      cfg.vfde_side_m, scale_at(intr.width / 2.0, intr.height / 2.0));

  const std::vector<CandidateRegion> candidates = clock.run("extract_candidates", [&] {
    return extract_candidates(leaves, result.required_px, scale_at);
  });

  result.report_path = (fs::path(out_dir) / "report.json").string();
  result.overlay_path = (fs::path(out_dir) / "overlay.ppm").string();
  result.timings_path = (fs::path(out_dir) / "timings.json").string();

  if (candidates.empty()) {
    result.no_candidates = true;
    write_text(result.report_path, report_to_json({}));
    write_ppm(result.overlay_path, render_overlay(mask, detections, {}));
    write_text(result.timings_path, timings_to_json(result.timings));
    return result;
  }

  const std::vector<Correspondence> matches = clock.run("load_correspondences", [&] {
    return have_matches_file
               ? read_correspondences(cfg.paths.correspondences)
               : synth_correspondences(scene, pose_a, pose_b, intr,
                                       cfg.correspondences.count,
                                       cfg.correspondences.noise_px, manifest.seed)
                     .matches;
  });

  const ProjectionMatrix proj_a = projection_matrix(intr, pose_a);
  const ProjectionMatrix proj_b = projection_matrix(intr, pose_b);

  const PointCloud cloud = clock.run("triangulate", [&] {
    TriangulationOptions opts;
    opts.max_reproj_px = cfg.reconstruction.max_reproj_px;
    opts.refine = cfg.reconstruction.refine;
    return build_point_cloud(matches, proj_a, proj_b, opts, &result.cloud_stats);
  });

  std::vector<SiteAssessment> assessments = clock.run("assess", [&] {
    std::vector<SiteAssessment> out;
    out.reserve(candidates.size());
    for (const CandidateRegion& region : candidates)
      out.push_back(assess_site(region, segment_roi(cloud, region, proj_b),
                                cfg.assess));
    return out;
  });

  result.ranked = clock.run("rank", [&] { return rank_sites(std::move(assessments)); });

  result.cloud_path = (fs::path(out_dir) / "cloud.ply").string();
  clock.run("write_outputs", [&] {
    write_text(result.report_path, report_to_json(result.ranked));
    write_ppm(result.overlay_path, render_overlay(mask, detections, result.ranked));
    write_ply(result.cloud_path, cloud);
  });
  write_text(result.timings_path, timings_to_json(result.timings));
  return result;
}

std::vector<StageBenchStats> cmd_bench(const PipelineConfig& cfg, int repeats,
                                       std::uint64_t seed) {
  if (repeats < 1) raise(Errc::bounds_error, "bench: repeats must be >= 1");
  const CameraIntrinsics& intr = cfg.camera;
  intr.validate();

  // Seeded stand-in detection set, 250 boxes across the frame.
  Rng rng = derived_rng(seed, 7);
  std::vector<Detection> detections;
  for (int i = 0; i < 250; ++i) {
    Detection d;
    d.cls = i % 3 == 2 ? HazardClass::crater : HazardClass::rock;
    const double w = rng.uniform(8.0, 90.0);
    const double h = rng.uniform(8.0, 90.0);
    d.x_min = rng.uniform(0.0, intr.width - w - 1.0);
    d.y_min = rng.uniform(0.0, intr.height - h - 1.0);
    d.x_max = d.x_min + w;
    d.y_max = d.y_min + h;
    d.score = rng.uniform(0.5, 1.0);
    detections.push_back(d);
  }

  std::vector<double> mask_ms, tree_ms, extract_ms, total_ms;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const HazardMask mask = build_mask(detections, intr.width, intr.height,
                                       cfg.mask.margin_px, cfg.mask.score_threshold);
    const auto t1 = std::chrono::steady_clock::now();
    const std::vector<QuadLeaf> leaves = quadtree_decompose(mask, cfg.mask.min_leaf);
    const auto t2 = std::chrono::steady_clock::now();
    const std::vector<CandidateRegion> candidates =
        extract_candidates(leaves, 128, [](double, double) { return 0.1; });
    const auto t3 = std::chrono::steady_clock::now();
    (void)candidates;

    const auto ms = [](auto a, auto b) {
      return std::chrono::duration<double, std::milli>(b - a).count();
    };
    mask_ms.push_back(ms(t0, t1));
    tree_ms.push_back(ms(t1, t2));
    extract_ms.push_back(ms(t2, t3));
    total_ms.push_back(ms(t0, t3));
  }

  return {{"build_mask", percentile(mask_ms, 0.5), percentile(mask_ms, 0.95)},
          {"quadtree", percentile(tree_ms, 0.5), percentile(tree_ms, 0.95)},
          {"extract_candidates", percentile(extract_ms, 0.5),
           percentile(extract_ms, 0.95)},
          {"mask_plus_quadtree", percentile(total_ms, 0.5),
           percentile(total_ms, 0.95)}};
}

}  // namespace hda
