#ifndef HDA_SYNTH_HPP
#define HDA_SYNTH_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hda/camera.hpp"
#include "hda/hazard_map.hpp"
#include "hda/reconstruction.hpp"

namespace hda {

// Gridded heightfield. Cell (row, col) sits at
//   x = origin.x + col * cellsize,  y = origin.y + row * cellsize;
// row 0 is written first in the ASCII grid format.
struct Dem {
  int ncols = 0;
  int nrows = 0;
  double cellsize = 1.0;               // meters per cell
  Eigen::Vector2d origin{0.0, 0.0};    // ILS (x, y) of cell (0, 0)
  std::vector<double> heights;         // row-major, nrows * ncols

  double at(int row, int col) const {
    return heights[static_cast<std::size_t>(row) * ncols + col];
  }
  double& at(int row, int col) {
    return heights[static_cast<std::size_t>(row) * ncols + col];
  }
  double extent_x() const { return (ncols - 1) * cellsize; }
  double extent_y() const { return (nrows - 1) * cellsize; }
  bool contains(double x, double y) const;

  /// Bilinear height at ILS (x, y), clamped to the grid border.
  double sample(double x, double y) const;
};

struct RockSpec {
  Eigen::Vector2d center{0.0, 0.0};  // ILS (x, y), meters
  double diameter = 1.0;
  double height = 0.25;
};

struct CraterSpec {
  Eigen::Vector2d center{0.0, 0.0};
  double diameter = 1.0;
  double depth = 0.2;
};

struct HazardSet {
  std::vector<RockSpec> rocks;
  std::vector<CraterSpec> craters;
};

struct Scene {
  Dem dem;  // hazard-stamped terrain
  HazardSet hazards;
  std::vector<Pose> poses;  // descent order, first = highest
  std::uint64_t seed = 0;
};

struct DescentParams {
  double start_altitude = 400.0;    // meters
  double start_downrange = 400.0;   // meters
  int n_frames = 2;
  double acquisition_window_s = 5.0;
  double approach_speed_mps = 20.0;  // along-track speed over the window
};

struct HazardPlacementParams {
  double rock_density = 0.0;    // hazards per m^2
  double crater_density = 0.0;
  double q_exponent = 2.0;      // cumulative size-frequency exponent
  double d_min = 0.3;           // diameter range, meters
  double d_max = 3.0;
  double rock_height_ratio = 0.25;   // height / diameter
  double crater_depth_ratio = 0.2;   // depth / diameter
  double crater_rim_ratio = 0.04;    // rim height / diameter
};

struct PlacedHazards {
  HazardSet hazards;
  Dem stamped;
};

struct DetectorSimParams {
  double miss_rate = 0.0;   // [0, 1)
  double jitter_px = 0.0;   // uniform +- jitter on each bbox corner
};

struct SynthCorrespondences {
  std::vector<Correspondence> matches;
  std::vector<Eigen::Vector3d> ground_truth;  // pre-noise surface points
};

/// Random-phase spectral heightfield, wavelengths >= smoothness_m, scaled so
/// max |height| == amplitude_m. Grid is centered on the ILS origin.
/// Deterministic in seed.
Dem generate_dem(int ncols, int nrows, double cellsize, double amplitude_m,
                 double smoothness_m, std::uint64_t seed);

/// Poisson hazard counts (density * area), diameters from a truncated power
/// law with cumulative exponent q, stamped into a copy of the terrain.
PlacedHazards place_hazards(const Dem& base, const HazardPlacementParams& p,
                            std::uint64_t seed);

/// Rocks add a Gaussian bump, craters subtract a parabolic bowl with a
/// raised rim that decays to zero at one diameter from center.
Dem stamp_hazards(const Dem& base, const HazardSet& hazards);

/// Poses along the straight approach from (downrange, 0, altitude) toward the
/// ILS, one per frame across the acquisition window, each with the boresight
/// through the ILS origin. cant_deg is the nominal mounting cant; on the
/// default 400 m / 400 m geometry the look-at orientation realizes it.
std::vector<Pose> descent_poses(const DescentParams& p, double cant_deg);

/// Per-pixel oracle mask: a pixel is hazard iff its ray-ground intersection
/// (z = 0 plane) lies inside some hazard footprint disk.
HazardMask ground_truth_mask(const Scene& scene, const Pose& pose,
                             const CameraIntrinsics& intr);

/// n terrain surface points co-visible in both views, emitted as pixel pairs
/// with additive Gaussian noise of sigma = noise_px. Throws
/// Error(insufficient_overlap) when fewer than n points are found within
/// 10*n attempts.
SynthCorrespondences synth_correspondences(const Scene& scene, const Pose& pose_a,
                                           const Pose& pose_b,
                                           const CameraIntrinsics& intr, int n,
                                           double noise_px, std::uint64_t seed);

/// Stand-in detector: each visible hazard footprint becomes a bbox detection
/// with probability 1 - miss_rate, corners jittered uniformly, score drawn
/// in [0.5, 1).
std::vector<Detection> simulate_detector(const HazardSet& hazards, const Pose& pose,
                                         const CameraIntrinsics& intr,
                                         const DetectorSimParams& p,
                                         std::uint64_t seed);

struct SceneParams {
  int dem_cols = 512;
  int dem_rows = 512;
  double cellsize = 0.5;
  double amplitude_m = 1.5;
  double smoothness_m = 120.0;
  HazardPlacementParams hazards{.rock_density = 3e-4, .crater_density = 1e-4};
  DescentParams descent{.n_frames = 2};
  double cant_deg = 45.0;
};

/// DEM -> hazards -> poses, each from an independent stream of `seed`.
Scene make_scene(const SceneParams& p, std::uint64_t seed);

}  // namespace hda

#endif
