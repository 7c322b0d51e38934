#include "hda/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hda/rng.hpp"

namespace hda {

namespace {

constexpr double kPi = std::numbers::pi;

// Stream ids for per-operation rngs derived from a scene seed.
enum Stream : std::uint64_t {
  kStreamDem = 1,
  kStreamHazards = 2,
  kStreamDetector = 3,
  kStreamMatches = 4,
};

}  // namespace

bool Dem::contains(double x, double y) const {
  return x >= origin.x() && x <= origin.x() + extent_x() && y >= origin.y() &&
         y <= origin.y() + extent_y();
}

double Dem::sample(double x, double y) const {
  const double fc = std::clamp((x - origin.x()) / cellsize, 0.0, double(ncols - 1));
  const double fr = std::clamp((y - origin.y()) / cellsize, 0.0, double(nrows - 1));
  const int c0 = std::min(static_cast<int>(fc), ncols - 2 >= 0 ? ncols - 2 : 0);
  const int r0 = std::min(static_cast<int>(fr), nrows - 2 >= 0 ? nrows - 2 : 0);
  const int c1 = std::min(c0 + 1, ncols - 1);
  const int r1 = std::min(r0 + 1, nrows - 1);
  const double tx = fc - c0;
  const double ty = fr - r0;
  const double top = at(r0, c0) * (1.0 - tx) + at(r0, c1) * tx;
  const double bot = at(r1, c0) * (1.0 - tx) + at(r1, c1) * tx;
  return top * (1.0 - ty) + bot * ty;
}

Dem generate_dem(int ncols, int nrows, double cellsize, double amplitude_m,
                 double smoothness_m, std::uint64_t seed) {
  if (ncols < 2 || nrows < 2)
    raise(Errc::bounds_error, "generate_dem: grid must be at least 2x2");
  if (!(cellsize > 0.0)) raise(Errc::bounds_error, "generate_dem: cellsize must be > 0");
  if (amplitude_m < 0.0) raise(Errc::bounds_error, "generate_dem: negative amplitude");

  Dem dem;
  dem.ncols = ncols;
  dem.nrows = nrows;
  dem.cellsize = cellsize;
  dem.origin = {-0.5 * (ncols - 1) * cellsize, -0.5 * (nrows - 1) * cellsize};
  dem.heights.assign(static_cast<std::size_t>(nrows) * ncols, 0.0);
  if (amplitude_m == 0.0) return dem;

  // Random-phase cosine waves, wavelengths log-uniform in
  // [smoothness, 8 * smoothness], amplitude proportional to wavelength so
  // each wave contributes comparable slope.
  Rng rng = derived_rng(seed, kStreamDem);
  constexpr int kWaves = 48;
  const double lambda_min = std::max(smoothness_m, 2.0 * cellsize);
  struct Wave {
    double kx, ky, phase, amp;
  };
  std::vector<Wave> waves(kWaves);
  for (Wave& w : waves) {
    const double lambda = lambda_min * std::exp(rng.uniform() * std::log(8.0));
    const double dir = rng.uniform(0.0, 2.0 * kPi);
    const double k = 2.0 * kPi / lambda;
    w.kx = k * std::cos(dir);
    w.ky = k * std::sin(dir);
    w.phase = rng.uniform(0.0, 2.0 * kPi);
    w.amp = lambda / lambda_min;
  }

  double peak = 0.0;
  for (int r = 0; r < nrows; ++r) {
    const double y = dem.origin.y() + r * cellsize;
    for (int c = 0; c < ncols; ++c) {
      const double x = dem.origin.x() + c * cellsize;
      double h = 0.0;
      for (const Wave& w : waves) h += w.amp * std::cos(w.kx * x + w.ky * y + w.phase);
      dem.at(r, c) = h;
      peak = std::max(peak, std::abs(h));
    }
  }
  if (peak > 0.0) {
    const double gain = amplitude_m / peak;
    for (double& h : dem.heights) h *= gain;
  }
  return dem;
}

namespace {

// Inverse-CDF draw from the truncated power law N(>= d) ~ d^-q on
// [d_min, d_max].
double sample_diameter(Rng& rng, double q, double d_min, double d_max) {
  const double u = rng.uniform();
  const double lo = std::pow(d_min, -q);
  const double hi = std::pow(d_max, -q);
  return std::pow(lo - u * (lo - hi), -1.0 / q);
}

Eigen::Vector2d sample_center(Rng& rng, const Dem& dem, double margin) {
  const double x0 = dem.origin.x();
  const double y0 = dem.origin.y();
  double lo_x = x0 + margin, hi_x = x0 + dem.extent_x() - margin;
  double lo_y = y0 + margin, hi_y = y0 + dem.extent_y() - margin;
  if (lo_x >= hi_x) lo_x = hi_x = x0 + 0.5 * dem.extent_x();
  if (lo_y >= hi_y) lo_y = hi_y = y0 + 0.5 * dem.extent_y();
  return {rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y)};
}

void stamp_rock(Dem& dem, const RockSpec& rock) {
  const double sigma = rock.diameter / 4.0;
  const double reach = rock.diameter;  // bump is ~3e-4 of height beyond this
  const int c0 = std::max(0, int((rock.center.x() - reach - dem.origin.x()) / dem.cellsize));
  const int c1 = std::min(dem.ncols - 1,
                          int((rock.center.x() + reach - dem.origin.x()) / dem.cellsize) + 1);
  const int r0 = std::max(0, int((rock.center.y() - reach - dem.origin.y()) / dem.cellsize));
  const int r1 = std::min(dem.nrows - 1,
                          int((rock.center.y() + reach - dem.origin.y()) / dem.cellsize) + 1);
  for (int r = r0; r <= r1; ++r) {
    const double y = dem.origin.y() + r * dem.cellsize;
    for (int c = c0; c <= c1; ++c) {
      const double x = dem.origin.x() + c * dem.cellsize;
      const double d2 = (Eigen::Vector2d(x, y) - rock.center).squaredNorm();
      if (d2 > reach * reach) continue;
      dem.at(r, c) += rock.height * std::exp(-d2 / (2.0 * sigma * sigma));
    }
  }
}

void stamp_crater(Dem& dem, const CraterSpec& crater, double rim_height) {
  const double radius = crater.diameter / 2.0;
  const double reach = crater.diameter;  // rim decays to zero at 2R
  const int c0 = std::max(0, int((crater.center.x() - reach - dem.origin.x()) / dem.cellsize));
  const int c1 = std::min(dem.ncols - 1,
                          int((crater.center.x() + reach - dem.origin.x()) / dem.cellsize) + 1);
  const int r0 = std::max(0, int((crater.center.y() - reach - dem.origin.y()) / dem.cellsize));
  const int r1 = std::min(dem.nrows - 1,
                          int((crater.center.y() + reach - dem.origin.y()) / dem.cellsize) + 1);
  for (int r = r0; r <= r1; ++r) {
    const double y = dem.origin.y() + r * dem.cellsize;
    for (int c = c0; c <= c1; ++c) {
      const double x = dem.origin.x() + c * dem.cellsize;
      const double dist = (Eigen::Vector2d(x, y) - crater.center).norm();
      if (dist >= reach) continue;
      if (dist <= radius) {
        const double t = dist / radius;
        dem.at(r, c) += -crater.depth + (crater.depth + rim_height) * t * t;
      } else {
        const double t = (dist - radius) / radius;  // (0, 1]
        dem.at(r, c) += rim_height * 0.5 * (1.0 + std::cos(kPi * t));
      }
    }
  }
}

}  // namespace

Dem stamp_hazards(const Dem& base, const HazardSet& hazards) {
  Dem out = base;
  for (const RockSpec& r : hazards.rocks) stamp_rock(out, r);
  for (const CraterSpec& c : hazards.craters)
    stamp_crater(out, c, 0.04 * c.diameter);
  return out;
}

PlacedHazards place_hazards(const Dem& base, const HazardPlacementParams& p,
                            std::uint64_t seed) {
  if (!(p.d_min < p.d_max) || !(p.d_min > 0.0))
    raise(Errc::bounds_error, "place_hazards: need 0 < d_min < d_max");
  if (p.rock_density < 0.0 || p.crater_density < 0.0)
    raise(Errc::bounds_error, "place_hazards: negative density");
  if (!(p.q_exponent > 0.0))
    raise(Errc::bounds_error, "place_hazards: q_exponent must be positive");

  Rng rng = derived_rng(seed, kStreamHazards);
  const double area = base.extent_x() * base.extent_y();

  PlacedHazards out;
  const long n_rocks = rng.poisson(p.rock_density * area);
  for (long i = 0; i < n_rocks; ++i) {
    RockSpec rock;
    rock.diameter = sample_diameter(rng, p.q_exponent, p.d_min, p.d_max);
    rock.height = p.rock_height_ratio * rock.diameter;
    rock.center = sample_center(rng, base, rock.diameter);
    out.hazards.rocks.push_back(rock);
  }
  const long n_craters = rng.poisson(p.crater_density * area);
  for (long i = 0; i < n_craters; ++i) {
    CraterSpec crater;
    crater.diameter = sample_diameter(rng, p.q_exponent, p.d_min, p.d_max);
    crater.depth = p.crater_depth_ratio * crater.diameter;
    crater.center = sample_center(rng, base, crater.diameter);
    out.hazards.craters.push_back(crater);
  }

  out.stamped = base;
  for (const RockSpec& r : out.hazards.rocks) stamp_rock(out.stamped, r);
  for (const CraterSpec& c : out.hazards.craters)
    stamp_crater(out.stamped, c, p.crater_rim_ratio * c.diameter);
  return out;
}

std::vector<Pose> descent_poses(const DescentParams& p, double cant_deg) {
  if (!(p.start_altitude > 0.0) || p.start_downrange < 0.0)
    raise(Errc::bounds_error, "descent_poses: invalid start geometry");
  if (p.n_frames < 2) raise(Errc::bounds_error, "descent_poses: need n_frames >= 2");
  if (!(p.acquisition_window_s > 0.0) || !(p.approach_speed_mps > 0.0))
    raise(Errc::bounds_error, "descent_poses: window and speed must be positive");
  (void)cant_deg;  // nominal mounting cant; look-at fixes the orientation

  const Eigen::Vector3d start(p.start_downrange, 0.0, p.start_altitude);
  const double range = start.norm();
  const double travel = p.approach_speed_mps * p.acquisition_window_s;
  if (travel >= range)
    raise(Errc::bounds_error, "descent_poses: acquisition window reaches the ILS");

  std::vector<Pose> poses(p.n_frames);
  const Eigen::Vector3d dir = -start / range;
  const Eigen::Vector3d up(0.0, 0.0, 1.0);
  for (int i = 0; i < p.n_frames; ++i) {
    const double s = travel * double(i) / double(p.n_frames - 1);
    const Eigen::Vector3d center = start + s * dir;

    Eigen::Vector3d z_cam = (-center).normalized();  // boresight through ILS
    Eigen::Vector3d x_cam = up.cross(z_cam);
    if (x_cam.norm() < 1e-12) x_cam = Eigen::Vector3d(0.0, -1.0, 0.0);
    x_cam.normalize();
    const Eigen::Vector3d y_cam = z_cam.cross(x_cam);

    Pose& pose = poses[i];
    pose.rotation.row(0) = x_cam;
    pose.rotation.row(1) = y_cam;
    pose.rotation.row(2) = z_cam;
    pose.translation = -pose.rotation * center;
  }
  return poses;
}

namespace {

// Uniform bucket grid over hazard footprint disks for O(1) point lookups.
class FootprintIndex {
 public:
  explicit FootprintIndex(const HazardSet& hazards) {
    for (const RockSpec& r : hazards.rocks) add(r.center, r.diameter / 2.0);
    for (const CraterSpec& c : hazards.craters) add(c.center, c.diameter / 2.0);
    if (disks_.empty()) return;
    cell_ = 2.0 * max_radius_;
    min_ = disks_[0].center;
    Eigen::Vector2d max = min_;
    for (const Disk& d : disks_) {
      min_ = min_.cwiseMin((d.center.array() - d.radius).matrix());
      max = max.cwiseMax((d.center.array() + d.radius).matrix());
    }
    nx_ = static_cast<int>((max.x() - min_.x()) / cell_) + 1;
    ny_ = static_cast<int>((max.y() - min_.y()) / cell_) + 1;
    buckets_.resize(static_cast<std::size_t>(nx_) * ny_);
    for (std::size_t i = 0; i < disks_.size(); ++i) {
      const Disk& d = disks_[i];
      const int cx0 = col(d.center.x() - d.radius), cx1 = col(d.center.x() + d.radius);
      const int cy0 = row(d.center.y() - d.radius), cy1 = row(d.center.y() + d.radius);
      for (int cy = cy0; cy <= cy1; ++cy)
        for (int cx = cx0; cx <= cx1; ++cx)
          buckets_[static_cast<std::size_t>(cy) * nx_ + cx].push_back(i);
    }
  }

  bool covers(double x, double y) const {
    if (disks_.empty()) return false;
    if (x < min_.x() || y < min_.y()) return false;
    const int cx = col(x), cy = row(y);
    if (cx >= nx_ || cy >= ny_) return false;
    for (std::size_t i : buckets_[static_cast<std::size_t>(cy) * nx_ + cx]) {
      const Disk& d = disks_[i];
      if ((Eigen::Vector2d(x, y) - d.center).squaredNorm() <= d.radius * d.radius)
        return true;
    }
    return false;
  }

 private:
  struct Disk {
    Eigen::Vector2d center;
    double radius;
  };

  void add(const Eigen::Vector2d& center, double radius) {
    disks_.push_back({center, radius});
    max_radius_ = std::max(max_radius_, radius);
  }
  int col(double x) const {
    return std::clamp(static_cast<int>((x - min_.x()) / cell_), 0, nx_ - 1);
  }
  int row(double y) const {
    return std::clamp(static_cast<int>((y - min_.y()) / cell_), 0, ny_ - 1);
  }

  std::vector<Disk> disks_;
  std::vector<std::vector<std::size_t>> buckets_;
  Eigen::Vector2d min_{0.0, 0.0};
  double cell_ = 1.0, max_radius_ = 0.0;
  int nx_ = 0, ny_ = 0;
};

// Ray-ground intersection with the z = 0 ILS plane. Returns false when the
// ray does not descend.
bool pixel_ground_point(const Eigen::Vector2d& pixel, const CameraIntrinsics& intr,
                        const Pose& pose, const Eigen::Vector3d& center,
                        Eigen::Vector2d& ground) {
  const Eigen::Vector3d dir_cam((pixel.x() - intr.cx) / intr.fx,
                                (pixel.y() - intr.cy) / intr.fy, 1.0);
  const Eigen::Vector3d dir = pose.rotation.transpose() * dir_cam;
  if (dir.z() >= -1e-12) return false;
  const double s = -center.z() / dir.z();
  if (s <= 0.0) return false;
  ground = center.head<2>() + s * dir.head<2>();
  return true;
}

}  // namespace

HazardMask ground_truth_mask(const Scene& scene, const Pose& pose,
                             const CameraIntrinsics& intr) {
  intr.validate();
  pose.validate();
  HazardMask mask = HazardMask::zeros(intr.width, intr.height);
  const FootprintIndex index(scene.hazards);
  const Eigen::Vector3d center = pose.center();
  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      Eigen::Vector2d g;
      if (!pixel_ground_point({double(u), double(v)}, intr, pose, center, g)) continue;
      if (index.covers(g.x(), g.y())) mask.set(u, v, 1);
    }
  }
  return mask;
}

SynthCorrespondences synth_correspondences(const Scene& scene, const Pose& pose_a,
                                           const Pose& pose_b,
                                           const CameraIntrinsics& intr, int n,
                                           double noise_px, std::uint64_t seed) {
  if (n < 1) raise(Errc::bounds_error, "synth_correspondences: n must be >= 1");
  if (noise_px < 0.0)
    raise(Errc::bounds_error, "synth_correspondences: negative noise");

  Rng rng = derived_rng(seed, kStreamMatches);
  SynthCorrespondences out;
  out.matches.reserve(n);
  out.ground_truth.reserve(n);

  const Dem& dem = scene.dem;
  const long max_attempts = 10L * n;
  for (long attempt = 0; attempt < max_attempts && int(out.matches.size()) < n;
       ++attempt) {
    const double x = rng.uniform(dem.origin.x(), dem.origin.x() + dem.extent_x());
    const double y = rng.uniform(dem.origin.y(), dem.origin.y() + dem.extent_y());
    const Eigen::Vector3d point(x, y, dem.sample(x, y));
    const PixelProjection in_a = project(point, intr, pose_a);
    const PixelProjection in_b = project(point, intr, pose_b);
    if (!in_a.visible || !in_b.visible) continue;

    Correspondence c{in_a.pixel, in_b.pixel};
    if (noise_px > 0.0) {
      c.pixel_a += noise_px * Eigen::Vector2d(rng.normal(), rng.normal());
      c.pixel_b += noise_px * Eigen::Vector2d(rng.normal(), rng.normal());
    }
    out.matches.push_back(c);
    out.ground_truth.push_back(point);
  }
  if (int(out.matches.size()) < n)
    raise(Errc::insufficient_overlap,
          "synth_correspondences: only " + std::to_string(out.matches.size()) +
              " of " + std::to_string(n) + " points co-visible");
  return out;
}

std::vector<Detection> simulate_detector(const HazardSet& hazards, const Pose& pose,
                                         const CameraIntrinsics& intr,
                                         const DetectorSimParams& p,
                                         std::uint64_t seed) {
  if (!(p.miss_rate >= 0.0 && p.miss_rate < 1.0))
    raise(Errc::bounds_error, "simulate_detector: miss_rate must lie in [0, 1)");
  if (p.jitter_px < 0.0)
    raise(Errc::bounds_error, "simulate_detector: negative jitter");

  Rng rng = derived_rng(seed, kStreamDetector);
  std::vector<Detection> out;

  constexpr int kRimSamples = 64;
  const auto emit = [&](const Eigen::Vector2d& center, double diameter,
                        HazardClass cls) {
    // Project the footprint rim (z = 0) and take the pixel bbox.
    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    bool any = false;
    const double radius = diameter / 2.0;
    for (int k = 0; k < kRimSamples; ++k) {
      const double ang = 2.0 * kPi * k / kRimSamples;
      const Eigen::Vector3d rim(center.x() + radius * std::cos(ang),
                                center.y() + radius * std::sin(ang), 0.0);
      const PixelProjection proj = project(rim, intr, pose);
      if (proj.depth <= 0.0) continue;
      any = true;
      x0 = std::min(x0, proj.pixel.x());
      y0 = std::min(y0, proj.pixel.y());
      x1 = std::max(x1, proj.pixel.x());
      y1 = std::max(y1, proj.pixel.y());
    }
    if (!any) return;                        // fully behind the camera
    if (x1 < 0 || y1 < 0 || x0 >= intr.width || y0 >= intr.height) return;

    if (rng.uniform() < p.miss_rate) return;  // missed detection

    Detection d;
    d.cls = cls;
    d.x_min = x0 + rng.uniform(-p.jitter_px, p.jitter_px);
    d.x_max = x1 + rng.uniform(-p.jitter_px, p.jitter_px);
    d.y_min = y0 + rng.uniform(-p.jitter_px, p.jitter_px);
    d.y_max = y1 + rng.uniform(-p.jitter_px, p.jitter_px);
    d.score = rng.uniform(0.5, 1.0);
    if (d.x_min > d.x_max) std::swap(d.x_min, d.x_max);
    if (d.y_min > d.y_max) std::swap(d.y_min, d.y_max);
    d.x_min = std::clamp(d.x_min, 0.0, double(intr.width));
    d.x_max = std::clamp(d.x_max, 0.0, double(intr.width));
    d.y_min = std::clamp(d.y_min, 0.0, double(intr.height));
    d.y_max = std::clamp(d.y_max, 0.0, double(intr.height));
    if (!(d.x_min < d.x_max && d.y_min < d.y_max)) return;
    out.push_back(d);
  };

  for (const RockSpec& r : hazards.rocks) emit(r.center, r.diameter, HazardClass::rock);
  for (const CraterSpec& c : hazards.craters)
    emit(c.center, c.diameter, HazardClass::crater);
  return out;
}

Scene make_scene(const SceneParams& p, std::uint64_t seed) {
  Scene scene;
  scene.seed = seed;
  const Dem base = generate_dem(p.dem_cols, p.dem_rows, p.cellsize, p.amplitude_m,
                                p.smoothness_m, seed);
  PlacedHazards placed = place_hazards(base, p.hazards, seed);
  scene.dem = std::move(placed.stamped);
  scene.hazards = std::move(placed.hazards);
  scene.poses = descent_poses(p.descent, p.cant_deg);
  return scene;
}

}  // namespace hda
