#ifndef HDA_RECONSTRUCTION_HPP
#define HDA_RECONSTRUCTION_HPP

#include <vector>

#include <Eigen/Dense>

#include "hda/camera.hpp"
#include "hda/hazard_map.hpp"

namespace hda {

struct Correspondence {
  Eigen::Vector2d pixel_a{0.0, 0.0};
  Eigen::Vector2d pixel_b{0.0, 0.0};
};

// Sparse ILS-frame points with their mean symmetric reprojection error.
struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<double> reproj_error;

  std::size_t size() const { return points.size(); }
};

struct ROICloud {
  CandidateRegion region;
  PointCloud cloud;
};

struct TriangulationResult {
  Eigen::Vector3d point{0.0, 0.0, 0.0};
  double reproj_error_px = 0.0;
};

struct TriangulationOptions {
  double max_reproj_px = 2.0;
  // Optimal-correction refinement: iterate the pixel pair onto the epipolar
  // constraint before the DLT solve.
  bool refine = false;
};

struct CloudBuildStats {
  int kept = 0;
  int degenerate = 0;
  int behind_camera = 0;
  int high_error = 0;
};

/// Homogeneous linear (DLT) two-view triangulation. Throws
/// Error(degenerate_geometry) for identical views, parallel rays, or a
/// rank-deficient design matrix.
TriangulationResult triangulate(const Correspondence& c, const ProjectionMatrix& p_a,
                                const ProjectionMatrix& p_b, bool refine = false);

/// Triangulates every correspondence, dropping points that are degenerate,
/// behind either camera, or over the reprojection threshold. Survivors keep
/// input order; drop counts land in `stats` when given.
PointCloud build_point_cloud(const std::vector<Correspondence>& correspondences,
                             const ProjectionMatrix& p_a, const ProjectionMatrix& p_b,
                             const TriangulationOptions& opts,
                             CloudBuildStats* stats = nullptr);

/// Points whose reference-view projection falls inside the region rectangle,
/// boundary convention [x, x+side) x [y, y+side).
ROICloud segment_roi(const PointCloud& cloud, const CandidateRegion& region,
                     const ProjectionMatrix& p_ref);

/// F such that pixel_b^T * F * pixel_a = 0 (homogeneous pixels).
Eigen::Matrix3d fundamental_from_projections(const ProjectionMatrix& p_a,
                                             const ProjectionMatrix& p_b);

}  // namespace hda

#endif
