#ifndef HDA_CAMERA_HPP
#define HDA_CAMERA_HPP

#include <Eigen/Dense>

#include "hda/errors.hpp"

namespace hda {

// Pinhole intrinsics. Defaults are the descent-camera values: 5 MP sensor,
// 2592x1944, nominal 45 deg FOV, principal point at the image center.
// fx/fy and fov_deg are independent configured values; no consistency
// between them is enforced.
struct CameraIntrinsics {
  double fx = 7363.60;
  double fy = 7363.60;
  double cx = 1295.5;
  double cy = 971.5;
  int width = 2592;
  int height = 1944;
  double fov_deg = 45.0;

  Eigen::Matrix3d matrix() const;

  /// Throws Error(bounds_error) if any field is out of range.
  void validate() const;
};

// Rigid transform from the ILS frame into the camera frame:
// x_cam = rotation * x_ils + translation.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  /// Camera center expressed in the ILS frame.
  Eigen::Vector3d center() const { return -rotation.transpose() * translation; }

  /// Throws Error(bounds_error) unless rotation is orthonormal with
  /// det = +1 (both within 1e-9).
  void validate() const;
};

struct PixelProjection {
  Eigen::Vector2d pixel{0.0, 0.0};
  bool visible = false;  // positive depth and pixel inside [0,w) x [0,h)
  double depth = 0.0;    // camera-frame z
};

// Inputs of the pixel-to-meters ground scale. pix_location runs along one
// image axis; angles are degrees at this interface.
struct GroundResolutionQuery {
  double pix_location = 0.0;
  double altitude = 0.0;        // meters above the ILS plane
  double cam_angle_deg = 45.0;  // cant from nadir
  double fov_deg = 45.0;
  int num_pixels = 0;
};

using ProjectionMatrix = Eigen::Matrix<double, 3, 4>;

/// K * [R | t].
ProjectionMatrix projection_matrix(const CameraIntrinsics& intr, const Pose& pose);

PixelProjection project(const Eigen::Vector3d& point, const CameraIntrinsics& intr,
                        const Pose& pose);

/// Inverse of project() along the pixel ray at the given camera-frame depth.
Eigen::Vector3d unproject(const Eigen::Vector2d& pixel, double depth,
                          const CameraIntrinsics& intr, const Pose& pose);

// Meters per pixel on the ground for a pixel at q.pix_location:
//   angLocation = (pixLocation / numPixels) * FOV
//   rho         = altitude / cos(camAngle - FOV/2 + angLocation)
//   res         = 2 * sqrt(rho^2 - altitude^2) * tan(FOV/2) / numPixels
// Throws Error(degenerate_geometry) when the cosine argument leaves
// (-90 deg, 90 deg), i.e. the line of sight reaches horizontal.
double ground_resolution(const GroundResolutionQuery& q);

/// Pixels needed to span vfde_side_m at the given scale: ceil(side / res).
int required_pixels(double vfde_side_m, double res_m_per_px);

}  // namespace hda

#endif
