#include "hda/camera.hpp"

#include <cmath>
#include <numbers>

namespace hda {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
}

Eigen::Matrix3d CameraIntrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0))
    raise(Errc::bounds_error, "intrinsics: focal lengths must be positive");
  if (width <= 0 || height <= 0)
    raise(Errc::bounds_error, "intrinsics: image size must be positive");
  if (!(cx > 0.0 && cx < width) || !(cy > 0.0 && cy < height))
    raise(Errc::bounds_error, "intrinsics: principal point outside image");
  if (!(fov_deg > 0.0 && fov_deg < 180.0))
    raise(Errc::bounds_error, "intrinsics: fov_deg must lie in (0, 180)");
}

void Pose::validate() const {
  const double ortho =
      (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
          .cwiseAbs()
          .maxCoeff();
  if (ortho > 1e-9)
    raise(Errc::bounds_error, "pose: rotation is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > 1e-9)
    raise(Errc::bounds_error, "pose: rotation determinant is not +1");
}

ProjectionMatrix projection_matrix(const CameraIntrinsics& intr, const Pose& pose) {
  intr.validate();
  pose.validate();
  ProjectionMatrix rt;
  rt.leftCols<3>() = pose.rotation;
  rt.col(3) = pose.translation;
  return intr.matrix() * rt;
}

PixelProjection project(const Eigen::Vector3d& point, const CameraIntrinsics& intr,
                        const Pose& pose) {
  const Eigen::Vector3d cam = pose.rotation * point + pose.translation;
  PixelProjection out;
  out.depth = cam.z();
  if (cam.z() <= 0.0) return out;  // behind the camera, pixel undefined
  out.pixel.x() = intr.fx * cam.x() / cam.z() + intr.cx;
  out.pixel.y() = intr.fy * cam.y() / cam.z() + intr.cy;
  out.visible = out.pixel.x() >= 0.0 && out.pixel.x() < intr.width &&
                out.pixel.y() >= 0.0 && out.pixel.y() < intr.height;
  return out;
}

Eigen::Vector3d unproject(const Eigen::Vector2d& pixel, double depth,
                          const CameraIntrinsics& intr, const Pose& pose) {
  const Eigen::Vector3d cam((pixel.x() - intr.cx) * depth / intr.fx,
                            (pixel.y() - intr.cy) * depth / intr.fy, depth);
  return pose.rotation.transpose() * (cam - pose.translation);
}

double ground_resolution(const GroundResolutionQuery& q) {
  if (q.num_pixels <= 0)
    raise(Errc::bounds_error, "ground_resolution: num_pixels must be positive");
  if (!(q.pix_location >= 0.0 && q.pix_location < q.num_pixels))
    raise(Errc::bounds_error, "ground_resolution: pix_location outside [0, num_pixels)");
  if (!(q.altitude > 0.0))
    raise(Errc::bounds_error, "ground_resolution: altitude must be positive");
  if (!(q.fov_deg > 0.0 && q.fov_deg < 180.0))
    raise(Errc::bounds_error, "ground_resolution: fov_deg must lie in (0, 180)");

  const double fov = q.fov_deg * kDegToRad;
  const double ang_location = (q.pix_location / q.num_pixels) * fov;
  const double arg = q.cam_angle_deg * kDegToRad - 0.5 * fov + ang_location;
  if (!(std::abs(arg) < 0.5 * std::numbers::pi))
    raise(Errc::degenerate_geometry,
          "ground_resolution: line of sight at or above horizontal");

  const double rho = q.altitude / std::cos(arg);
  const double ground = std::sqrt(std::max(0.0, rho * rho - q.altitude * q.altitude));
  return 2.0 * ground * std::tan(0.5 * fov) / q.num_pixels;
}

int required_pixels(double vfde_side_m, double res_m_per_px) {
  if (!(res_m_per_px > 0.0))
    raise(Errc::degenerate_geometry, "required_pixels: resolution must be positive");
  if (vfde_side_m < 0.0)
    raise(Errc::bounds_error, "required_pixels: negative footprint side");
  return static_cast<int>(std::ceil(vfde_side_m / res_m_per_px));
}

}  // namespace hda
