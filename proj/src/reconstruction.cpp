#include "hda/reconstruction.hpp"

#include <cmath>

namespace hda {

namespace {

bool projections_identical_up_to_scale(const ProjectionMatrix& p_a,
                                       const ProjectionMatrix& p_b) {
  const double na = p_a.norm();
  const double nb = p_b.norm();
  if (na == 0.0 || nb == 0.0) return true;
  const double plus = (p_a / na + p_b / nb).norm();
  const double minus = (p_a / na - p_b / nb).norm();
  return std::min(plus, minus) < 1e-12;
}

double depth_in_view(const ProjectionMatrix& p, const Eigen::Vector3d& x) {
  return p.row(2).head<3>().dot(x) + p(2, 3);
}

double reprojection_error(const ProjectionMatrix& p, const Eigen::Vector3d& x,
                          const Eigen::Vector2d& pixel) {
  const Eigen::Vector3d h = p.leftCols<3>() * x + p.col(3);
  return (h.hnormalized() - pixel).norm();
}

// One first-order (Sampson) correction step toward the epipolar constraint.
void epipolar_correction_step(const Eigen::Matrix3d& f, Eigen::Vector2d& pa,
                              Eigen::Vector2d& pb) {
  const Eigen::Vector3d xa = pa.homogeneous();
  const Eigen::Vector3d xb = pb.homogeneous();
  const double err = xb.dot(f * xa);
  const Eigen::Vector3d la = f.transpose() * xb;  // epipolar line in view a
  const Eigen::Vector3d lb = f * xa;              // epipolar line in view b
  const double denom =
      la.head<2>().squaredNorm() + lb.head<2>().squaredNorm();
  if (denom < 1e-300) return;
  pa -= (err / denom) * la.head<2>();
  pb -= (err / denom) * lb.head<2>();
}

TriangulationResult triangulate_impl(const Correspondence& c,
                                     const ProjectionMatrix& p_a,
                                     const ProjectionMatrix& p_b,
                                     const Eigen::Matrix3d* f) {
  Correspondence m = c;
  if (f) {
    epipolar_correction_step(*f, m.pixel_a, m.pixel_b);
    epipolar_correction_step(*f, m.pixel_a, m.pixel_b);
  }

  Eigen::Matrix4d a;
  a.row(0) = m.pixel_a.x() * p_a.row(2) - p_a.row(0);
  a.row(1) = m.pixel_a.y() * p_a.row(2) - p_a.row(1);
  a.row(2) = m.pixel_b.x() * p_b.row(2) - p_b.row(0);
  a.row(3) = m.pixel_b.y() * p_b.row(2) - p_b.row(1);

  Eigen::JacobiSVD<Eigen::Matrix4d> svd(a, Eigen::ComputeFullV);
  const Eigen::Vector4d& s = svd.singularValues();
  // Two vanishing singular values mean the solution is not unique.
  if (!(s(2) > 1e-10 * s(0)))
    raise(Errc::degenerate_geometry, "triangulate: rank-deficient design matrix");

  const Eigen::Vector4d xh = svd.matrixV().col(3);
  if (std::abs(xh(3)) <= 1e-12 * xh.head<3>().norm())
    raise(Errc::degenerate_geometry, "triangulate: point at infinity (parallel rays)");

  TriangulationResult out;
  out.point = xh.head<3>() / xh(3);
  out.reproj_error_px = 0.5 * (reprojection_error(p_a, out.point, c.pixel_a) +
                               reprojection_error(p_b, out.point, c.pixel_b));
  if (!std::isfinite(out.reproj_error_px))
    raise(Errc::degenerate_geometry, "triangulate: unstable solution");
  return out;
}

}  // namespace

Eigen::Matrix3d fundamental_from_projections(const ProjectionMatrix& p_a,
                                             const ProjectionMatrix& p_b) {
  // Camera center of view a = null vector of P_a.
  Eigen::JacobiSVD<ProjectionMatrix> svd(p_a, Eigen::ComputeFullV);
  const Eigen::Vector4d center_a = svd.matrixV().col(3);
  const Eigen::Vector3d epipole_b = p_b.leftCols<3>() * center_a.head<3>() +
                                    p_b.col(3) * center_a(3);
  Eigen::Matrix3d cross;
  cross << 0, -epipole_b.z(), epipole_b.y(),
      epipole_b.z(), 0, -epipole_b.x(),
      -epipole_b.y(), epipole_b.x(), 0;
  const Eigen::Matrix<double, 4, 3> pinv_a =
      p_a.completeOrthogonalDecomposition().pseudoInverse();
  return cross * (p_b * pinv_a);
}

TriangulationResult triangulate(const Correspondence& c, const ProjectionMatrix& p_a,
                                const ProjectionMatrix& p_b, bool refine) {
  if (projections_identical_up_to_scale(p_a, p_b))
    raise(Errc::degenerate_geometry, "triangulate: identical projection matrices");
  if (refine) {
    const Eigen::Matrix3d f = fundamental_from_projections(p_a, p_b);
    return triangulate_impl(c, p_a, p_b, &f);
  }
  return triangulate_impl(c, p_a, p_b, nullptr);
}

PointCloud build_point_cloud(const std::vector<Correspondence>& correspondences,
                             const ProjectionMatrix& p_a, const ProjectionMatrix& p_b,
                             const TriangulationOptions& opts, CloudBuildStats* stats) {
  if (!(opts.max_reproj_px > 0.0))
    raise(Errc::bounds_error, "build_point_cloud: max_reproj_px must be positive");
  if (projections_identical_up_to_scale(p_a, p_b))
    raise(Errc::degenerate_geometry, "build_point_cloud: identical projection matrices");

  Eigen::Matrix3d f;
  if (opts.refine) f = fundamental_from_projections(p_a, p_b);

  PointCloud cloud;
  CloudBuildStats counts;
  cloud.points.reserve(correspondences.size());
  cloud.reproj_error.reserve(correspondences.size());

  for (const Correspondence& c : correspondences) {
    TriangulationResult r;
    try {
      r = triangulate_impl(c, p_a, p_b, opts.refine ? &f : nullptr);
    } catch (const Error&) {
      ++counts.degenerate;
      continue;
    }
    if (depth_in_view(p_a, r.point) <= 0.0 || depth_in_view(p_b, r.point) <= 0.0) {
      ++counts.behind_camera;
      continue;
    }
    if (r.reproj_error_px > opts.max_reproj_px) {
      ++counts.high_error;
      continue;
    }
    ++counts.kept;
    cloud.points.push_back(r.point);
    cloud.reproj_error.push_back(r.reproj_error_px);
  }
  if (stats) *stats = counts;
  return cloud;
}

ROICloud segment_roi(const PointCloud& cloud, const CandidateRegion& region,
                     const ProjectionMatrix& p_ref) {
  ROICloud roi;
  roi.region = region;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Eigen::Vector3d& x = cloud.points[i];
    const double w = depth_in_view(p_ref, x);
    if (w <= 0.0) continue;
    const Eigen::Vector3d h = p_ref.leftCols<3>() * x + p_ref.col(3);
    const double u = h.x() / w;
    const double v = h.y() / w;
    if (u >= region.x && u < region.x + region.side && v >= region.y &&
        v < region.y + region.side) {
      roi.cloud.points.push_back(x);
      roi.cloud.reproj_error.push_back(cloud.reproj_error[i]);
    }
  }
  return roi;
}

}  // namespace hda
