#include "hda/site_assess.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>

namespace hda {

namespace {

constexpr double kConditioningTarget = 10.0;  // centroid offset along gravity, meters
constexpr double kConditionLimit = 1e8;

Eigen::MatrixX3d conditioned_points(const ROICloud& roi, double offset,
                                    const Eigen::Vector3d& gravity) {
  const auto& pts = roi.cloud.points;
  Eigen::MatrixX3d g(pts.size(), 3);
  for (std::size_t i = 0; i < pts.size(); ++i)
    g.row(i) = (pts[i] + offset * gravity).transpose();
  return g;
}

}  // namespace

const char* assess_status_name(AssessStatus s) {
  switch (s) {
    case AssessStatus::assessed: return "assessed";
    case AssessStatus::insufficient_points: return "insufficient_points";
    case AssessStatus::degenerate_fit: return "degenerate_fit";
  }
  return "assessed";
}

void AssessConfig::validate() const {
  if (!(slope_max_deg > 0.0) || !(roughness_max_m > 0.0) || !(area_min_m2 > 0.0))
    raise(Errc::bounds_error, "assess config: limits must be positive");
  if (n_min < 3) raise(Errc::bounds_error, "assess config: n_min must be >= 3");
  if (std::abs(gravity_axis.norm() - 1.0) > 1e-6)
    raise(Errc::bounds_error, "assess config: gravity_axis must be a unit vector");
}

Eigen::Vector3d PlaneFit::unit_normal(const Eigen::Vector3d& gravity_axis) const {
  Eigen::Vector3d n(a, b, c);
  n.normalize();
  if (n.dot(gravity_axis) < 0.0) n = -n;
  return n;
}

PlaneFit fit_plane(const ROICloud& roi, const AssessConfig& cfg) {
  cfg.validate();
  const int n = static_cast<int>(roi.cloud.points.size());
  if (n < cfg.n_min)
    raise(Errc::insufficient_points, "fit_plane: " + std::to_string(n) + " points, need " +
                                         std::to_string(cfg.n_min));

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : roi.cloud.points) centroid += p;
  centroid /= n;

  PlaneFit fit;
  fit.n_points = n;
  fit.conditioning_offset = kConditioningTarget - centroid.dot(cfg.gravity_axis);

  const Eigen::MatrixX3d g = conditioned_points(roi, fit.conditioning_offset,
                                                cfg.gravity_axis);
  Eigen::BDCSVD<Eigen::MatrixX3d> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::Vector3d& s = svd.singularValues();
  fit.condition_number = s(2) > 0.0 ? (s(0) / s(2)) * (s(0) / s(2))
                                    : std::numeric_limits<double>::infinity();
  if (!(fit.condition_number <= kConditionLimit))
    raise(Errc::degenerate_fit,
          "fit_plane: ill-conditioned point set (cond " +
              std::to_string(fit.condition_number) + ")");

  const Eigen::Vector3d p = svd.solve(Eigen::VectorXd::Ones(n));
  fit.a = p.x();
  fit.b = p.y();
  fit.c = p.z();
  if (fit.a == 0.0 && fit.b == 0.0 && fit.c == 0.0)
    raise(Errc::degenerate_fit, "fit_plane: zero coefficient vector");
  return fit;
}

double slope_angle(const PlaneFit& fit, const AssessConfig& cfg) {
  const Eigen::Vector3d p(fit.a, fit.b, fit.c);
  const double cos_beta =
      std::abs(p.dot(cfg.gravity_axis)) / (p.norm() * cfg.gravity_axis.norm());
  double beta = std::acos(std::clamp(cos_beta, 0.0, 1.0)) * 180.0 / std::numbers::pi;
  if (beta > 90.0) {
    // Unreachable: the absolute value in the numerator keeps acos in [0, 90].
    assert(false && "slope_angle: obtuse angle with |.| numerator");
    beta = 180.0 - beta;
  }
  return beta;
}

double roughness(const ROICloud& roi, const PlaneFit& fit, const AssessConfig& cfg) {
  if (roi.cloud.points.empty()) return 0.0;
  const Eigen::MatrixX3d g = conditioned_points(roi, fit.conditioning_offset,
                                                cfg.gravity_axis);
  const Eigen::Vector3d p(fit.a, fit.b, fit.c);
  const Eigen::ArrayXd dist = (g * p).array() - 1.0;
  const double scale = p.norm();
  if (cfg.roughness_aggregate == RoughnessAggregate::max)
    return dist.abs().maxCoeff() / scale;
  return std::sqrt(dist.square().mean()) / scale;
}

double cost(double area_m2, double slope_deg, double roughness_m,
            const AssessConfig& cfg) {
  if (!(area_m2 > 0.0)) raise(Errc::bounds_error, "cost: area must be positive");
  if (slope_deg < 0.0 || roughness_m < 0.0)
    raise(Errc::bounds_error, "cost: negative slope or roughness");
  return cfg.area_min_m2 / area_m2 + slope_deg / cfg.slope_max_deg +
         roughness_m / cfg.roughness_max_m;
}

SiteAssessment assess_site(const CandidateRegion& region, const ROICloud& roi,
                           const AssessConfig& cfg) {
  SiteAssessment site;
  site.region = region;
  site.area_m2 = region.area_m2;
  site.n_points = static_cast<int>(roi.cloud.points.size());
  site.slope_deg = std::numeric_limits<double>::quiet_NaN();
  site.roughness_m = std::numeric_limits<double>::quiet_NaN();
  site.cost = std::numeric_limits<double>::quiet_NaN();

  PlaneFit fit;
  try {
    fit = fit_plane(roi, cfg);
  } catch (const Error& e) {
    site.status = e.code() == Errc::insufficient_points
                      ? AssessStatus::insufficient_points
                      : AssessStatus::degenerate_fit;
    return site;
  }

  site.status = AssessStatus::assessed;
  site.slope_deg = slope_angle(fit, cfg);
  site.roughness_m = roughness(roi, fit, cfg);
  site.cost = cost(site.area_m2, site.slope_deg, site.roughness_m, cfg);
  site.safe = site.slope_deg <= cfg.slope_max_deg &&
              site.roughness_m <= cfg.roughness_max_m;
  return site;
}

std::vector<SiteAssessment> rank_sites(std::vector<SiteAssessment> assessments) {
  std::stable_sort(assessments.begin(), assessments.end(),
                   [](const SiteAssessment& a, const SiteAssessment& b) {
                     const bool a_ok = a.status == AssessStatus::assessed;
                     const bool b_ok = b.status == AssessStatus::assessed;
                     if (a_ok != b_ok) return a_ok;
                     if (!a_ok) return false;  // non-assessed keep input order
                     if (a.cost != b.cost) return a.cost < b.cost;
                     if (a.area_m2 != b.area_m2) return a.area_m2 > b.area_m2;
                     if (a.region.y != b.region.y) return a.region.y < b.region.y;
                     return a.region.x < b.region.x;
                   });
  for (std::size_t i = 0; i < assessments.size(); ++i)
    assessments[i].rank = static_cast<int>(i) + 1;
  return assessments;
}

}  // namespace hda
