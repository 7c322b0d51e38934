#ifndef HDA_SITE_ASSESS_HPP
#define HDA_SITE_ASSESS_HPP

#include <vector>

#include <Eigen/Dense>

#include "hda/reconstruction.hpp"

namespace hda {

enum class RoughnessAggregate { max, rms };
enum class AssessStatus { assessed, insufficient_points, degenerate_fit };

const char* assess_status_name(AssessStatus s);

// Vehicle and fit limits. Defaults follow the lander tolerances: 10 deg tilt,
// 30 cm hazard height, 10 m^2 reference area.
struct AssessConfig {
  Eigen::Vector3d gravity_axis{0.0, 0.0, 1.0};  // unit vector
  double slope_max_deg = 10.0;
  double roughness_max_m = 0.3;
  double area_min_m2 = 10.0;
  int n_min = 20;
  RoughnessAggregate roughness_aggregate = RoughnessAggregate::max;

  void validate() const;
};

// Least-squares plane a*x + b*y + c*z = 1 fitted in the conditioned frame:
// the cloud is translated along gravity_axis so its centroid sits at +10 m
// before the solve. The "= 1" form cannot represent planes through the
// origin and is ill-conditioned near them; the translation removes the
// singularity while leaving slope and point distances unchanged.
struct PlaneFit {
  double a = 0.0, b = 0.0, c = 0.0;
  double conditioning_offset = 0.0;  // shift applied along gravity_axis
  double condition_number = 0.0;     // of G^T G
  int n_points = 0;

  /// Normal direction with non-negative component along gravity.
  Eigen::Vector3d unit_normal(const Eigen::Vector3d& gravity_axis) const;
};

struct SiteAssessment {
  CandidateRegion region;
  double area_m2 = 0.0;
  double slope_deg = 0.0;
  double roughness_m = 0.0;
  double cost = 0.0;
  AssessStatus status = AssessStatus::insufficient_points;
  bool safe = false;
  int n_points = 0;
  int rank = 0;  // assigned by rank_sites, 1-based
};

/// Least squares on G p = d with d all ones, solved after the conditioning
/// translation by an orthogonal decomposition (no explicit normal-equations
/// inverse). Throws Error(insufficient_points) when n < cfg.n_min and
/// Error(degenerate_fit) when cond(G^T G) > 1e8 (e.g. collinear points).
PlaneFit fit_plane(const ROICloud& roi, const AssessConfig& cfg);

// Angle between the fitted normal and the gravity axis, in degrees:
//   beta = acos(|p.g| / (||p|| ||g||)), in [0, 90].
double slope_angle(const PlaneFit& fit, const AssessConfig& cfg);

// Per-point orthogonal distance |a x + b y + c z - 1| / sqrt(a^2+b^2+c^2)
// over the conditioned points, aggregated per cfg.roughness_aggregate.
double roughness(const ROICloud& roi, const PlaneFit& fit, const AssessConfig& cfg);

// J = area_min/area + slope/slope_max + roughness/roughness_max.
// Lower is better; (area_min, slope_max, roughness_max) scores exactly 3.
double cost(double area_m2, double slope_deg, double roughness_m,
            const AssessConfig& cfg);

/// fit -> slope -> roughness -> cost; fit failures land in `status` instead
/// of propagating. Sites over the slope/roughness limits stay ranked but are
/// flagged unsafe.
SiteAssessment assess_site(const CandidateRegion& region, const ROICloud& roi,
                           const AssessConfig& cfg);

/// Assessed sites by cost ascending (ties: area descending, then (y, x)
/// ascending); non-assessed sites appended after in input order. Assigns
/// 1-based ranks.
std::vector<SiteAssessment> rank_sites(std::vector<SiteAssessment> assessments);

}  // namespace hda

#endif
