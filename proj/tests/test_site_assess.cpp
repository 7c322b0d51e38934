#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "hda/site_assess.hpp"
#include "test_support.hpp"

using namespace hda;
using test::thrown_code;

namespace {

constexpr double kTan10 = 0.17632698070846498;  // tan(10 deg)

ROICloud roi_from_points(std::vector<Eigen::Vector3d> points) {
  ROICloud roi;
  roi.region.side = 64;
  roi.cloud.points = std::move(points);
  roi.cloud.reproj_error.assign(roi.cloud.points.size(), 0.0);
  return roi;
}

// Grid of points on the plane z = gx * x + gy * y + z0.
std::vector<Eigen::Vector3d> plane_grid(double gx, double gy, double z0, int per_side = 7,
                                        double span = 20.0) {
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < per_side; ++i)
    for (int j = 0; j < per_side; ++j) {
      const double x = -span + 2.0 * span * i / (per_side - 1);
      const double y = -span + 2.0 * span * j / (per_side - 1);
      pts.emplace_back(x, y, gx * x + gy * y + z0);
    }
  return pts;
}

// Hand-rolled normal-equations oracle: p = (G^T G)^-1 G^T 1 by Cramer's rule,
// with the same +10 m conditioning translation along gravity.
Eigen::Vector3d normal_equations_oracle(const std::vector<Eigen::Vector3d>& points,
                                        const Eigen::Vector3d& gravity,
                                        double* offset_out = nullptr) {
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= double(points.size());
  const double offset = 10.0 - centroid.dot(gravity);
  if (offset_out) *offset_out = offset;

  double gtg[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  double gtd[3] = {0, 0, 0};
  for (const auto& p : points) {
    const Eigen::Vector3d q = p + offset * gravity;
    const double row[3] = {q.x(), q.y(), q.z()};
    for (int i = 0; i < 3; ++i) {
      gtd[i] += row[i];
      for (int j = 0; j < 3; ++j) gtg[i][j] += row[i] * row[j];
    }
  }
  const auto det3 = [](const double m[3][3]) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  const double det = det3(gtg);
  Eigen::Vector3d solution;
  for (int col = 0; col < 3; ++col) {
    double replaced[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) replaced[i][j] = j == col ? gtd[i] : gtg[i][j];
    solution[col] = det3(replaced) / det;
  }
  return solution;
}

double conditioned_residual(const std::vector<Eigen::Vector3d>& points,
                            const Eigen::Vector3d& gravity, double offset,
                            const Eigen::Vector3d& coeffs) {
  double sum = 0.0;
  for (const auto& p : points) {
    const double r = (p + offset * gravity).dot(coeffs) - 1.0;
    sum += r * r;
  }
  return sum;
}

}  // namespace

TEST_CASE("horizontal plane fits with unit normal (0,0,1)") {
  const AssessConfig cfg;
  const PlaneFit fit = fit_plane(roi_from_points(plane_grid(0.0, 0.0, 1.0)), cfg);
  const Eigen::Vector3d n = fit.unit_normal(cfg.gravity_axis);
  CHECK((n - Eigen::Vector3d(0.0, 0.0, 1.0)).norm() < 1e-9);
  CHECK(fit.n_points == 49);
  CHECK(fit.condition_number > 0.0);
}

TEST_CASE("10-degree plane fits with the constructed normal direction") {
  const AssessConfig cfg;
  // Points on -tan(10) x + z = 1, i.e. z = tan(10) x + 1.
  const PlaneFit fit = fit_plane(roi_from_points(plane_grid(kTan10, 0.0, 1.0)), cfg);
  const Eigen::Vector3d n = fit.unit_normal(cfg.gravity_axis);
  const Eigen::Vector3d expected =
      Eigen::Vector3d(-kTan10, 0.0, 1.0).normalized();
  CHECK((n - expected).norm() < 1e-9);
}

TEST_CASE("noisy fit matches the independent normal-equations oracle") {
  std::mt19937 rng(11001);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::uniform_real_distribution<double> grad(-0.2, 0.2);
  const AssessConfig cfg;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Eigen::Vector3d> pts = plane_grid(grad(rng), grad(rng), 2.0, 15, 25.0);
    for (auto& p : pts) p.z() += noise(rng);
    const PlaneFit fit = fit_plane(roi_from_points(pts), cfg);
    double offset = 0.0;
    const Eigen::Vector3d oracle = normal_equations_oracle(pts, cfg.gravity_axis, &offset);
    CHECK(fit.conditioning_offset == doctest::Approx(offset).epsilon(1e-12));
    CHECK(std::abs(fit.a - oracle.x()) < 1e-9);
    CHECK(std::abs(fit.b - oracle.y()) < 1e-9);
    CHECK(std::abs(fit.c - oracle.z()) < 1e-9);
  }
}

TEST_CASE("fit_plane rejects small and collinear point sets") {
  const AssessConfig cfg;
  CHECK(thrown_code([&] {
          fit_plane(roi_from_points(plane_grid(0.0, 0.0, 1.0, 2, 1.0)), cfg);
        }) == Errc::insufficient_points);

  std::vector<Eigen::Vector3d> line;
  for (int i = 0; i < 30; ++i) line.emplace_back(i * 0.5, 0.0, 1.0);
  CHECK(thrown_code([&] { fit_plane(roi_from_points(line), cfg); }) ==
        Errc::degenerate_fit);
}

TEST_CASE("fitted plane is a least-squares optimum") {
  std::mt19937 rng(11002);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::uniform_real_distribution<double> dir(-1.0, 1.0);
  const AssessConfig cfg;
  std::vector<Eigen::Vector3d> pts = plane_grid(0.05, -0.08, 1.5, 12, 30.0);
  for (auto& p : pts) p.z() += noise(rng);
  const PlaneFit fit = fit_plane(roi_from_points(pts), cfg);
  const Eigen::Vector3d coeffs(fit.a, fit.b, fit.c);
  const double best = conditioned_residual(pts, cfg.gravity_axis,
                                           fit.conditioning_offset, coeffs);
  for (int i = 0; i < 100; ++i) {
    Eigen::Vector3d delta(dir(rng), dir(rng), dir(rng));
    delta = delta.normalized() * 1e-4;
    const double perturbed = conditioned_residual(pts, cfg.gravity_axis,
                                                  fit.conditioning_offset, coeffs + delta);
    CHECK(perturbed >= best);
  }
}

TEST_CASE("slope of a horizontal plane is zero") {
  PlaneFit fit;
  fit.a = 0.0;
  fit.b = 0.0;
  fit.c = 1.0;
  CHECK(slope_angle(fit, AssessConfig{}) == doctest::Approx(0.0));
}

TEST_CASE("slope of the 10-degree construction is exactly 10 degrees") {
  PlaneFit fit;
  fit.a = -kTan10;
  fit.b = 0.0;
  fit.c = 1.0;
  CHECK(slope_angle(fit, AssessConfig{}) == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("fitted sample region slope lands near the reported 2.3 degrees") {
  const AssessConfig cfg;
  const double grad = std::tan(2.3 * std::numbers::pi / 180.0);
  const PlaneFit fit = fit_plane(roi_from_points(plane_grid(grad, 0.0, 1.0)), cfg);
  CHECK(slope_angle(fit, cfg) == doctest::Approx(2.3).epsilon(1e-6));
}

TEST_CASE("slope is scale invariant and bounded to [0, 90]") {
  std::mt19937 rng(11003);
  std::uniform_real_distribution<double> coeff(-5.0, 5.0);
  std::uniform_real_distribution<double> scale(-40.0, 40.0);
  const AssessConfig cfg;
  for (int i = 0; i < 300; ++i) {
    PlaneFit fit;
    fit.a = coeff(rng);
    fit.b = coeff(rng);
    fit.c = coeff(rng);
    if (std::abs(fit.a) + std::abs(fit.b) + std::abs(fit.c) < 1e-6) continue;
    const double beta = slope_angle(fit, cfg);
    CHECK(beta >= 0.0);
    CHECK(beta <= 90.0);
    double k = scale(rng);
    if (std::abs(k) < 1e-3) k = 2.0;
    PlaneFit scaled = fit;
    scaled.a *= k;
    scaled.b *= k;
    scaled.c *= k;
    CHECK(slope_angle(scaled, cfg) == doctest::Approx(beta).epsilon(1e-9));
  }
}

TEST_CASE("points on the fitted plane have zero roughness") {
  const AssessConfig cfg;
  const ROICloud roi = roi_from_points(plane_grid(0.03, -0.02, 1.0));
  const PlaneFit fit = fit_plane(roi, cfg);
  CHECK(roughness(roi, fit, cfg) < 1e-10);
}

TEST_CASE("single 0.3 m protrusion over a horizontal plane has max roughness 0.3") {
  const AssessConfig cfg;
  const ROICloud base = roi_from_points(plane_grid(0.0, 0.0, 1.0));
  const PlaneFit fit = fit_plane(base, cfg);

  ROICloud bumped = base;
  bumped.cloud.points.emplace_back(0.5, 0.5, 1.3);
  bumped.cloud.reproj_error.push_back(0.0);
  CHECK(roughness(bumped, fit, cfg) == doctest::Approx(0.3).epsilon(1e-9));

  AssessConfig rms_cfg;
  rms_cfg.roughness_aggregate = RoughnessAggregate::rms;
  const double rms = roughness(bumped, fit, rms_cfg);
  CHECK(rms == doctest::Approx(0.3 / std::sqrt(50.0)).epsilon(1e-9));
}

TEST_CASE("rms roughness of sigma-noise points tracks sigma over 30 seeds") {
  AssessConfig cfg;
  cfg.roughness_aggregate = RoughnessAggregate::rms;
  const double sigma = 0.05;
  double total_ratio = 0.0;
  for (int seed = 0; seed < 30; ++seed) {
    std::mt19937 rng(12000 + seed);
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<Eigen::Vector3d> pts = plane_grid(0.02, 0.01, 1.0, 17, 20.0);
    for (auto& p : pts) p.z() += noise(rng);
    const ROICloud roi = roi_from_points(pts);
    const PlaneFit fit = fit_plane(roi, cfg);
    total_ratio += roughness(roi, fit, cfg) / sigma;
  }
  const double mean_ratio = total_ratio / 30.0;
  CHECK(mean_ratio > 0.85);
  CHECK(mean_ratio < 1.15);
}

TEST_CASE("slope and roughness are invariant to translation along gravity") {
  std::mt19937 rng(11004);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::uniform_real_distribution<double> shift(-200.0, 200.0);
  const AssessConfig cfg;
  std::vector<Eigen::Vector3d> pts = plane_grid(0.1, -0.05, 3.0, 10, 15.0);
  for (auto& p : pts) p.z() += noise(rng);
  const ROICloud roi = roi_from_points(pts);
  const PlaneFit fit = fit_plane(roi, cfg);
  const double slope0 = slope_angle(fit, cfg);
  const double rough0 = roughness(roi, fit, cfg);

  for (int i = 0; i < 10; ++i) {
    const double dz = shift(rng);
    std::vector<Eigen::Vector3d> moved = pts;
    for (auto& p : moved) p += dz * cfg.gravity_axis;
    const ROICloud roi_moved = roi_from_points(moved);
    const PlaneFit fit_moved = fit_plane(roi_moved, cfg);
    CHECK(slope_angle(fit_moved, cfg) == doctest::Approx(slope0).epsilon(1e-9));
    CHECK(roughness(roi_moved, fit_moved, cfg) == doctest::Approx(rough0).epsilon(1e-9));
  }
}

TEST_CASE("cost hits the boundary value 3 exactly") {
  CHECK(cost(10.0, 10.0, 0.3, AssessConfig{}) == 3.0);
}

TEST_CASE("cost approaches zero in the ideal limit") {
  CHECK(cost(1e12, 0.0, 0.0, AssessConfig{}) < 1e-10);
}

TEST_CASE("cost hand evaluation at (20 m^2, 2.3 deg, 0.1 m)") {
  CHECK(cost(20.0, 2.3, 0.1, AssessConfig{}) ==
        doctest::Approx(1.0633333333333335).epsilon(1e-12));
}

TEST_CASE("cost is strictly monotone in each argument") {
  std::mt19937 rng(11005);
  std::uniform_real_distribution<double> area(1.0, 500.0);
  std::uniform_real_distribution<double> slope(0.0, 40.0);
  std::uniform_real_distribution<double> rough(0.0, 1.0);
  const AssessConfig cfg;
  for (int i = 0; i < 200; ++i) {
    const double a = area(rng), s = slope(rng), r = rough(rng);
    const double j = cost(a, s, r, cfg);
    CHECK(cost(a * 1.1, s, r, cfg) < j);
    CHECK(cost(a, s + 0.5, r, cfg) > j);
    CHECK(cost(a, s, r + 0.05, cfg) > j);
  }
  CHECK(thrown_code([&] { cost(0.0, 1.0, 0.1, cfg); }) == Errc::bounds_error);
}

TEST_CASE("assess_site on a flat region") {
  AssessConfig cfg;
  CandidateRegion region;
  region.x = 0;
  region.y = 0;
  region.side = 64;
  region.area_m2 = 400.0;
  ROICloud roi = roi_from_points(plane_grid(0.0, 0.0, 0.5));
  roi.region = region;
  const SiteAssessment site = assess_site(region, roi, cfg);
  CHECK(site.status == AssessStatus::assessed);
  CHECK(site.slope_deg == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(site.roughness_m < 1e-9);
  CHECK(site.cost == doctest::Approx(10.0 / 400.0).epsilon(1e-9));
  CHECK(site.safe);
}

TEST_CASE("assess_site flags starved regions as insufficient_points") {
  CandidateRegion region;
  region.area_m2 = 100.0;
  ROICloud roi = roi_from_points({{0, 0, 1}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1}, {2, 2, 1}});
  const SiteAssessment site = assess_site(region, roi, AssessConfig{});
  CHECK(site.status == AssessStatus::insufficient_points);
  CHECK_FALSE(site.safe);
  CHECK(site.n_points == 5);
  CHECK(std::isnan(site.cost));
}

TEST_CASE("assess_site equals the composition of the individual operations") {
  std::mt19937 rng(11006);
  std::normal_distribution<double> noise(0.0, 0.08);
  AssessConfig cfg;
  CandidateRegion region;
  region.area_m2 = 900.0;
  std::vector<Eigen::Vector3d> pts = plane_grid(0.07, 0.03, 2.0, 11, 18.0);
  for (auto& p : pts) p.z() += noise(rng);
  ROICloud roi = roi_from_points(pts);
  roi.region = region;

  const SiteAssessment site = assess_site(region, roi, cfg);
  const PlaneFit fit = fit_plane(roi, cfg);
  const double expected_slope = slope_angle(fit, cfg);
  const double expected_rough = roughness(roi, fit, cfg);
  CHECK(site.slope_deg == doctest::Approx(expected_slope).epsilon(1e-12));
  CHECK(site.roughness_m == doctest::Approx(expected_rough).epsilon(1e-12));
  CHECK(site.cost ==
        doctest::Approx(cost(900.0, expected_slope, expected_rough, cfg)).epsilon(1e-12));
}

TEST_CASE("unsafe sites stay ranked but flagged") {
  AssessConfig cfg;
  CandidateRegion region;
  region.area_m2 = 2000.0;
  ROICloud roi = roi_from_points(plane_grid(std::tan(0.3), 0.0, 1.0));  // ~16.7 deg
  const SiteAssessment site = assess_site(region, roi, cfg);
  CHECK(site.status == AssessStatus::assessed);
  CHECK_FALSE(site.safe);
  CHECK(site.slope_deg > cfg.slope_max_deg);
  CHECK(site.cost > 0.0);
}

namespace {

SiteAssessment stub_site(double cost_value, double area, int x, int y,
                         AssessStatus status = AssessStatus::assessed) {
  SiteAssessment s;
  s.status = status;
  s.cost = cost_value;
  s.area_m2 = area;
  s.region.x = x;
  s.region.y = y;
  s.region.side = 32;
  return s;
}

}  // namespace

TEST_CASE("single site ranks as itself") {
  const auto ranked = rank_sites({stub_site(1.0, 50.0, 0, 0)});
  REQUIRE(ranked.size() == 1);
  CHECK(ranked[0].rank == 1);
}

TEST_CASE("larger area wins when only area differs") {
  AssessConfig cfg;
  SiteAssessment small = stub_site(0.0, 50.0, 0, 0);
  SiteAssessment large = stub_site(0.0, 200.0, 10, 10);
  small.cost = cost(small.area_m2, 1.0, 0.1, cfg);
  large.cost = cost(large.area_m2, 1.0, 0.1, cfg);
  const auto ranked = rank_sites({small, large});
  CHECK(ranked[0].area_m2 == 200.0);
  CHECK(ranked[0].rank == 1);
  CHECK(ranked[1].rank == 2);
}

TEST_CASE("ranking matches a brute-force comparison-sort oracle") {
  std::mt19937 rng(11007);
  std::uniform_real_distribution<double> cost_d(0.0, 5.0);
  std::uniform_real_distribution<double> area_d(10.0, 500.0);
  std::vector<SiteAssessment> sites;
  for (int i = 0; i < 10; ++i)
    sites.push_back(stub_site(cost_d(rng), area_d(rng), int(rng() % 100),
                              int(rng() % 100)));
  sites.push_back(stub_site(0.0, 0.0, 5, 5, AssessStatus::insufficient_points));
  sites.push_back(stub_site(0.0, 0.0, 6, 6, AssessStatus::degenerate_fit));

  const auto ranked = rank_sites(sites);

  // Oracle: repeated minimum extraction with the documented order.
  const auto before = [](const SiteAssessment& a, const SiteAssessment& b) {
    const bool a_ok = a.status == AssessStatus::assessed;
    const bool b_ok = b.status == AssessStatus::assessed;
    if (a_ok != b_ok) return a_ok;
    if (!a_ok) return false;
    if (a.cost != b.cost) return a.cost < b.cost;
    if (a.area_m2 != b.area_m2) return a.area_m2 > b.area_m2;
    if (a.region.y != b.region.y) return a.region.y < b.region.y;
    return a.region.x < b.region.x;
  };
  std::vector<SiteAssessment> pool = sites;
  std::vector<SiteAssessment> expected;
  while (!pool.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pool.size(); ++i)
      if (before(pool[i], pool[best])) best = i;
    expected.push_back(pool[best]);
    pool.erase(pool.begin() + best);
  }

  REQUIRE(ranked.size() == expected.size());
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    CHECK(ranked[i].region.x == expected[i].region.x);
    CHECK(ranked[i].region.y == expected[i].region.y);
    CHECK(ranked[i].rank == int(i) + 1);
  }
  // non-assessed sites trail the ranking
  CHECK(ranked[ranked.size() - 2].status != AssessStatus::assessed);
  CHECK(ranked[ranked.size() - 1].status != AssessStatus::assessed);
}
