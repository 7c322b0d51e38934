#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "hda/scene_io.hpp"
#include "hda/synth.hpp"
#include "test_support.hpp"

using namespace hda;
using test::thrown_code;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("PGM masks round-trip bit-exact") {
  std::mt19937 rng(13001);
  HazardMask mask = HazardMask::zeros(97, 41);  // odd sizes on purpose
  for (auto& b : mask.bits) b = rng() % 3 == 0 ? 1 : 0;
  const std::string path = "/tmp/hda_io_mask.pgm";
  write_pgm(path, mask);
  const HazardMask back = read_pgm(path);
  CHECK(back.width == mask.width);
  CHECK(back.height == mask.height);
  CHECK(back.bits == mask.bits);

  const std::string raw = slurp(path);
  CHECK(raw.rfind("P5\n97 41\n255\n", 0) == 0);
}

TEST_CASE("PGM reader skips comments and rejects other formats") {
  const std::string path = "/tmp/hda_io_comment.pgm";
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n# a comment\n2 2\n255\n";
    const unsigned char px[4] = {255, 0, 0, 255};
    out.write(reinterpret_cast<const char*>(px), 4);
  }
  const HazardMask mask = read_pgm(path);
  CHECK(mask.at(0, 0) == 1);
  CHECK(mask.at(1, 0) == 0);
  CHECK(mask.at(1, 1) == 1);

  const std::string bad = "/tmp/hda_io_bad.pgm";
  {
    std::ofstream out(bad, std::ios::binary);
    out << "P2\n2 2\n255\n1 2 3 4\n";
  }
  CHECK(thrown_code([&] { read_pgm(bad); }) == Errc::parse_error);
}

TEST_CASE("PPM header and payload size are consistent") {
  RgbImage img = RgbImage::filled(31, 17, 10, 20, 30);
  img.set(5, 5, 255, 0, 0);
  const std::string path = "/tmp/hda_io_overlay.ppm";
  write_ppm(path, img);
  const std::string raw = slurp(path);
  const std::string header = "P6\n31 17\n255\n";
  REQUIRE(raw.rfind(header, 0) == 0);
  CHECK(raw.size() == header.size() + 31u * 17u * 3u);
}

TEST_CASE("PLY point clouds round-trip bit-exact") {
  std::mt19937 rng(13002);
  std::uniform_real_distribution<double> coord(-100.0, 100.0);
  PointCloud cloud;
  for (int i = 0; i < 57; ++i) {
    cloud.points.emplace_back(coord(rng), coord(rng), coord(rng) * 0.01);
    cloud.reproj_error.push_back(std::abs(coord(rng)) * 0.001);
  }
  const std::string path = "/tmp/hda_io_cloud.ply";
  write_ply(path, cloud);
  const PointCloud back = read_ply(path);
  REQUIRE(back.size() == cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(back.points[i] == cloud.points[i]);
    CHECK(back.reproj_error[i] == cloud.reproj_error[i]);
  }

  const std::string raw = slurp(path);
  CHECK(raw.find("element vertex 57") != std::string::npos);
  CHECK(raw.find("property double reproj_err") != std::string::npos);
}

TEST_CASE("DEM grids round-trip bit-exact") {
  const Dem dem = generate_dem(48, 32, 0.5, 2.5, 40.0, 77);
  const std::string path = "/tmp/hda_io_dem.asc";
  write_dem(path, dem);
  const Dem back = read_dem(path);
  CHECK(back.ncols == dem.ncols);
  CHECK(back.nrows == dem.nrows);
  CHECK(back.cellsize == dem.cellsize);
  CHECK(back.origin == dem.origin);
  CHECK(back.heights == dem.heights);

  std::ifstream in(path);
  std::string l1, l2;
  std::getline(in, l1);
  std::getline(in, l2);
  CHECK(l1 == "ncols 48");
  CHECK(l2 == "nrows 32");
}

TEST_CASE("DEM reader rejects malformed headers") {
  const std::string path = "/tmp/hda_io_dem_bad.asc";
  {
    std::ofstream out(path);
    out << "ncols 4\nnrows 4\nwidth 2\norigin 0 0\n";
  }
  CHECK(thrown_code([&] { read_dem(path); }) == Errc::parse_error);

  const std::string truncated = "/tmp/hda_io_dem_trunc.asc";
  {
    std::ofstream out(truncated);
    out << "ncols 4\nnrows 4\ncellsize 1\norigin 0 0\n1 2 3\n";
  }
  CHECK(thrown_code([&] { read_dem(truncated); }) == Errc::parse_error);
}

TEST_CASE("detections written by the simulator load back unchanged") {
  std::vector<Detection> detections;
  Detection d;
  d.cls = HazardClass::crater;
  d.x_min = 10.25;
  d.y_min = 20.5;
  d.x_max = 30.75;
  d.y_max = 44.125;
  d.score = 0.625;
  detections.push_back(d);
  d.cls = HazardClass::shadow;
  d.x_min = 0.0;
  d.y_min = 0.0;
  d.x_max = 64.0;
  d.y_max = 64.0;
  d.score = 1.0;
  detections.push_back(d);

  const std::string path = "/tmp/hda_io_detections.json";
  write_detections(path, detections);
  const auto back = load_detections(path, 64, 64);
  REQUIRE(back.size() == 2);
  CHECK(back[0].cls == HazardClass::crater);
  CHECK(back[0].x_min == 10.25);
  CHECK(back[0].score == 0.625);
  CHECK(back[1].cls == HazardClass::shadow);
  CHECK(back[1].x_max == 64.0);
}

TEST_CASE("correspondences round-trip bit-exact through CSV") {
  std::mt19937 rng(13003);
  std::uniform_real_distribution<double> px(0.0, 2592.0);
  std::vector<Correspondence> matches;
  for (int i = 0; i < 83; ++i)
    matches.push_back({{px(rng), px(rng)}, {px(rng), px(rng)}});
  const std::string path = "/tmp/hda_io_matches.csv";
  write_correspondences(path, matches);
  const auto back = read_correspondences(path);
  REQUIRE(back.size() == matches.size());
  for (std::size_t i = 0; i < matches.size(); ++i) {
    CHECK(back[i].pixel_a == matches[i].pixel_a);
    CHECK(back[i].pixel_b == matches[i].pixel_b);
  }
}

TEST_CASE("correspondence reader reports header and field errors with lines") {
  const std::string bad_header = "/tmp/hda_io_matches_h.csv";
  {
    std::ofstream out(bad_header);
    out << "ua,va,ub\n1,2,3\n";
  }
  CHECK(thrown_code([&] { read_correspondences(bad_header); }) == Errc::parse_error);

  const std::string bad_row = "/tmp/hda_io_matches_r.csv";
  {
    std::ofstream out(bad_row);
    out << "ua,va,ub,vb\n1,2,3,4\n1,2,x,4\n";
  }
  try {
    read_correspondences(bad_row);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::parse_error);
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
}

TEST_CASE("scene manifests round-trip hazards, poses, and seed") {
  Scene scene;
  scene.seed = 987654321;
  scene.hazards.rocks.push_back({{1.5, -2.5}, 2.0, 0.5});
  scene.hazards.rocks.push_back({{-40.0, 13.0}, 0.9, 0.225});
  scene.hazards.craters.push_back({{10.0, 10.0}, 3.0, 0.6});
  scene.poses = descent_poses(DescentParams{}, 45.0);

  const std::string path = "/tmp/hda_io_scene.json";
  write_scene_manifest(path, {"dem.asc", scene.hazards, scene.poses, scene.seed});
  const SceneManifest back = read_scene_manifest(path);
  CHECK(back.dem_path == "dem.asc");
  CHECK(back.seed == scene.seed);
  REQUIRE(back.hazards.rocks.size() == 2);
  REQUIRE(back.hazards.craters.size() == 1);
  CHECK(back.hazards.rocks[0].center == scene.hazards.rocks[0].center);
  CHECK(back.hazards.craters[0].depth == 0.6);

  REQUIRE(back.poses.size() == scene.poses.size());
  for (std::size_t i = 0; i < back.poses.size(); ++i) {
    back.poses[i].validate();  // orthonormal after the quaternion round-trip
    CHECK((back.poses[i].rotation - scene.poses[i].rotation).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK((back.poses[i].center() - scene.poses[i].center()).norm() < 1e-9);
  }
}

TEST_CASE("manifest-relative paths resolve against the manifest directory") {
  CHECK(resolve_relative("/data/run1/scene.json", "dem.asc") == "/data/run1/dem.asc");
  CHECK(resolve_relative("/data/run1/scene.json", "/abs/dem.asc") == "/abs/dem.asc");
  CHECK(resolve_relative("scene.json", "dem.asc") == "dem.asc");
}

TEST_CASE("missing files raise IoError") {
  CHECK(thrown_code([] { read_pgm("/tmp/hda_nope.pgm"); }) == Errc::io_error);
  CHECK(thrown_code([] { read_dem("/tmp/hda_nope.asc"); }) == Errc::io_error);
  CHECK(thrown_code([] { read_ply("/tmp/hda_nope.ply"); }) == Errc::io_error);
  CHECK(thrown_code([] { read_correspondences("/tmp/hda_nope.csv"); }) ==
        Errc::io_error);
  CHECK(thrown_code([] { read_scene_manifest("/tmp/hda_nope.json"); }) ==
        Errc::io_error);
}
