#include "hda/scene_io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <Eigen/Geometry>

#include "json.hpp"

namespace hda {

using nlohmann::json;

namespace {

// Shortest round-trip decimal form, so written values re-read bit-exact.
std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) raise(Errc::io_error, "cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) raise(Errc::io_error, "cannot read " + path);
  return in;
}

// Next PNM header token, skipping whitespace and '#' comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {}
    } else if (!std::isspace(ch)) {
      tok.push_back(static_cast<char>(ch));
      while ((ch = in.peek()) != EOF && !std::isspace(ch)) tok.push_back(static_cast<char>(in.get()));
      return tok;
    }
  }
  return tok;
}

}  // namespace

RgbImage RgbImage::filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  RgbImage img;
  img.width = w;
  img.height = h;
  img.rgb.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
    img.rgb[i] = r;
    img.rgb[i + 1] = g;
    img.rgb[i + 2] = b;
  }
  return img;
}

void RgbImage::set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  rgb[i] = r;
  rgb[i + 1] = g;
  rgb[i + 2] = b;
}

void write_pgm(const std::string& path, const HazardMask& mask) {
  std::ofstream out = open_out(path, true);
  out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
  std::vector<std::uint8_t> row(mask.width);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) row[x] = mask.at(x, y) ? 255 : 0;
    out.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
  if (!out) raise(Errc::io_error, "short write: " + path);
}

HazardMask read_pgm(const std::string& path) {
  std::ifstream in = open_in(path, true);
  if (pnm_token(in) != "P5") raise(Errc::parse_error, path + ": not a binary PGM (P5)");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(pnm_token(in));
    h = std::stoi(pnm_token(in));
    maxval = std::stoi(pnm_token(in));
  } catch (const std::exception&) {
    raise(Errc::parse_error, path + ": malformed PGM header");
  }
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
    raise(Errc::parse_error, path + ": unsupported PGM geometry");
  in.get();  // single whitespace after maxval
  HazardMask mask = HazardMask::zeros(w, h);
  std::vector<std::uint8_t> row(w);
  for (int y = 0; y < h; ++y) {
    in.read(reinterpret_cast<char*>(row.data()), w);
    if (!in) raise(Errc::parse_error, path + ": truncated PGM payload");
    for (int x = 0; x < w; ++x) mask.set(x, y, row[x] >= (maxval + 1) / 2 ? 1 : 0);
  }
  return mask;
}

void write_ppm(const std::string& path, const RgbImage& image) {
  std::ofstream out = open_out(path, true);
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.rgb.data()), image.rgb.size());
  if (!out) raise(Errc::io_error, "short write: " + path);
}

void write_ply(const std::string& path, const PointCloud& cloud) {
  std::ofstream out = open_out(path);
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << cloud.points.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  out << "property double reproj_err\nend_header\n";
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const auto& p = cloud.points[i];
    out << fmt(p.x()) << " " << fmt(p.y()) << " " << fmt(p.z()) << " "
        << fmt(cloud.reproj_error[i]) << "\n";
  }
  if (!out) raise(Errc::io_error, "short write: " + path);
}

PointCloud read_ply(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  std::size_t count = 0;
  bool header_done = false;
  while (std::getline(in, line)) {
    if (line.rfind("element vertex", 0) == 0)
      count = std::stoull(line.substr(15));
    if (line == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) raise(Errc::parse_error, path + ": missing PLY header");
  PointCloud cloud;
  cloud.points.reserve(count);
  cloud.reproj_error.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    double x, y, z, err;
    if (!(in >> x >> y >> z >> err))
      raise(Errc::parse_error, path + ": truncated vertex list");
    cloud.points.emplace_back(x, y, z);
    cloud.reproj_error.push_back(err);
  }
  return cloud;
}

void write_dem(const std::string& path, const Dem& dem) {
  std::ofstream out = open_out(path);
  out << "ncols " << dem.ncols << "\n";
  out << "nrows " << dem.nrows << "\n";
  out << "cellsize " << fmt(dem.cellsize) << "\n";
  out << "origin " << fmt(dem.origin.x()) << " " << fmt(dem.origin.y()) << "\n";
  for (int r = 0; r < dem.nrows; ++r) {
    for (int c = 0; c < dem.ncols; ++c) {
      if (c) out << " ";
      out << fmt(dem.at(r, c));
    }
    out << "\n";
  }
  if (!out) raise(Errc::io_error, "short write: " + path);
}

Dem read_dem(const std::string& path) {
  std::ifstream in = open_in(path);
  Dem dem;
  std::string key;
  for (int i = 0; i < 4; ++i) {
    if (!(in >> key)) raise(Errc::parse_error, path + ": truncated DEM header");
    if (key == "ncols") in >> dem.ncols;
    else if (key == "nrows") in >> dem.nrows;
    else if (key == "cellsize") in >> dem.cellsize;
    else if (key == "origin") in >> dem.origin.x() >> dem.origin.y();
    else raise(Errc::parse_error, path + ": unknown DEM header key \"" + key + "\"");
  }
  if (!in || dem.ncols < 2 || dem.nrows < 2 || !(dem.cellsize > 0.0))
    raise(Errc::parse_error, path + ": invalid DEM header");
  dem.heights.resize(static_cast<std::size_t>(dem.nrows) * dem.ncols);
  for (double& h : dem.heights)
    if (!(in >> h)) raise(Errc::parse_error, path + ": truncated DEM payload");
  return dem;
}

void write_detections(const std::string& path, const std::vector<Detection>& detections) {
  json arr = json::array();
  for (const Detection& d : detections) {
    arr.push_back({{"class", hazard_class_name(d.cls)},
                   {"bbox", {d.x_min, d.y_min, d.x_max, d.y_max}},
                   {"score", d.score}});
  }
  std::ofstream out = open_out(path);
  out << arr.dump(2) << "\n";
  if (!out) raise(Errc::io_error, "short write: " + path);
}

void write_correspondences(const std::string& path,
                           const std::vector<Correspondence>& matches) {
  std::ofstream out = open_out(path);
  out << "ua,va,ub,vb\n";
  for (const Correspondence& c : matches) {
    out << fmt(c.pixel_a.x()) << "," << fmt(c.pixel_a.y()) << ","
        << fmt(c.pixel_b.x()) << "," << fmt(c.pixel_b.y()) << "\n";
  }
  if (!out) raise(Errc::io_error, "short write: " + path);
}

std::vector<Correspondence> read_correspondences(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != "ua,va,ub,vb")
    raise(Errc::parse_error, path + ":1: expected header \"ua,va,ub,vb\"");
  std::vector<Correspondence> matches;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Correspondence c;
    double* fields[4] = {&c.pixel_a.x(), &c.pixel_a.y(), &c.pixel_b.x(), &c.pixel_b.y()};
    std::size_t pos = 0;
    for (int i = 0; i < 4; ++i) {
      const std::size_t next = i < 3 ? line.find(',', pos) : line.size();
      if (next == std::string::npos)
        raise(Errc::parse_error, path + ":" + std::to_string(line_no) + ": expected 4 fields");
      const auto res = std::from_chars(line.data() + pos, line.data() + next, *fields[i]);
      if (res.ec != std::errc() || res.ptr != line.data() + next)
        raise(Errc::parse_error, path + ":" + std::to_string(line_no) + ": bad number");
      pos = next + 1;
    }
    matches.push_back(c);
  }
  return matches;
}

namespace {

json pose_to_json(const Pose& pose) {
  const Eigen::Vector3d pos = pose.center();
  Eigen::Quaterniond q(pose.rotation);
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();  // canonical sign
  return {{"position", {pos.x(), pos.y(), pos.z()}},
          {"quaternion", {q.w(), q.x(), q.y(), q.z()}}};
}

Pose pose_from_json(const json& j) {
  const auto& p = j.at("position");
  const auto& q = j.at("quaternion");
  Eigen::Quaterniond quat(q.at(0).get<double>(), q.at(1).get<double>(),
                          q.at(2).get<double>(), q.at(3).get<double>());
  quat.normalize();
  Pose pose;
  pose.rotation = quat.toRotationMatrix();
  const Eigen::Vector3d pos(p.at(0).get<double>(), p.at(1).get<double>(),
                            p.at(2).get<double>());
  pose.translation = -pose.rotation * pos;
  return pose;
}

}  // namespace

void write_scene_manifest(const std::string& path, const SceneManifest& manifest) {
  json j;
  j["dem_path"] = manifest.dem_path;
  j["rocks"] = json::array();
  for (const RockSpec& r : manifest.hazards.rocks)
    j["rocks"].push_back({{"x", r.center.x()},
                          {"y", r.center.y()},
                          {"diameter", r.diameter},
                          {"height", r.height}});
  j["craters"] = json::array();
  for (const CraterSpec& c : manifest.hazards.craters)
    j["craters"].push_back({{"x", c.center.x()},
                            {"y", c.center.y()},
                            {"diameter", c.diameter},
                            {"depth", c.depth}});
  j["poses"] = json::array();
  for (const Pose& pose : manifest.poses) j["poses"].push_back(pose_to_json(pose));
  j["seed"] = manifest.seed;

  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
  if (!out) raise(Errc::io_error, "short write: " + path);
}

SceneManifest read_scene_manifest(const std::string& path) {
  std::ifstream in = open_in(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    raise(Errc::parse_error, path + ": " + e.what());
  }
  SceneManifest m;
  try {
    m.dem_path = j.at("dem_path").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const json& r : j.at("rocks")) {
      RockSpec rock;
      rock.center = {r.at("x").get<double>(), r.at("y").get<double>()};
      rock.diameter = r.at("diameter").get<double>();
      rock.height = r.at("height").get<double>();
      m.hazards.rocks.push_back(rock);
    }
    for (const json& c : j.at("craters")) {
      CraterSpec crater;
      crater.center = {c.at("x").get<double>(), c.at("y").get<double>()};
      crater.diameter = c.at("diameter").get<double>();
      crater.depth = c.at("depth").get<double>();
      m.hazards.craters.push_back(crater);
    }
    for (const json& p : j.at("poses")) m.poses.push_back(pose_from_json(p));
  } catch (const json::exception& e) {
    raise(Errc::parse_error, path + ": " + e.what());
  }
  return m;
}

std::string resolve_relative(const std::string& manifest_path,
                             const std::string& relative) {
  const std::filesystem::path rel(relative);
  if (rel.is_absolute()) return relative;
  return (std::filesystem::path(manifest_path).parent_path() / rel).string();
}

}  // namespace hda
