#ifndef HDA_SCENE_IO_HPP
#define HDA_SCENE_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "hda/camera.hpp"
#include "hda/hazard_map.hpp"
#include "hda/reconstruction.hpp"
#include "hda/synth.hpp"

namespace hda {

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  static RgbImage filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b);
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
};

// Binary PGM (P5), maxval 255; pixel 255 = hazard, 0 = free.
void write_pgm(const std::string& path, const HazardMask& mask);
HazardMask read_pgm(const std::string& path);

// Binary PPM (P6).
void write_ppm(const std::string& path, const RgbImage& image);

// ASCII PLY with per-vertex x, y, z, reproj_err (float64).
void write_ply(const std::string& path, const PointCloud& cloud);
PointCloud read_ply(const std::string& path);

// ASCII grid: "ncols N" / "nrows N" / "cellsize F" / "origin X Y" header,
// then nrows whitespace-separated rows, row 0 first.
void write_dem(const std::string& path, const Dem& dem);
Dem read_dem(const std::string& path);

void write_detections(const std::string& path, const std::vector<Detection>& detections);

// CSV with header "ua,va,ub,vb".
void write_correspondences(const std::string& path,
                           const std::vector<Correspondence>& matches);
std::vector<Correspondence> read_correspondences(const std::string& path);

struct SceneManifest {
  std::string dem_path;  // relative to the manifest file
  HazardSet hazards;
  std::vector<Pose> poses;
  std::uint64_t seed = 0;
};

void write_scene_manifest(const std::string& path, const SceneManifest& manifest);
SceneManifest read_scene_manifest(const std::string& path);

/// Resolves a manifest-relative path against the manifest's directory.
std::string resolve_relative(const std::string& manifest_path,
                             const std::string& relative);

}  // namespace hda

#endif
