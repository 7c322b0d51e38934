#ifndef HDA_HAZARD_MAP_HPP
#define HDA_HAZARD_MAP_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hda/errors.hpp"

namespace hda {

enum class HazardClass { rock, crater, shadow };

const char* hazard_class_name(HazardClass c);
HazardClass hazard_class_from_name(const std::string& name);

struct Detection {
  HazardClass cls = HazardClass::rock;
  double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;  // pixels
  double score = 1.0;
};

// Row-major binary grid, 1 = hazard, 0 = free.
struct HazardMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  static HazardMask zeros(int w, int h);

  std::uint8_t at(int x, int y) const {
    return bits[static_cast<std::size_t>(y) * width + x];
  }
  void set(int x, int y, std::uint8_t v) {
    bits[static_cast<std::size_t>(y) * width + x] = v;
  }
  std::size_t hazard_count() const;
};

enum class LeafKind { free_space, hazard, mixed };

// Axis-aligned square node of the decomposition, in padded-image pixels.
struct QuadLeaf {
  int x = 0, y = 0, side = 0;
  LeafKind kind = LeafKind::free_space;
};

struct CandidateRegion {
  int x = 0, y = 0;  // top-left pixel
  int side = 0;
  Eigen::Vector2d center{0.0, 0.0};
  long long area_px = 0;
  double area_m2 = 0.0;
};

// Meters-per-pixel at a pixel location. The pipeline wires this to
// ground_resolution at the descent geometry; tests pass constants.
using PixelScaleFn = std::function<double(double u, double v)>;

/// Reads a UTF-8 JSON array of {"class","bbox":[x0,y0,x1,y1],"score"} records.
/// Throws Error(parse_error) with a line number on malformed input and
/// Error(bounds_error) when a bbox is degenerate or leaves the image.
std::vector<Detection> load_detections(const std::string& path, int width, int height);

/// Rasterizes detections with score >= score_threshold, each bbox dilated by
/// margin_px and clamped to the image. A pixel is hazard when its (integer)
/// center lies in [x_min - margin, x_max + margin) x [y_min - ..., y_max + ...).
HazardMask build_mask(const std::vector<Detection>& detections, int width, int height,
                      double margin_px, double score_threshold);

// Recursive 4-way split of the mask padded (right/bottom, as hazard) to the
// next power of two. A node is a leaf when uniformly free, uniformly hazard,
// or side <= min_leaf_px. Occupancy tests run on a summed-area table, O(1)
// per node.
std::vector<QuadLeaf> quadtree_decompose(const HazardMask& mask, int min_leaf_px);

/// Free leaves with side >= required_px, as candidate regions with the ground
/// area taken from the pixel scale at the region center. Sorted by side
/// descending, ties by (y, x) ascending.
std::vector<CandidateRegion> extract_candidates(const std::vector<QuadLeaf>& leaves,
                                                int required_px,
                                                const PixelScaleFn& scale);

}  // namespace hda

#endif
