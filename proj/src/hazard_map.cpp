#include "hda/hazard_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace hda {

using nlohmann::json;

const char* hazard_class_name(HazardClass c) {
  switch (c) {
    case HazardClass::rock: return "rock";
    case HazardClass::crater: return "crater";
    case HazardClass::shadow: return "shadow";
  }
  return "rock";
}

HazardClass hazard_class_from_name(const std::string& name) {
  if (name == "rock") return HazardClass::rock;
  if (name == "crater") return HazardClass::crater;
  if (name == "shadow") return HazardClass::shadow;
  raise(Errc::parse_error, "unknown hazard class \"" + name + "\"");
}

HazardMask HazardMask::zeros(int w, int h) {
  HazardMask m;
  m.width = w;
  m.height = h;
  m.bits.assign(static_cast<std::size_t>(w) * h, 0);
  return m;
}

std::size_t HazardMask::hazard_count() const {
  std::size_t n = 0;
  for (std::uint8_t b : bits) n += b;
  return n;
}

namespace {

int line_of_offset(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

}  // namespace

std::vector<Detection> load_detections(const std::string& path, int width, int height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io_error, "cannot open detections file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    raise(Errc::parse_error, path + ":" + std::to_string(line_of_offset(text, e.byte)) +
                                 ": " + e.what());
  }
  if (!doc.is_array())
    raise(Errc::parse_error, path + ": top-level value must be an array");

  std::vector<Detection> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& rec = doc[i];
    const std::string where = path + ": record " + std::to_string(i);
    if (!rec.is_object() || !rec.contains("class") || !rec.contains("bbox") ||
        !rec.contains("score"))
      raise(Errc::parse_error, where + ": expected {class, bbox, score}");
    if (!rec["bbox"].is_array() || rec["bbox"].size() != 4)
      raise(Errc::parse_error, where + ": bbox must be [x_min, y_min, x_max, y_max]");

    Detection d;
    try {
      d.cls = hazard_class_from_name(rec["class"].get<std::string>());
      d.x_min = rec["bbox"][0].get<double>();
      d.y_min = rec["bbox"][1].get<double>();
      d.x_max = rec["bbox"][2].get<double>();
      d.y_max = rec["bbox"][3].get<double>();
      d.score = rec["score"].get<double>();
    } catch (const json::exception& e) {
      raise(Errc::parse_error, where + ": " + e.what());
    }

    if (!(d.x_min < d.x_max && d.x_max <= width && d.x_min >= 0.0) ||
        !(d.y_min < d.y_max && d.y_max <= height && d.y_min >= 0.0))
      raise(Errc::bounds_error, where + ": bbox degenerate or outside image");
    if (!(d.score >= 0.0 && d.score <= 1.0))
      raise(Errc::bounds_error, where + ": score outside [0, 1]");
    out.push_back(d);
  }
  return out;
}

HazardMask build_mask(const std::vector<Detection>& detections, int width, int height,
                      double margin_px, double score_threshold) {
  if (width <= 0 || height <= 0)
    raise(Errc::bounds_error, "build_mask: image size must be positive");
  if (margin_px < 0.0) raise(Errc::bounds_error, "build_mask: negative margin");

  HazardMask mask = HazardMask::zeros(width, height);
  for (const Detection& d : detections) {
    if (d.score < score_threshold) continue;
    // Integer pixel p is inside iff lo <= p < hi.
    const int x0 = std::max(0, static_cast<int>(std::ceil(d.x_min - margin_px)));
    const int x1 = std::min(width, static_cast<int>(std::ceil(d.x_max + margin_px)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(d.y_min - margin_px)));
    const int y1 = std::min(height, static_cast<int>(std::ceil(d.y_max + margin_px)));
    for (int y = y0; y < y1; ++y) {
      std::uint8_t* row = mask.bits.data() + static_cast<std::size_t>(y) * width;
      std::fill(row + x0, row + x1, std::uint8_t{1});
    }
  }
  return mask;
}

namespace {

int next_pow2(int v) {
  int p = 1;
  while (p < v) p <<= 1;
  return p;
}

// Summed-area table of the hazard bits; everything outside the real image
// counts as hazard, which makes the power-of-two padding implicit.
class OccupancyTable {
 public:
  explicit OccupancyTable(const HazardMask& m)
      : w_(m.width), h_(m.height), sat_((w_ + 1) * static_cast<std::size_t>(h_ + 1), 0) {
    for (int y = 0; y < h_; ++y) {
      std::uint32_t run = 0;
      const std::uint8_t* row = m.bits.data() + static_cast<std::size_t>(y) * w_;
      std::uint32_t* out = sat_.data() + static_cast<std::size_t>(y + 1) * (w_ + 1);
      const std::uint32_t* above = sat_.data() + static_cast<std::size_t>(y) * (w_ + 1);
      for (int x = 0; x < w_; ++x) {
        run += row[x];
        out[x + 1] = run + above[x + 1];
      }
    }
  }

  long long hazard_in(int x, int y, int side) const {
    const long long area = static_cast<long long>(side) * side;
    const int x1 = std::min(x + side, w_);
    const int y1 = std::min(y + side, h_);
    const int x0 = std::min(x, w_);
    const int y0 = std::min(y, h_);
    const long long inside =
        static_cast<long long>(x1 - x0) * (y1 - y0);
    const long long in_image = rect_sum(x0, y0, x1, y1);
    return in_image + (area - inside);  // padding is all hazard
  }

 private:
  long long rect_sum(int x0, int y0, int x1, int y1) const {
    if (x1 <= x0 || y1 <= y0) return 0;
    const auto s = [&](int x, int y) -> long long {
      return sat_[static_cast<std::size_t>(y) * (w_ + 1) + x];
    };
    return s(x1, y1) - s(x0, y1) - s(x1, y0) + s(x0, y0);
  }

  int w_, h_;
  std::vector<std::uint32_t> sat_;
};

void decompose_node(const OccupancyTable& occ, int x, int y, int side, int min_leaf,
                    std::vector<QuadLeaf>& out) {
  const long long hz = occ.hazard_in(x, y, side);
  const long long area = static_cast<long long>(side) * side;
  if (hz == 0) {
    out.push_back({x, y, side, LeafKind::free_space});
  } else if (hz == area) {
    out.push_back({x, y, side, LeafKind::hazard});
  } else if (side <= min_leaf) {
    out.push_back({x, y, side, LeafKind::mixed});
  } else {
    const int h = side / 2;
    decompose_node(occ, x, y, h, min_leaf, out);
    decompose_node(occ, x + h, y, h, min_leaf, out);
    decompose_node(occ, x, y + h, h, min_leaf, out);
    decompose_node(occ, x + h, y + h, h, min_leaf, out);
  }
}

}  // namespace

std::vector<QuadLeaf> quadtree_decompose(const HazardMask& mask, int min_leaf_px) {
  if (min_leaf_px < 1)
    raise(Errc::bounds_error, "quadtree_decompose: min_leaf_px must be >= 1");
  if (mask.width <= 0 || mask.height <= 0 ||
      mask.bits.size() != static_cast<std::size_t>(mask.width) * mask.height)
    raise(Errc::bounds_error, "quadtree_decompose: malformed mask");

  const int padded = next_pow2(std::max(mask.width, mask.height));
  OccupancyTable occ(mask);
  std::vector<QuadLeaf> leaves;
  decompose_node(occ, 0, 0, padded, min_leaf_px, leaves);
  return leaves;
}

std::vector<CandidateRegion> extract_candidates(const std::vector<QuadLeaf>& leaves,
                                                int required_px,
                                                const PixelScaleFn& scale) {
  if (required_px < 1)
    raise(Errc::bounds_error, "extract_candidates: required_px must be >= 1");

  std::vector<CandidateRegion> out;
  for (const QuadLeaf& leaf : leaves) {
    if (leaf.kind != LeafKind::free_space || leaf.side < required_px) continue;
    CandidateRegion r;
    r.x = leaf.x;
    r.y = leaf.y;
    r.side = leaf.side;
    r.center = {leaf.x + 0.5 * leaf.side, leaf.y + 0.5 * leaf.side};
    r.area_px = static_cast<long long>(leaf.side) * leaf.side;
    const double res = scale ? scale(r.center.x(), r.center.y()) : 0.0;
    r.area_m2 = (leaf.side * res) * (leaf.side * res);
    out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](const CandidateRegion& a, const CandidateRegion& b) {
    if (a.side != b.side) return a.side > b.side;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });
  return out;
}

}  // namespace hda
