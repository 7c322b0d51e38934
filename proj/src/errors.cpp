#include "hda/errors.hpp"

namespace hda {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::parse_error: return "ParseError";
    case Errc::bounds_error: return "BoundsError";
    case Errc::io_error: return "IoError";
    case Errc::degenerate_geometry: return "DegenerateGeometry";
    case Errc::insufficient_points: return "InsufficientPoints";
    case Errc::degenerate_fit: return "DegenerateFit";
    case Errc::insufficient_overlap: return "InsufficientOverlap";
    case Errc::no_candidates: return "NoCandidates";
  }
  return "UnknownError";
}

int errc_exit_code(Errc c) {
  switch (c) {
    case Errc::no_candidates: return 2;
    case Errc::parse_error: return 3;
    case Errc::io_error: return 4;
    case Errc::degenerate_geometry: return 5;
    case Errc::bounds_error: return 6;
    case Errc::insufficient_overlap: return 7;
    case Errc::insufficient_points: return 8;
    case Errc::degenerate_fit: return 9;
  }
  return 1;
}

}  // namespace hda
