#ifndef HDA_ERRORS_HPP
#define HDA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hda {

enum class Errc {
  parse_error,
  bounds_error,
  io_error,
  degenerate_geometry,
  insufficient_points,
  degenerate_fit,
  insufficient_overlap,
  no_candidates,
};

const char* errc_name(Errc c);

/// Process exit code the CLI uses for each error class (0 is success).
int errc_exit_code(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace hda

#endif
