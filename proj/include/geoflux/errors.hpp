#pragma once

#include <stdexcept>
#include <string>

namespace geoflux {

// Error categories; mirrored one-to-one by the gfx_status codes of the C API.
enum class Errc {
  invalid_argument = 1,
  domain,              // point outside the open disk / polygon / parameter range
  invalid_isometry,    // map fails the unit-determinant normalization
  degenerate_chord,
  overlap,             // chords on one geodesic with overlapping interiors
  vertex_hit,          // trajectory passes through a polygon vertex
  reduction_diverged,
  degenerate_data,     // zero variance / empty ensemble where stats are required
  not_found,
  io,
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace geoflux
