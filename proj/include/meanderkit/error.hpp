#pragma once

#include <stdexcept>
#include <string>

namespace meanderkit {

enum class errc {
  malformed_map,
  label_incoherence,
  unknown_arc,
  exceptional_arc_not_loop,
  not_semi_meander,
  not_meander,
  syntax_error,
  non_planar,
  non_realizable,
  schema_error,
  layout_failure,
  pattern_mismatch,
  side_violation,
  disconnected_route,
  is_loop,
  no_self_crossing,
  already_external,
  dart_not_on_arc,
  has_loops,
  knotted_loop_present,
  not_coprime,
  even_p,
  degenerate_fraction,
  crossing_on_s,
  not_special,
  not_odd_meander,
  general_position_failure,
  malformed_strips,
  has_essential_vertices,
  not_a_loop,
  too_large,
  internal,
};

const char* errc_name(errc c);

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) {
  throw error(code, what);
}

}  // namespace meanderkit
