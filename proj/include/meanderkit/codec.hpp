#pragma once

// Diagram interchange: PD text (X/V entries whose bracket order is the ccw
// rotation), signed Gauss codes for knots, and a JSON envelope that also
// carries outer-face and exceptional-arc declarations.

#include <string>

#include "meanderkit/diagram.hpp"

namespace meanderkit {

// Rewrite edge labels from scratch: arcs sorted by their smallest dart get
// ids 0,1,2,...
void relabel_arcs(Diagram& d);

// Pick one outer dart per component: largest face orbit, ties by smallest
// dart.  Used where the input format carries no outer-face information.
void choose_default_outer(Diagram& d);

Diagram parse_pd(const std::string& text);
std::string emit_pd(const Diagram& d);

Diagram parse_gauss(const std::string& text);

std::string to_json(const Diagram& d);
Diagram from_json(const std::string& s);

// Canonical form: emit_pd of the lexicographically minimal BFS relabeling.
// Equal (orientation-preserving isomorphic) maps produce equal strings.
std::string canonical_pd(const Diagram& d);

}  // namespace meanderkit
