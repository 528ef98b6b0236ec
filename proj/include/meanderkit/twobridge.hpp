#pragma once

// Rational (2-bridge) knots: fraction -> minimal 4-plat -> flype sequence ->
// minimal semi-meander diagram.

#include <vector>

#include "meanderkit/diagram.hpp"
#include "meanderkit/moves.hpp"

namespace meanderkit {

enum class Row { Top, Bottom };  // Top twists strings 2-3, Bottom 3-4

struct FourPlat {
  struct Term {
    int count;  // >= 1
    Row row;
  };
  std::vector<Term> terms;
  int crossing_count() const {
    int k = 0;
    for (const auto& t : terms) k += t.count;
    return k;
  }
};

struct SpecialAnnulus {
  NodeId crossing;              // crossing id in the materialized diagram
  std::pair<double, double> cut;  // vertical cut positions isolating it
};

// Materialized plat with the annotations the flype pipeline needs.
struct PlatDiagram {
  Diagram diagram;
  std::vector<NodeId> crossings;    // left-to-right construction order
  std::vector<int> column;          // crossing -> column index
  std::vector<ArcId> string_arcs;   // the four string arcs, top to bottom
  // Per column: the two edges (darts) of the strings not at the crossing,
  // crossing the column's vertical line.
  std::vector<std::array<DartId, 2>> bystander_edges;
};

// Continued-fraction expansion (all positive, last term >= 2 when possible).
std::vector<int> positive_continued_fraction(int p, int q);

FourPlat fraction_to_fourplat(int p, int q);

PlatDiagram fourplat_to_diagram(const FourPlat& fp);

std::vector<SpecialAnnulus> special_annuli(const PlatDiagram& pd);

// Tait flype across the annulus of `a`: the crossing is absorbed, everything
// right of the cut is mirrored, and one new crossing appears between the two
// strings not involved in `a.crossing`.  `s` must be one of those strings.
PlatDiagram flype(const PlatDiagram& pd, const SpecialAnnulus& a, ArcId s,
                  MoveRecord* rec = nullptr);

struct SemiMeanderResult {
  Diagram diagram;
  std::vector<MoveRecord> records;
  ArcId chosen_string;   // arc id of S in the materialized plat
  int flype_count = 0;
};

SemiMeanderResult minimal_semimeander(int p, int q);

}  // namespace meanderkit
