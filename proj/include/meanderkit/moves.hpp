#pragma once

// Equivalence-preserving diagram transformations.  Every operation is pure:
// diagram in, diagram out, plus a MoveRecord that replays the edit
// deterministically on the input diagram.

#include <optional>
#include <vector>

#include "json.hpp"
#include "meanderkit/diagram.hpp"

namespace meanderkit {

enum class MoveKind {
  R1Plus,
  R1Minus,
  R2Plus,
  R2Minus,
  R3,
  Detour,
  EliminateSelfCrossing,
  RelocateVertex,
  Subdivide,
  Smooth,
  Flype,
};

const char* move_kind_name(MoveKind k);
MoveKind move_kind_from_name(const std::string& s);

struct MoveRecord {
  MoveKind kind;
  nlohmann::json payload;  // kind-specific sites and routes

  nlohmann::json to_json() const;
  static MoveRecord from_json(const nlohmann::json& j);
};

enum class Side { Over, Under };

// --- Reidemeister moves -----------------------------------------------------
// Sites:
//   R1Plus:  {at: dart, over_in: bool} -- kink bulges left of `at`
//   R1Minus: {dart: monogon face dart}
//   R2Plus:  {push: dart a, target: dart b (same face orbit), over: bool}
//   R2Minus: {dart: either bigon face dart}
//   R3:      {dart: any triangle face dart}
// When `inv` is given it receives a record that undoes the move on the
// output diagram (site ids refer to the output).
Diagram apply_reidemeister(const Diagram& d, const MoveRecord& r, MoveRecord* inv = nullptr);

// Enumerate applicable Reidemeister sites (used by the search oracle and the
// move samplers).  R1+/R2+ enumeration is capped by the caller's budget.
std::vector<MoveRecord> enumerate_r1_minus(const Diagram& d);
std::vector<MoveRecord> enumerate_r2_minus(const Diagram& d);
std::vector<MoveRecord> enumerate_r3(const Diagram& d);
std::vector<MoveRecord> enumerate_r1_plus(const Diagram& d);
std::vector<MoveRecord> enumerate_r2_plus(const Diagram& d);

// --- Generic detour ----------------------------------------------------------
// Delete the strand given by consecutive forward darts (all-over or all-under
// at its interior crossings per `side`) and re-insert it crossing the edges
// in `route`, each entered from the side of the listed dart, with every new
// crossing on `side`.  The route refers to darts of the input diagram that
// survive the deletion.
Diagram detour_reroute(const Diagram& d, const std::vector<DartId>& strand,
                       const std::vector<DartId>& route, Side side,
                       MoveRecord* rec = nullptr);

// --- Fig.-4 style self-crossing elimination ----------------------------------
Diagram eliminate_self_crossing(const Diagram& d, ArcId arc, MoveRecord* rec = nullptr);

// --- Theorem-1 vertex relocation ---------------------------------------------
Diagram relocate_vertex(const Diagram& d, NodeId v, MoveRecord* rec = nullptr);

// --- Subdivision -------------------------------------------------------------
Diagram subdivide_edge_move(const Diagram& d, ArcId arc, DartId at, MoveRecord* rec = nullptr,
                            NodeId* new_vertex = nullptr);
Diagram smooth_vertex_move(const Diagram& d, NodeId v, MoveRecord* rec = nullptr);

// Replay a recorded move (any kind) on a diagram.
Diagram replay(const Diagram& d, const MoveRecord& r);
Diagram replay(const Diagram& d, const std::vector<MoveRecord>& rs);

std::string records_to_json(const std::vector<MoveRecord>& rs);
std::vector<MoveRecord> records_from_json(const std::string& s);

}  // namespace meanderkit
