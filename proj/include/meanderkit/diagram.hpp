#pragma once

// Combinatorial-map representation of knot and spatial-graph diagrams.
//
// A diagram is a set of darts (half-edges) with a fixed-point-free pairing
// `opp` (the edge involution) and a counterclockwise rotation of darts at
// every node.  Faces are orbits of d -> rot_prev(opp(d)); with ccw rotations
// this walks every face with the face on the left of each dart.  Crossings
// are 4-valent nodes whose over-strand occupies an antipodal slot pair.
// The designated outer face stands in for the unbounded region of a plane
// drawing; for disconnected diagrams it carries one boundary cycle per
// component, so V - E + F = 1 + C holds with F counting the merged face once.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "meanderkit/error.hpp"

namespace meanderkit {

using DartId = int;
using NodeId = int;
using ArcId = int;
using FaceId = int;

constexpr DartId kNoDart = -1;

enum class NodeKind { Crossing, Vertex };

struct Node {
  NodeId id = -1;
  NodeKind kind = NodeKind::Vertex;
  std::vector<DartId> rotation;  // ccw
  // Crossing only: the two darts of the over-strand (an antipodal slot pair).
  std::array<DartId, 2> over{kNoDart, kNoDart};
};

struct ExceptionalArc {
  ArcId arc = -1;
  DartId split_dart = kNoDart;
};

struct Diagram {
  std::vector<Node> nodes;        // dense, nodes[i].id == i
  std::vector<DartId> opp;        // edge involution
  std::vector<NodeId> dart_node;  // dart -> node
  std::vector<int> dart_slot;     // dart -> index in node rotation
  std::vector<ArcId> edge_label;  // dart -> principal-arc id
  std::vector<DartId> outer_darts;  // one dart per component, on its outer orbit
  std::vector<ExceptionalArc> exceptional;

  int dart_count() const { return static_cast<int>(opp.size()); }
  int node_count() const { return static_cast<int>(nodes.size()); }
  int edge_count() const { return dart_count() / 2; }
  int valence(NodeId n) const { return static_cast<int>(nodes[n].rotation.size()); }

  DartId rot_next(DartId d) const {
    const Node& n = nodes[dart_node[d]];
    return n.rotation[(dart_slot[d] + 1) % n.rotation.size()];
  }
  DartId rot_prev(DartId d) const {
    const Node& n = nodes[dart_node[d]];
    return n.rotation[(dart_slot[d] + n.rotation.size() - 1) % n.rotation.size()];
  }
  // Next dart of the face on the left of d.
  DartId face_next(DartId d) const { return rot_prev(opp[d]); }

  bool is_crossing(NodeId n) const { return nodes[n].kind == NodeKind::Crossing; }
  bool is_over(DartId d) const {
    const Node& n = nodes[dart_node[d]];
    return n.over[0] == d || n.over[1] == d;
  }
  // The dart leaving a crossing opposite to where `into` arrived (straight
  // through the crossing).
  DartId straight_through(DartId into) const {
    const Node& n = nodes[dart_node[into]];
    return n.rotation[(dart_slot[into] + 2) % 4];
  }
};

struct Face {
  FaceId id = -1;
  std::vector<std::vector<DartId>> cycles;  // one per boundary component
  bool outer = false;
  int degree() const {
    int k = 0;
    for (const auto& c : cycles) k += static_cast<int>(c.size());
    return k;
  }
};

struct PrincipalArc {
  ArcId id = -1;
  std::vector<DartId> darts;      // forward half-edges in walking order
  std::vector<NodeId> endpoints;  // empty for a loop, else {first, last}
  bool is_loop() const { return endpoints.empty(); }
  // Looped edge in the graph sense: closure is a circle.
  bool is_looped_edge() const {
    return endpoints.empty() || endpoints[0] == endpoints[1];
  }
};

struct Violation {
  std::string rule;   // "involution", "valence", "euler", "labels", ...
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

// Structural checks: involution, rotation/slot coherence, valences,
// over-strand slots, outer darts, Euler formula, edge-label coherence.
// Never throws; every problem becomes a report entry.
ValidationReport validate(const Diagram& d);

// Orbits of face_next, with the outer orbits of all components merged into
// a single face.  Face ids are assigned by smallest contained dart.
// Throws malformed_map if the involution or rotations are broken.
std::vector<Face> trace_faces(const Diagram& d);

FaceId face_of(const std::vector<Face>& faces, DartId d);
FaceId outer_face_id(const std::vector<Face>& faces);

// Number of connected components of the underlying map.
int component_count(const Diagram& d);

// Arcs traced straight through crossings, ending at Vertex nodes.
// Throws label_incoherence if edge_label disagrees with the tracing.
std::vector<PrincipalArc> principal_arcs(const Diagram& d);

const PrincipalArc* find_arc(const std::vector<PrincipalArc>& arcs, ArcId id);

bool is_simple_arc(const Diagram& d, const PrincipalArc& a);
bool is_simple_arc(const Diagram& d, ArcId arc);

// Crossings where both strands lie on `a`, ordered by first visit along the
// arc from its first endpoint (unordered set order for loops).
std::vector<NodeId> self_crossings(const Diagram& d, const PrincipalArc& a);
std::vector<NodeId> self_crossings(const Diagram& d, ArcId arc);

bool is_semi_meander(const Diagram& d);
bool is_meander(const Diagram& d);

std::vector<NodeId> outer_face_vertices(const Diagram& d);

// True if the edge of d borders the outer face on either side.
bool edge_on_outer_face(const Diagram& d, DartId dart);

void require_valid(const Diagram& d, const char* who);

}  // namespace meanderkit
